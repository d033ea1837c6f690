"""Parameter sweeps, energy objectives and model-vs-simulation error metrics."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, TextIO

import numpy as np

from .engine import LatencyResult, compute_latency
from .params import DEFAULT_TICK, ProtocolParams, to_seconds

INF_TOKEN = "INF"
CSV_HEADER = ["Ta", "Ts", "ds", "da", "mean", "max", "order", "duty_cycle_adv", "objective"]
OBJECTIVES = ("mean_latency", "max_latency", "energy_adv", "energy_scan", "energy_joint",
              "latency_dc_product")
DEFAULT_CAP = 1e10


@dataclass(frozen=True)
class EnergyParams:
    E_a: float = 1.0
    E_s: float = 1.0

    def __post_init__(self):
        if self.E_a < 0 or self.E_s < 0:
            raise ValueError("energies must be non-negative")


class EnergyMetrics(NamedTuple):
    E_nd_a: float
    E_nd_s: float
    latency_dc_product: float


@dataclass(frozen=True)
class ErrorMetrics:
    rmse: float
    nrmse: Optional[float]
    max_dev: float
    points: int


@dataclass(frozen=True)
class SweepRow:
    Ta: float
    Ts: float
    ds: float
    da: float
    mean: float
    max: float
    order: int
    duty_cycle_adv: float
    objective: float


@dataclass(frozen=True)
class TickRange:
    """Inclusive arithmetic progression of tick values."""

    start: int
    stop: int
    step: int

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("range step must be positive")
        if self.stop < self.start:
            raise ValueError(f"range stop {self.stop} lies before start {self.start}")

    def values(self) -> range:
        return range(self.start, self.stop + 1, self.step)

    def __len__(self):
        return len(self.values())


def energy_metrics(result: LatencyResult, params: ProtocolParams, energy: EnergyParams,
                   tick: float = DEFAULT_TICK, basis: str = "mean") -> EnergyMetrics:
    """Advertiser/scanner discovery energy and the advertiser latency-duty-cycle product.

    ``basis="max"`` uses the worst-case latency in place of the mean.
    """
    latency = _basis_latency(result, basis)
    if math.isinf(latency):
        return EnergyMetrics(math.inf, math.inf, math.inf)
    Ta = to_seconds(params.Ta, tick)
    Ts = to_seconds(params.Ts, tick)
    ds = to_seconds(params.ds, tick)
    da = to_seconds(params.da, tick)
    return EnergyMetrics(
        E_nd_a=energy.E_a * latency / Ta * da,
        E_nd_s=energy.E_s * latency / Ts * ds,
        latency_dc_product=da / Ta * latency,
    )


def _basis_latency(result: LatencyResult, basis: str) -> float:
    if basis == "mean":
        return result.mean
    if basis == "max":
        return result.max
    raise ValueError(f"basis must be 'mean' or 'max', got {basis!r}")


def objective_value(objective: str, result: LatencyResult, params: ProtocolParams,
                    energy: EnergyParams, tick: float = DEFAULT_TICK,
                    basis: str = "mean") -> float:
    if objective == "mean_latency":
        return result.mean
    if objective == "max_latency":
        return result.max
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}; choose from {', '.join(OBJECTIVES)}")
    em = energy_metrics(result, params, energy, tick, basis)
    if objective == "energy_adv":
        return em.E_nd_a
    if objective == "energy_scan":
        return em.E_nd_s
    if objective == "energy_joint":
        return em.E_nd_a + em.E_nd_s
    return em.latency_dc_product


def error_metrics(d_comp: Sequence[float], d_sim: Sequence[float],
                  computed_max: Optional[Sequence[float]] = None,
                  exclude_above: Optional[float] = None) -> ErrorMetrics:
    """RMSE, normalized error and maximum deviation between two latency curves.

    Points whose computed maximum latency lies above ``exclude_above`` are
    dropped first (those runs would have hit the simulation abort).  The
    normalized error divides the squared RMSE by the range of ``d_sim``; it is
    ``None`` when that range is zero.
    """
    comp = np.asarray(d_comp, dtype=float)
    sim = np.asarray(d_sim, dtype=float)
    if comp.shape != sim.shape:
        raise ValueError(f"series lengths differ: {comp.size} vs {sim.size}")
    keep = np.ones(comp.shape, dtype=bool)
    if exclude_above is not None:
        ref = comp if computed_max is None else np.asarray(computed_max, dtype=float)
        if ref.shape != comp.shape:
            raise ValueError("computed_max must match the series length")
        keep &= ref <= exclude_above
    comp, sim = comp[keep], sim[keep]
    if comp.size == 0:
        raise ValueError("no data points left after exclusion")
    diff = comp - sim
    rmse = float(np.sqrt(np.mean(diff ** 2)))
    spread = float(sim.max() - sim.min())
    nrmse = rmse ** 2 / spread if spread > 0 else None
    return ErrorMetrics(rmse=rmse, nrmse=nrmse, max_dev=float(np.max(np.abs(diff))),
                        points=int(comp.size))


def _row(params: ProtocolParams, objective: str, energy: EnergyParams, tick: float,
         basis: str, cap: Optional[float]) -> SweepRow:
    result = compute_latency(params, tick)
    value = objective_value(objective, result, params, energy, tick, basis)
    if cap is not None and value > cap:
        value = cap
    return SweepRow(
        Ta=to_seconds(params.Ta, tick), Ts=to_seconds(params.Ts, tick),
        ds=to_seconds(params.ds, tick), da=to_seconds(params.da, tick),
        mean=result.mean, max=result.max, order=result.orders_used,
        duty_cycle_adv=params.da / params.Ta, objective=value,
    )


def _row_star(args):
    return _row(*args)


def _evaluate(jobs_args: List[tuple], jobs: int) -> List[SweepRow]:
    if jobs <= 1 or len(jobs_args) < 2:
        return [_row(*a) for a in jobs_args]
    chunk = max(1, len(jobs_args) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_row_star, jobs_args, chunksize=chunk))


def sweep_ta(Ts: int, ds: int, da: int, ta_range: TickRange, objective: str = "mean_latency",
             energy: EnergyParams = EnergyParams(), tick: float = DEFAULT_TICK,
             basis: str = "mean", jobs: int = 1) -> List[SweepRow]:
    """One row per advertising interval, ascending in Ta."""
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    args = [(ProtocolParams(Ta, Ts, ds, da), objective, energy, tick, basis, None)
            for Ta in ta_range.values()]
    return _evaluate(args, jobs)


def explore_grid(ds: int, da: int, ta_range: TickRange, ts_range: TickRange,
                 objective: str = "latency_dc_product", energy: EnergyParams = EnergyParams(),
                 tick: float = DEFAULT_TICK, basis: str = "mean", cap: Optional[float] = DEFAULT_CAP,
                 jobs: int = 1) -> List[List[SweepRow]]:
    """Objective over the Ta x Ts plane; ``grid[i_ts][i_ta]``.

    Objective values above ``cap`` are clamped to it.  Scan intervals shorter
    than the scan window are skipped.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    ts_values = [Ts for Ts in ts_range.values() if Ts >= ds]
    ta_values = list(ta_range.values())
    args = [(ProtocolParams(Ta, Ts, ds, da), objective, energy, tick, basis, cap)
            for Ts in ts_values for Ta in ta_values]
    flat = _evaluate(args, jobs)
    width = len(ta_values)
    return [flat[i * width:(i + 1) * width] for i in range(len(ts_values))]


def best_cells(grid: Iterable[Iterable[SweepRow]]) -> List[SweepRow]:
    """All cells sharing the minimal objective value."""
    cells = [row for line in grid for row in line]
    if not cells:
        return []
    best = min(c.objective for c in cells)
    return [c for c in cells if c.objective == best]


def _fmt(value: float) -> str:
    if math.isinf(value):
        return INF_TOKEN
    return f"{value:.9f}"


def write_csv(rows: Iterable[SweepRow], out: TextIO):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([_fmt(r.Ta), _fmt(r.Ts), _fmt(r.ds), _fmt(r.da), _fmt(r.mean),
                         _fmt(r.max), r.order, _fmt(r.duty_cycle_adv), _fmt(r.objective)])


def _parse(token: str) -> float:
    return math.inf if token == INF_TOKEN else float(token)


def read_csv(src: TextIO) -> List[SweepRow]:
    reader = csv.reader(src)
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        Ta, Ts, ds, da, mean, mx, order, dc, obj = rec
        rows.append(SweepRow(Ta=_parse(Ta), Ts=_parse(Ts), ds=_parse(ds), da=_parse(da),
                             mean=_parse(mean), max=_parse(mx), order=int(order),
                             duty_cycle_adv=_parse(dc), objective=_parse(obj)))
    return rows
