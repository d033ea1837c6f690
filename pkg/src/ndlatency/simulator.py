"""Brute-force rendezvous simulation, used as the oracle for the engine.

A packet sent at ``t`` is received iff ``j*Ts - ds <= t <= j*Ts - da`` for
some scan window ``j``.  The latency of a run is the time from the first
packet to the end of the first received packet.

Every partition boundary of the latency function is an integer tick, so the
latency is constant on each open interval ``(k, k+1)``.  Evaluating at the
half-tick points ``k + 1/2`` therefore reproduces the continuous-uniform mean
and supremum exactly.  Vectorized evaluation works in half-tick units to
stay in integers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, TextIO

import numpy as np

from .params import DEFAULT_TICK, ProtocolParams, to_seconds

GRID_LIMIT = 10 ** 7
_BLOCK_ELEMENTS = 1 << 20


class GridTooLarge(ArithmeticError):
    """The exhaustive offset grid would exceed :data:`GRID_LIMIT` points."""


@dataclass(frozen=True)
class OffsetState:
    """First packet time and its offset to the end of the preceding window."""

    t_a0: Fraction
    phi: Fraction

    @classmethod
    def at(cls, params: ProtocolParams, t_a0) -> "OffsetState":
        t_a0 = Fraction(t_a0)
        if not 0 <= t_a0 < params.Ts:
            raise ValueError(f"offset {t_a0} outside [0, Ts)")
        return cls(t_a0=t_a0, phi=t_a0 % params.Ts)


@dataclass(frozen=True)
class SimSummary:
    """Sample statistics over discovered runs; aborted runs are only counted.

    ``mean``/``max`` are seconds (``inf`` when nothing was discovered),
    ``mean_ticks``/``max_ticks`` the exact values.
    """

    mean: float
    max: float
    aborted: int
    n_runs: int
    mean_ticks: object = None
    max_ticks: object = None
    latencies: Optional[np.ndarray] = None

    @property
    def discovered(self) -> int:
        return self.n_runs - self.aborted


def orbit_period(params: ProtocolParams) -> int:
    """Number of packets after which the packet phase modulo Ts repeats."""
    return params.Ts // math.gcd(params.Ta, params.Ts)


def _last_step(params: ProtocolParams, horizon: int) -> int:
    """Largest packet index worth simulating within ``horizon`` ticks."""
    if horizon < params.da:
        return -1
    return min((horizon - params.da) // params.Ta, orbit_period(params) - 1)


def simulate_offset(params: ProtocolParams, t_a0, horizon: int):
    """Latency in ticks (a ``Fraction``) for a first packet at ``t_a0``; ``None`` if aborted.

    Steps packet by packet.  The packet phase repeats after
    :func:`orbit_period` packets, so a run that has not hit by then never will.
    """
    state = OffsetState.at(params, t_a0)
    Ta, Ts, ds, da = params.Ta, params.Ts, params.ds, params.da
    for i in range(_last_step(params, horizon) + 1):
        t = state.t_a0 + i * Ta
        j = math.ceil((t + da) / Ts)
        if j * Ts - ds <= t:
            return Fraction(i * Ta + da)
    return None


def half_tick_latencies(params: ProtocolParams, offsets_half: np.ndarray,
                        horizon: int) -> np.ndarray:
    """Vectorized :func:`simulate_offset` for odd half-tick offsets.

    ``offsets_half`` holds ``2*t_a0`` (odd integers); returns latencies in
    ticks, ``-1`` for aborted runs.
    """
    Ta, Ts, ds, da = params.Ta, params.Ts, params.ds, params.da
    period2 = 2 * Ts
    lo, hi = 2 * (Ts - ds), 2 * (Ts - da)
    step2 = (2 * Ta) % period2
    offsets_half = np.asarray(offsets_half, dtype=np.int64)
    steps_hit = np.full(offsets_half.shape, -1, dtype=np.int64)
    last = _last_step(params, horizon)
    active = np.arange(offsets_half.size)
    phase = offsets_half % period2
    base = 0
    while active.size and base <= last:
        block = max(8, min(4096, _BLOCK_ELEMENTS // active.size, last - base + 1))
        ks = np.arange(block, dtype=np.int64)
        pos = (phase[:, None] + ks[None, :] * step2) % period2
        hits = (pos >= lo) & (pos <= hi)
        hits[:, max(0, last - base + 1):] = False
        found = hits.any(axis=1)
        first = hits.argmax(axis=1)
        steps_hit[active[found]] = base + first[found]
        keep = ~found
        active = active[keep]
        phase = (phase[keep] + block * step2) % period2
        base += block
    latencies = np.where(steps_hit >= 0, steps_hit * Ta + da, -1)
    return latencies


def _summarize(latencies: np.ndarray, tick: float, keep: bool) -> SimSummary:
    n_runs = int(latencies.size)
    done = latencies[latencies >= 0]
    aborted = n_runs - int(done.size)
    if done.size:
        mean_ticks = Fraction(int(done.sum(dtype=object)), int(done.size))
        max_ticks = int(done.max())
        mean, mx = to_seconds(mean_ticks, tick), to_seconds(max_ticks, tick)
    else:
        mean_ticks = max_ticks = math.inf
        mean = mx = math.inf
    return SimSummary(mean=mean, max=mx, aborted=aborted, n_runs=n_runs,
                      mean_ticks=mean_ticks, max_ticks=max_ticks,
                      latencies=latencies if keep else None)


def exhaustive_grid(params: ProtocolParams, horizon: int, tick: float = DEFAULT_TICK,
                    keep_latencies: bool = False) -> SimSummary:
    """Simulate every offset ``k + 1/2``, ``k = 0..Ts-1``."""
    if params.Ts > GRID_LIMIT:
        raise GridTooLarge(f"offset grid of {params.Ts} points exceeds the limit of {GRID_LIMIT}")
    offsets = 2 * np.arange(params.Ts, dtype=np.int64) + 1
    return _summarize(half_tick_latencies(params, offsets, horizon), tick, keep_latencies)


def monte_carlo(params: ProtocolParams, n_runs: int, seed: int, horizon: int,
                tick: float = DEFAULT_TICK, keep_latencies: bool = False) -> SimSummary:
    """Runs with a uniformly random first packet time in ``[0, Ts)``.

    The latency is constant on every unit tick interval, so drawing the
    interval uniformly and evaluating at its midpoint has exactly the
    distribution of a continuous uniform draw.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    rng = np.random.default_rng(seed)
    offsets = 2 * rng.integers(0, params.Ts, size=n_runs, dtype=np.int64) + 1
    return _summarize(half_tick_latencies(params, offsets, horizon), tick, keep_latencies)


def write_rows(out: TextIO, offsets_half: np.ndarray, latencies: np.ndarray):
    """CSV rows ``offset_ticks,latency_ticks,aborted``; offsets are printed as ticks."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["offset_ticks", "latency_ticks", "aborted"])
    for off, lat in zip(np.asarray(offsets_half).tolist(), np.asarray(latencies).tolist()):
        aborted = lat < 0
        writer.writerow([f"{off / 2:.1f}", "" if aborted else lat, int(aborted)])
