"""Command-line front end: compute, sweep, simulate, compare, explore.

Times are given in seconds and converted to integer ticks (``--tick`` or the
``ND_TICK`` environment variable, default 1 us).  Exit codes: 0 success,
1 usage error, 2 invalid parameters, 3 numerical guard violation.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import analysis
from .analysis import EnergyParams, TickRange
from .engine import compute_latency
from .params import InvalidParameters, ProtocolParams, default_tick, to_seconds, to_ticks
from .simulator import exhaustive_grid, monte_carlo, write_rows

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_GUARD = 3

_FLAG_FOR_FIELD = {"Ta": "--ta", "Ts": "--ts", "ds": "--ds", "da": "--da"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(value: float) -> str:
    return "INF" if math.isinf(value) else f"{value:.9f}"


def _ticks(args, flag: str, seconds: float) -> int:
    return to_ticks(seconds, args.tick, flag)


def _params(args, Ta: Optional[float] = None, Ts: Optional[float] = None) -> ProtocolParams:
    Ta = args.ta if Ta is None else Ta
    Ts = args.ts if Ts is None else Ts
    return ProtocolParams(
        Ta=_ticks(args, "--ta", Ta), Ts=_ticks(args, "--ts", Ts),
        ds=_ticks(args, "--ds", args.ds), da=_ticks(args, "--da", args.da),
    )


def _range(args, flag: str, text: str) -> TickRange:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"{flag} expects start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise UsageError(f"{flag} expects numbers in start:stop:step, got {text!r}") from None
    try:
        return TickRange(_ticks(args, flag, start), _ticks(args, flag, stop),
                         _ticks(args, flag, step))
    except InvalidParameters:
        raise
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _energy(args) -> EnergyParams:
    return EnergyParams(E_a=args.ea, E_s=args.es)


def cmd_compute(args) -> int:
    params = _params(args)
    trace: Optional[list] = [] if args.trace else None
    result = compute_latency(params, args.tick, trace=trace)
    if trace:
        print("n\tgamma\tmode\tsigma\tmass\tpartial_mean")
        for n, gamma, mode, sigma, mass, part in trace:
            print(f"{n}\t{gamma}\t{mode}\t{sigma}\t{mass}\t{part}")
    print(f"mean={_fmt(result.mean)} max={_fmt(result.max)} "
          f"coupled={'true' if result.coupled else 'false'} order={result.orders_used}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = _params(args, Ta=args.ts)
    rng = _range(args, "--ta-range", args.ta_range)
    rows = analysis.sweep_ta(base.Ts, base.ds, base.da, rng, objective=args.objective,
                             energy=_energy(args), tick=args.tick, basis=args.basis,
                             jobs=args.jobs)
    with _output(args.out) as fh:
        analysis.write_csv(rows, fh)
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = _params(args)
    horizon = _ticks(args, "--horizon", args.horizon)
    keep = args.rows is not None
    if args.exhaustive:
        summary = exhaustive_grid(params, horizon, args.tick, keep_latencies=keep)
        offsets = 2 * np.arange(params.Ts, dtype=np.int64) + 1
    else:
        summary = monte_carlo(params, args.runs, args.seed, horizon, args.tick, keep_latencies=keep)
        offsets = None
        if keep:
            rng = np.random.default_rng(args.seed)
            offsets = 2 * rng.integers(0, params.Ts, size=args.runs, dtype=np.int64) + 1
    if keep:
        with _output(args.rows) as fh:
            write_rows(fh, offsets, summary.latencies)
    print(f"mean={_fmt(summary.mean)} max={_fmt(summary.max)} "
          f"aborted={summary.aborted} runs={summary.n_runs}")
    return EXIT_OK


def _quantize(value: float) -> float:
    # same precision as the sweep CSV, so file-based and in-memory runs agree
    return analysis._parse(analysis._fmt(value))


def cmd_compare(args) -> int:
    horizon = _ticks(args, "--horizon", args.horizon)
    exclude = 0.9 * args.horizon if args.exclude_above is None else args.exclude_above
    if args.model_csv:
        with open(args.model_csv, newline="") as fh:
            rows = analysis.read_csv(fh)
        params = [ProtocolParams(_ticks(args, "Ta", r.Ta), _ticks(args, "Ts", r.Ts),
                                 _ticks(args, "ds", r.ds), _ticks(args, "da", r.da))
                  for r in rows]
    else:
        if args.ta_range is None:
            raise UsageError("compare needs --ta-range or --model-csv")
        base = _params(args, Ta=args.ts)
        rng = _range(args, "--ta-range", args.ta_range)
        rows = analysis.sweep_ta(base.Ts, base.ds, base.da, rng, tick=args.tick, jobs=args.jobs)
        params = [ProtocolParams(Ta, base.Ts, base.ds, base.da) for Ta in rng.values()]
    if not rows:
        raise UsageError("nothing to compare")
    model_mean = [_quantize(r.mean) for r in rows]
    model_max = [_quantize(r.max) for r in rows]
    seeds = np.random.SeedSequence(args.seed).spawn(len(params))
    sim_mean: List[float] = []
    sim_max: List[float] = []
    aborted: List[int] = []
    for p, seed in zip(params, seeds):
        s = monte_carlo(p, args.runs, seed, horizon, args.tick)
        sim_mean.append(s.mean)
        sim_max.append(s.max)
        aborted.append(s.aborted)
    if args.out:
        with _output(args.out) as fh:
            fh.write("Ta,model_mean,sim_mean,model_max,sim_max,aborted\n")
            for p, mm, sm, mx, sx, ab in zip(params, model_mean, sim_mean, model_max,
                                             sim_max, aborted):
                fh.write(f"{_fmt(to_seconds(p.Ta, args.tick))},{_fmt(mm)},{_fmt(sm)},"
                         f"{_fmt(mx)},{_fmt(sx)},{ab}\n")
    for label, comp, sim in (("mean", model_mean, sim_mean), ("max", model_max, sim_max)):
        m = analysis.error_metrics(comp, sim, computed_max=model_max, exclude_above=exclude)
        nrmse = "n/a" if m.nrmse is None else f"{m.nrmse:.6g}"
        print(f"{label}: rmse={m.rmse:.6g} nrmse={nrmse} max_dev={m.max_dev:.6g} "
              f"points={m.points}")
    return EXIT_OK


def cmd_explore(args) -> int:
    ds = _ticks(args, "--ds", args.ds)
    da = _ticks(args, "--da", args.da)
    ta_rng = _range(args, "--ta-range", args.ta_range)
    ts_rng = _range(args, "--ts-range", args.ts_range)
    ProtocolParams(ta_rng.start, max(ts_rng.stop, ds), ds, da)  # validate ds/da once
    grid = analysis.explore_grid(ds, da, ta_rng, ts_rng, objective=args.objective,
                                 energy=_energy(args), tick=args.tick, basis=args.basis,
                                 cap=args.cap, jobs=args.jobs)
    with _output(args.out) as fh:
        analysis.write_csv((row for line in grid for row in line), fh)
    best = analysis.best_cells(grid)
    if best:
        b = best[0]
        print(f"best Ta={_fmt(b.Ta)} Ts={_fmt(b.Ts)} {args.objective}={_fmt(b.objective)} "
              f"ties={len(best) - 1}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ndlatency",
                     description="Exact discovery latency of periodic-interval protocols.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tick", type=float, default=None,
                        help="tick length in seconds (default: $ND_TICK or 1e-6)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")

    def interval(p, need_ta=True, need_ts=True):
        if need_ta:
            p.add_argument("--ta", type=float, required=True, help="advertising interval [s]")
        if need_ts:
            p.add_argument("--ts", type=float, required=True, help="scan interval [s]")
        p.add_argument("--ds", type=float, required=True, help="scan window [s]")
        p.add_argument("--da", type=float, default=0.0, help="packet duration [s]")

    def objective(p, default):
        p.add_argument("--objective", choices=analysis.OBJECTIVES, default=default)
        p.add_argument("--basis", choices=("mean", "max"), default="mean",
                       help="latency used by the energy objectives")
        p.add_argument("--ea", type=float, default=1.0, help="energy per advertising packet")
        p.add_argument("--es", type=float, default=1.0, help="scan energy per unit duty")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", parents=[common], help="mean and max latency of one setting")
    interval(p)
    p.add_argument("--trace", action="store_true", help="print one line per iteration")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("sweep", parents=[common], help="latency over a range of Ta (CSV)")
    interval(p, need_ta=False)
    p.add_argument("--ta-range", required=True, help="start:stop:step in seconds, inclusive")
    objective(p, "mean_latency")
    p.add_argument("--out", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[common], help="brute-force simulation")
    interval(p)
    p.add_argument("--runs", type=int, default=10000, help="Monte Carlo runs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float, default=1000.0, help="abort after this many seconds")
    p.add_argument("--exhaustive", action="store_true",
                   help="simulate every tick offset instead of random ones")
    p.add_argument("--rows", help="write per-run CSV rows to this file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common], help="model vs Monte Carlo over a Ta range")
    p.add_argument("--ts", type=float, help="scan interval [s]")
    p.add_argument("--ds", type=float, help="scan window [s]")
    p.add_argument("--da", type=float, default=0.0, help="packet duration [s]")
    p.add_argument("--ta-range", help="start:stop:step in seconds, inclusive")
    p.add_argument("--model-csv", help="read model rows from a sweep CSV instead")
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float, default=1000.0)
    p.add_argument("--exclude-above", type=float, default=None,
                   help="drop points whose computed max exceeds this [s] (default 0.9*horizon)")
    p.add_argument("--out", help="per-point comparison CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("explore", parents=[common], help="objective over a Ta x Ts grid (CSV)")
    p.add_argument("--ds", type=float, required=True)
    p.add_argument("--da", type=float, default=0.0)
    p.add_argument("--ta-range", required=True)
    p.add_argument("--ts-range", required=True)
    objective(p, "latency_dc_product")
    p.add_argument("--cap", type=float, default=analysis.DEFAULT_CAP,
                   help="clamp objective values above this")
    p.add_argument("--out", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_explore)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tick is None:
            args.tick = default_tick()
        if args.tick <= 0:
            raise UsageError("--tick must be positive")
        if args.command == "compare" and not args.model_csv and (args.ts is None or args.ds is None):
            raise UsageError("compare needs --ts and --ds unless --model-csv is given")
        return args.func(args)
    except UsageError as exc:
        print(f"ndlatency: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidParameters as exc:
        flag = _FLAG_FOR_FIELD.get(exc.field, exc.field)
        where = f"{flag}: " if flag else ""
        print(f"ndlatency: invalid parameter {where}{exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as exc:
        print(f"ndlatency: numerical guard violated: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"ndlatency: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
