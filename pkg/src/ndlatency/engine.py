"""Exact mean and worst-case discovery latency.

Frame of reference for every stage: the scan window S0 occupies
``[-ds_eff, 0]`` and S1 occupies ``[Ts - ds_eff, Ts]``.  The probability
buffer holds where the packet offset currently lies inside ``[0, Ts - ds_eff]``.
A growing stage moves offsets right towards S1 by ``gamma`` per ``sigma``
ticks, a shrinking stage moves them left towards S0.  Offsets that jump over
the window are parked in the target area of the next stage:

* next stage shrinking: ``(0, gamma - ds_eff)``, right of S0;
* next stage growing:   ``(Ts - gamma, Ts - ds_eff)``, left of S1.

Densities are kept as integer weights in units of ``1/Ts`` so that every
accumulated quantity is an exact integer until the final division.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from .buffer import ProbabilityBuffer
from .gamma import GammaSchedule, GammaStage, Mode, Termination, build_schedule
from .params import DEFAULT_TICK, EffectiveParams, ProtocolParams, as_effective, to_seconds

INF = math.inf


@dataclass(frozen=True)
class SegmentSplit:
    """Step counts and part lengths of one segment under one stage.

    ``N_l``/``N_u`` bound the number of gamma steps that land exactly on a
    grid point inside the segment.  ``d_Nu`` and ``d_Nl`` are the lengths of
    the partial periods at either end, ``d_f`` the full segment length.
    """

    N_l: int
    N_u: int
    d_Nl: int
    d_f: int
    d_Nu: int


@dataclass
class IterationOutcome:
    partial_mean: Fraction
    next_buffer: ProbabilityBuffer
    max_penalty: int = -1
    absorbed_mass: Fraction = Fraction(0)


@dataclass(frozen=True)
class LatencyResult:
    """Mean and maximum latency in seconds (``inf`` when coupled).

    ``mean_ticks``/``max_ticks`` keep the exact values.
    """

    mean: float
    max: float
    orders_used: int
    coupled: bool
    mean_ticks: object = None
    max_ticks: object = None
    schedule: Optional[GammaSchedule] = field(default=None, compare=False, repr=False)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def split_growing(l: int, r: int, gamma: int, params: EffectiveParams) -> SegmentSplit:
    reach = params.Ts - params.ds_eff
    N_l = _ceil_div(reach - r, gamma)
    N_u = (reach - l) // gamma
    d_Nu = (reach - N_u * gamma) - l
    d_Nl = r - (reach - N_l * gamma)
    return SegmentSplit(N_l=N_l, N_u=N_u, d_Nl=d_Nl, d_f=r - l, d_Nu=d_Nu)


def split_shrinking(l: int, r: int, gamma: int) -> SegmentSplit:
    N_l = _ceil_div(l, gamma)
    N_u = r // gamma
    return SegmentSplit(N_l=N_l, N_u=N_u, d_Nl=N_l * gamma - l, d_f=r - l, d_Nu=r - N_u * gamma)


class _Accumulator:
    """Collects one iteration's weighted latency, hits and parked offsets."""

    __slots__ = ("weighted", "max_penalty", "absorbed", "out", "params", "stage",
                 "next_mode", "zeta")

    def __init__(self, params: EffectiveParams, stage: GammaStage, next_mode: Mode):
        self.weighted = 0
        self.max_penalty = -1
        self.absorbed = 0
        self.out: List[Tuple[int, int, object, int]] = []
        self.params = params
        self.stage = stage
        self.next_mode = next_mode

    def hit(self, w, length: int, steps: int, zeta: int):
        if length <= 0:
            return
        self.weighted += w * length * steps * self.stage.sigma
        self.absorbed += w * length
        penalty = zeta + steps * self.stage.sigma
        if penalty > self.max_penalty:
            self.max_penalty = penalty

    def park(self, w, lo: int, hi: int, steps: int, zeta: int):
        """Offsets moved to ``[lo, hi]`` of the next target area after ``steps`` steps."""
        if hi <= lo:
            return
        self.weighted += w * (hi - lo) * steps * self.stage.sigma
        self.out.append((lo, hi, w, zeta + steps * self.stage.sigma))


def _process_piece_growing(acc: _Accumulator, w, a: int, b: int, k: int, zeta: int):
    """Offsets ``[a, b]`` all needing ``k`` growing steps to reach S1 or beyond."""
    if b <= a:
        return
    p = acc.params
    gamma = acc.stage.gamma
    grid = p.Ts - p.ds_eff - k * gamma
    hit_hi = min(b, grid + p.ds_eff)
    acc.hit(w, hit_hi - max(a, grid), k, zeta)
    miss_lo = max(a, grid + p.ds_eff)
    if miss_lo < b:
        if acc.next_mode is Mode.SHRINKING:
            shift = k * gamma - p.Ts
            acc.park(w, miss_lo + shift, b + shift, k, zeta)
        else:
            shift = (k - 1) * gamma
            acc.park(w, miss_lo + shift, b + shift, k - 1, zeta)


def _process_piece_shrinking(acc: _Accumulator, w, a: int, b: int, k: int, zeta: int):
    """Offsets ``[a, b]`` all needing ``k`` shrinking steps to reach S0 or beyond."""
    if b <= a:
        return
    p = acc.params
    gamma = acc.stage.gamma
    grid = k * gamma
    hit_lo = max(a, grid - p.ds_eff)
    acc.hit(w, min(b, grid) - hit_lo, k, zeta)
    miss_hi = min(b, grid - p.ds_eff)
    if a < miss_hi:
        if acc.next_mode is Mode.SHRINKING:
            shift = -(k - 1) * gamma
            acc.park(w, a + shift, miss_hi + shift, k - 1, zeta)
        else:
            shift = p.Ts - k * gamma
            acc.park(w, a + shift, miss_hi + shift, k, zeta)


def _full_periods(acc: _Accumulator, w, first: int, last: int, zeta: int):
    """Complete gamma periods with step counts ``first..last`` (inclusive)."""
    count = last - first + 1
    if count <= 0:
        return
    p = acc.params
    gamma = acc.stage.gamma
    sigma = acc.stage.sigma
    step_sum = (first + last) * count // 2
    hit_len = min(gamma, p.ds_eff)
    acc.weighted += w * hit_len * step_sum * sigma
    acc.absorbed += w * hit_len * count
    penalty = zeta + last * sigma
    if penalty > acc.max_penalty:
        acc.max_penalty = penalty
    miss_len = gamma - p.ds_eff
    if miss_len <= 0:
        return
    growing = acc.stage.mode is Mode.GROWING
    # steps charged for a parked miss: all k when the jump lands in the next frame
    to_next_frame = growing == (acc.next_mode is Mode.SHRINKING)
    if to_next_frame:
        charged_sum, charged_max = step_sum, last
    else:
        charged_sum, charged_max = step_sum - count, last - 1
    if acc.next_mode is Mode.SHRINKING:
        lo, hi = 0, miss_len
    else:
        lo, hi = p.Ts - gamma, p.Ts - p.ds_eff
    acc.weighted += w * miss_len * charged_sum * sigma
    acc.out.append((lo, hi, w * count, zeta + charged_max * sigma))


def _check_next_mode(next_mode: Mode, stage: GammaStage, params: EffectiveParams):
    if stage.gamma > params.ds_eff and next_mode not in (Mode.SHRINKING, Mode.GROWING):
        raise ValueError(f"next mode must be shrinking or growing, got {next_mode}")


def grow_to_right(buffer: ProbabilityBuffer, stage: GammaStage, next_mode: Mode,
                  params) -> IterationOutcome:
    p = as_effective(params)
    if stage.mode is not Mode.GROWING:
        raise ValueError(f"grow_to_right needs a growing stage, got {stage.mode}")
    _check_next_mode(next_mode, stage, p)
    acc = _Accumulator(p, stage, next_mode)
    gamma = stage.gamma
    reach = p.Ts - p.ds_eff
    for seg in buffer:
        l, r, w, zeta = seg.t_s, seg.t_e, seg.p, seg.zeta
        sp = split_growing(l, r, gamma, p)
        if sp.N_u >= sp.N_l:
            _process_piece_growing(acc, w, l, l + sp.d_Nu, sp.N_u + 1, zeta)
            _full_periods(acc, w, sp.N_l + 1, sp.N_u, zeta)
            _process_piece_growing(acc, w, r - sp.d_Nl, r, sp.N_l, zeta)
        else:
            _process_piece_growing(acc, w, l, r, sp.N_l, zeta)
    return _finish(acc)


def shrink_to_left(buffer: ProbabilityBuffer, stage: GammaStage, next_mode: Mode,
                   params) -> IterationOutcome:
    p = as_effective(params)
    if stage.mode is not Mode.SHRINKING:
        raise ValueError(f"shrink_to_left needs a shrinking stage, got {stage.mode}")
    _check_next_mode(next_mode, stage, p)
    acc = _Accumulator(p, stage, next_mode)
    gamma = stage.gamma
    for seg in buffer:
        l, r, w, zeta = seg.t_s, seg.t_e, seg.p, seg.zeta
        sp = split_shrinking(l, r, gamma)
        if sp.N_u >= sp.N_l:
            _process_piece_shrinking(acc, w, l, l + sp.d_Nl, sp.N_l, zeta)
            _full_periods(acc, w, sp.N_l + 1, sp.N_u, zeta)
            _process_piece_shrinking(acc, w, r - sp.d_Nu, r, sp.N_u + 1, zeta)
        else:
            _process_piece_shrinking(acc, w, l, r, sp.N_l, zeta)
    return _finish(acc)


def _finish(acc: _Accumulator) -> IterationOutcome:
    nxt = ProbabilityBuffer()
    for lo, hi, w, zeta in acc.out:
        nxt.add(lo, hi, w, zeta)
    return IterationOutcome(partial_mean=acc.weighted, next_buffer=nxt,
                            max_penalty=acc.max_penalty, absorbed_mass=acc.absorbed)


def initialize(params) -> Tuple[int, ProbabilityBuffer]:
    """Zero accumulator and the initial buffer, weight 1 (density ``1/Ts``)."""
    p = as_effective(params)
    buf = ProbabilityBuffer()
    if p.Ts > p.ds_eff:
        buf.add(0, p.Ts - p.ds_eff, 1, 0)
    return 0, buf


def compute_latency(params: ProtocolParams, tick: float = DEFAULT_TICK,
                    trace: Optional[list] = None) -> LatencyResult:
    """Mean and worst-case latency over a uniformly distributed first packet.

    ``trace``, when given, receives one tuple per iteration:
    ``(n, gamma, mode, sigma, buffer_mass, partial_mean)`` with masses and
    partial means as exact fractions of ticks.
    """
    p = as_effective(params)
    schedule = build_schedule(p)
    weighted, buf = initialize(p)
    if not buf:
        # scanner always listening: every offset is discovered by the first packet
        return LatencyResult(mean=to_seconds(p.da, tick), max=to_seconds(p.da, tick),
                             orders_used=0, coupled=False, mean_ticks=Fraction(p.da),
                             max_ticks=p.da, schedule=schedule)
    if schedule.termination is Termination.COUPLED:
        return LatencyResult(mean=INF, max=INF, orders_used=schedule.order, coupled=True,
                             mean_ticks=INF, max_ticks=INF, schedule=schedule)
    if schedule.termination is Termination.ORDER_LIMIT:
        raise ArithmeticError(f"gamma recursion did not terminate for {params}")

    worst = 0
    stages = schedule.stages
    used = 0
    for n, stage in enumerate(stages):
        if not buf:
            break
        used = n
        last = n == len(stages) - 1
        next_mode = stages[n + 1].mode if not last else Mode.SHRINKING
        mass_in = buf.total_mass()
        if stage.mode is Mode.GROWING:
            outcome = grow_to_right(buf, stage, next_mode, p)
        else:
            outcome = shrink_to_left(buf, stage, next_mode, p)
        weighted += outcome.partial_mean
        worst = max(worst, outcome.max_penalty)
        if trace is not None:
            trace.append((n, stage.gamma, stage.mode.value, stage.sigma,
                          Fraction(mass_in, p.Ts), Fraction(outcome.partial_mean, p.Ts)))
        buf = outcome.next_buffer
    if buf:
        raise ArithmeticError(f"probability mass left after the final stage for {params}")
    mean_ticks = Fraction(weighted, p.Ts) + p.da
    max_ticks = worst + p.da
    return LatencyResult(mean=to_seconds(mean_ticks, tick), max=to_seconds(max_ticks, tick),
                         orders_used=used, coupled=False, mean_ticks=mean_ticks,
                         max_ticks=max_ticks, schedule=schedule)


def closed_form_ta_le_ds(params: ProtocolParams, phi0) -> int:
    """Latency from offset ``phi0`` (ticks after the end of S0) when ``Ta <= ds_eff``."""
    p = as_effective(params)
    if p.Ta > p.ds_eff:
        raise ValueError("closed form only holds for Ta <= ds - da")
    gap = p.Ts - phi0 - p.ds_eff
    if gap >= 0:
        return math.ceil(Fraction(gap) / p.Ta) * p.Ta + p.da
    return p.da
