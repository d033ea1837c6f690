"""Gamma-sequence schedule: offset drift per stage, its mode and its penalty.

Stage ``n`` says: after ``sigma`` ticks of advertiser time (a whole number of
advertising intervals) the offset between a packet and a scan window has
grown or shrunk by exactly ``gamma`` ticks.  Stages are produced by a
least-absolute-remainder recursion on the pair (gamma, distance to travel),
so ``gamma`` at least halves from one stage to the next.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .params import EffectiveParams, as_effective


class Mode(enum.Enum):
    SHRINKING = "s"
    GROWING = "g"
    COUPLING = "c"

    def flipped(self) -> "Mode":
        if self is Mode.SHRINKING:
            return Mode.GROWING
        if self is Mode.GROWING:
            return Mode.SHRINKING
        raise ValueError("coupling has no opposite mode")

    @property
    def sign(self) -> int:
        """+1 if the offset grows, -1 if it shrinks, 0 when coupled."""
        return {"g": 1, "s": -1, "c": 0}[self.value]


class Termination(enum.Enum):
    WINDOW_REACHED = "window_reached"
    COUPLED = "coupled"
    ORDER_LIMIT = "order_limit"


@dataclass(frozen=True)
class GammaStage:
    order: int
    gamma: int
    mode: Mode
    sigma: int
    sigma_s: int
    d_t: int
    q: Optional[int] = None


def advertising_multiple(stage: GammaStage, Ta: int) -> int:
    return stage.sigma // Ta


def scan_multiple(stage: GammaStage, Ta: int, Ts: int) -> int:
    """The implicit j_n with ``i_n*Ta - j_n*Ts = sign * gamma``."""
    return (stage.sigma - stage.mode.sign * stage.gamma) // Ts


@dataclass(frozen=True)
class GammaSchedule:
    params: EffectiveParams
    stages: tuple = field(default_factory=tuple)
    termination: Termination = Termination.WINDOW_REACHED

    @property
    def coupled(self) -> bool:
        return self.termination is Termination.COUPLED

    @property
    def order(self) -> int:
        """Highest order computed."""
        return len(self.stages) - 1

    def __len__(self):
        return len(self.stages)

    def __iter__(self):
        return iter(self.stages)

    def __getitem__(self, n):
        return self.stages[n]


def max_order(params) -> int:
    """Upper bound on the number of recursion steps before gamma fits the window.

    Smallest n with ``min(Ta, Ts) / 2**n <= ds_eff``, evaluated in integers
    so that exact powers of two do not round the wrong way.
    """
    p = as_effective(params)
    span = min(p.Ta, p.Ts)
    n = 0
    while span > p.ds_eff << n:
        n += 1
    return n


def initial_stage(params) -> GammaStage:
    p = as_effective(params)
    Ta, Ts = p.Ta, p.Ts
    if 2 * Ta <= Ts:
        gamma, mode = Ta, Mode.GROWING
    else:
        # one packet per step; pick the closer of the two neighbouring scan multiples
        gamma_s = -(-Ta // Ts) * Ts - Ta
        gamma_g = Ta - (Ta // Ts) * Ts
        if gamma_g < gamma_s:
            gamma, mode = gamma_g, Mode.GROWING
        else:
            gamma, mode = gamma_s, Mode.SHRINKING
    if gamma == 0:
        mode = Mode.COUPLING
    return GammaStage(order=0, gamma=gamma, mode=mode, sigma=Ta, sigma_s=0, d_t=Ts)


def next_stage(prev: GammaStage) -> GammaStage:
    if prev.mode is Mode.COUPLING or prev.gamma <= 0:
        raise ValueError(f"stage {prev.order} is terminal (coupled); no stage follows it")
    q, r = divmod(prev.d_t, prev.gamma)
    twice_r = 2 * r
    # a tie takes the mode change: same gamma, lower penalty
    if twice_r <= prev.gamma:
        mode = prev.mode.flipped()
        gamma = r
        d_t = prev.gamma - r
        sigma = prev.sigma_s + q * prev.sigma
        sigma_s = prev.sigma_s + (q + 1) * prev.sigma
    else:
        mode = prev.mode
        gamma = prev.gamma - r
        d_t = r
        sigma = prev.sigma_s + (q + 1) * prev.sigma
        sigma_s = prev.sigma_s + q * prev.sigma
    if gamma == 0:
        mode = Mode.COUPLING
    return GammaStage(order=prev.order + 1, gamma=gamma, mode=mode,
                      sigma=sigma, sigma_s=sigma_s, d_t=d_t, q=q)


def build_schedule(params, order_limit: Optional[int] = None) -> GammaSchedule:
    """Iterate the recursion until gamma fits the window or the offsets couple."""
    p = as_effective(params)
    if order_limit is None:
        order_limit = max_order(p) + 2
    stage = initial_stage(p)
    stages = [stage]
    while True:
        if stage.mode is Mode.COUPLING:
            termination = Termination.COUPLED
            break
        if stage.gamma <= p.ds_eff:
            termination = Termination.WINDOW_REACHED
            break
        if stage.order >= order_limit:
            termination = Termination.ORDER_LIMIT
            break
        stage = next_stage(stage)
        stages.append(stage)
    return GammaSchedule(params=p, stages=tuple(stages), termination=termination)
