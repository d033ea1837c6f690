"""Protocol parametrizations in integer ticks.

All model arithmetic runs on integer ticks so that offset drifts, the
half-gamma comparisons of the recursion and coupling detection are exact.
Conversion from seconds happens once, at the interface layer.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

DEFAULT_TICK = 1e-6
TICK_ENV_VAR = "ND_TICK"
_ALIGN_TOLERANCE = 1e-9


class InvalidParameters(ValueError):
    """Raised for parametrizations that violate the protocol invariants.

    ``field`` names the offending parameter when a single one is to blame.
    """

    def __init__(self, message: str, field: str = None):
        super().__init__(message)
        self.field = field


class TickAlignmentError(InvalidParameters):
    """A time value is not an integer multiple of the tick."""

    def __init__(self, name: str, value: float, tick: float):
        self.name = name
        self.value = value
        self.tick = tick
        super().__init__(f"{name}={value!r} is not a multiple of the tick ({tick!r} s)", name)


def default_tick() -> float:
    raw = os.environ.get(TICK_ENV_VAR)
    if raw is None:
        return DEFAULT_TICK
    tick = float(raw)
    if not tick > 0:
        raise ValueError(f"{TICK_ENV_VAR} must be positive, got {raw!r}")
    return tick


def to_ticks(seconds: float, tick: float = DEFAULT_TICK, name: str = "value") -> int:
    """Convert seconds to an integer tick count, rejecting misaligned values."""
    if tick <= 0:
        raise ValueError("tick must be positive")
    ratio = seconds / tick
    rounded = round(ratio)
    if abs(ratio - rounded) > _ALIGN_TOLERANCE * max(1.0, abs(ratio)):
        raise TickAlignmentError(name, seconds, tick)
    return int(rounded)


def to_seconds(ticks, tick: float = DEFAULT_TICK) -> float:
    """Ticks (int, Fraction or inf) to float seconds."""
    if ticks == float("inf"):
        return float("inf")
    return float(Fraction(ticks) * Fraction(tick))


@dataclass(frozen=True)
class ProtocolParams:
    """One advertiser/scanner pair.

    Ta is the advertising interval, Ts the scan interval, ds the scan window
    and da the packet duration, all in ticks.
    """

    Ta: int
    Ts: int
    ds: int
    da: int = 0

    def __post_init__(self):
        for name in ("Ta", "Ts", "ds", "da"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidParameters(f"{name} must be an integer tick count, got {value!r}", name)
        if self.Ta < 1:
            raise InvalidParameters("Ta must be at least one tick", "Ta")
        if self.Ts < 1:
            raise InvalidParameters("Ts must be at least one tick", "Ts")
        if not 1 <= self.ds <= self.Ts:
            raise InvalidParameters(f"scan window ds={self.ds} must lie in [1, Ts={self.Ts}]", "ds")
        if self.da < 0:
            raise InvalidParameters("packet duration da must be non-negative", "da")
        if self.da >= self.ds:
            raise InvalidParameters(
                f"packet duration da={self.da} must be shorter than the scan window ds={self.ds}",
                "da",
            )

    @classmethod
    def from_seconds(cls, Ta: float, Ts: float, ds: float, da: float = 0.0,
                     tick: float = DEFAULT_TICK) -> "ProtocolParams":
        return cls(
            Ta=to_ticks(Ta, tick, "Ta"),
            Ts=to_ticks(Ts, tick, "Ts"),
            ds=to_ticks(ds, tick, "ds"),
            da=to_ticks(da, tick, "da"),
        )

    def effective(self) -> "EffectiveParams":
        return EffectiveParams(Ta=self.Ta, Ts=self.Ts, ds_eff=self.ds - self.da, da=self.da)


@dataclass(frozen=True)
class EffectiveParams:
    """Parametrization with the packet duration folded into the scan window.

    A packet is received iff its start lies in the first ``ds - da`` ticks of
    a window, so the model works with a zero-length packet and the shortened
    window ``ds_eff``; ``da`` is added back to every latency at the end.
    """

    Ta: int
    Ts: int
    ds_eff: int
    da: int = 0

    def __post_init__(self):
        if self.Ta < 1 or self.Ts < 1:
            raise InvalidParameters("Ta and Ts must be at least one tick")
        if not 1 <= self.ds_eff <= self.Ts:
            raise InvalidParameters(f"effective scan window {self.ds_eff} must lie in [1, Ts]")

    @property
    def ds(self) -> int:
        return self.ds_eff + self.da


def as_effective(params) -> EffectiveParams:
    if isinstance(params, EffectiveParams):
        return params
    return params.effective()
