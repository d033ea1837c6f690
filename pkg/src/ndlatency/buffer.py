"""Piecewise-constant probability densities over disjoint tick intervals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List


@dataclass(frozen=True)
class Segment:
    """Density ``p`` on ``[t_s, t_e]``; ``zeta`` is the largest penalty carried in."""

    t_s: int
    t_e: int
    p: Fraction
    zeta: int = 0

    def __post_init__(self):
        if not self.t_s < self.t_e:
            raise ValueError(f"empty segment [{self.t_s}, {self.t_e}]")
        if not self.p > 0:
            raise ValueError("segment density must be positive")
        if self.zeta < 0:
            raise ValueError("zeta must be non-negative")

    @property
    def length(self) -> int:
        return self.t_e - self.t_s

    @property
    def mass(self):
        return self.p * (self.t_e - self.t_s)


class ProbabilityBuffer:
    """Sorted, disjoint segments with additive overlap.

    Densities may be any exact rational type (``int`` or ``Fraction``); the
    latency engine uses integer weights in units of ``1/Ts`` for speed.
    Adjacent segments with equal density and equal zeta are coalesced.
    """

    __slots__ = ("_segs",)

    def __init__(self, segments: Iterable[Segment] = ()):
        self._segs: List[Segment] = []
        for seg in segments:
            self.add(seg.t_s, seg.t_e, seg.p, seg.zeta)

    def __len__(self):
        return len(self._segs)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self._segs)

    def __bool__(self):
        return bool(self._segs)

    def __eq__(self, other):
        if not isinstance(other, ProbabilityBuffer):
            return NotImplemented
        return self._segs == other._segs

    def __repr__(self):
        body = ", ".join(f"([{s.t_s},{s.t_e}], {s.p}, zeta={s.zeta})" for s in self._segs)
        return f"ProbabilityBuffer({body})"

    @property
    def segments(self) -> List[Segment]:
        return list(self._segs)

    def copy(self) -> "ProbabilityBuffer":
        new = ProbabilityBuffer()
        new._segs = list(self._segs)
        return new

    def total_mass(self):
        return sum((s.p * (s.t_e - s.t_s) for s in self._segs), 0)

    def add(self, t_ss: int, t_ee: int, p, zeta: int = 0) -> "ProbabilityBuffer":
        """Add density ``p`` on ``[t_ss, t_ee]`` in place; returns ``self``.

        Overlapped parts of existing segments are split, their densities summed
        and their zeta set to the larger of the two.
        """
        if not t_ss < t_ee:
            raise ValueError(f"cannot add empty interval [{t_ss}, {t_ee}]")
        if not p > 0:
            raise ValueError("added density must be positive")
        segs = self._segs
        # locate the first segment ending after t_ss
        lo = 0
        hi = len(segs)
        while lo < hi:
            mid = (lo + hi) // 2
            if segs[mid].t_e <= t_ss:
                lo = mid + 1
            else:
                hi = mid
        start = lo
        end = start
        while end < len(segs) and segs[end].t_s < t_ee:
            end += 1

        pieces: List[Segment] = []
        cursor = t_ss
        for seg in segs[start:end]:
            if seg.t_s < t_ss:
                pieces.append(Segment(seg.t_s, t_ss, seg.p, seg.zeta))
            elif seg.t_s > cursor:
                pieces.append(Segment(cursor, seg.t_s, p, zeta))
            lo_ov = max(seg.t_s, t_ss)
            hi_ov = min(seg.t_e, t_ee)
            pieces.append(Segment(lo_ov, hi_ov, seg.p + p, max(seg.zeta, zeta)))
            if seg.t_e > t_ee:
                pieces.append(Segment(t_ee, seg.t_e, seg.p, seg.zeta))
            cursor = hi_ov
        if cursor < t_ee:
            pieces.append(Segment(cursor, t_ee, p, zeta))

        # coalesce with the untouched neighbours as well
        if start > 0:
            start -= 1
            pieces.insert(0, segs[start])
        if end < len(segs):
            pieces.append(segs[end])
            end += 1
        segs[start:end] = _coalesce(pieces)
        return self

    def dump(self) -> str:
        """One tab-separated ``t_s t_e p_num/p_den zeta`` line per segment."""
        lines = []
        for s in self._segs:
            p = Fraction(s.p)
            lines.append(f"{s.t_s}\t{s.t_e}\t{p.numerator}/{p.denominator}\t{s.zeta}")
        return "\n".join(lines)


def _coalesce(pieces: List[Segment]) -> List[Segment]:
    out: List[Segment] = []
    for seg in pieces:
        if out:
            last = out[-1]
            if last.t_e == seg.t_s and last.p == seg.p and last.zeta == seg.zeta:
                out[-1] = Segment(last.t_s, seg.t_e, last.p, last.zeta)
                continue
        out.append(seg)
    return out


def add(buffer: ProbabilityBuffer, t_ss: int, t_ee: int, p, zeta: int = 0) -> ProbabilityBuffer:
    """Functional form of :meth:`ProbabilityBuffer.add`; the input is left untouched."""
    return buffer.copy().add(t_ss, t_ee, p, zeta)


def total_mass(buffer: ProbabilityBuffer):
    return buffer.total_mass()


def parse_dump(text: str) -> ProbabilityBuffer:
    buf = ProbabilityBuffer()
    for line in text.splitlines():
        if not line.strip():
            continue
        t_s, t_e, p, zeta = line.split("\t")
        buf.add(int(t_s), int(t_e), Fraction(p), int(zeta))
    return buf
