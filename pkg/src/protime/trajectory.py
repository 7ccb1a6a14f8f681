"""Piecewise-constant trajectories over half-open time intervals.

A trajectory maps every time in [lo, hi) to a value (a configuration, or
a nameless configuration for the nameless variant).  Steps happen at
finitely many instants, so the piecewise-constant representation is
exact; graph equality is equality of the canonical segment list together
with the interval, which is the only trajectory equality used anywhere.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, TypeVar

from .lts import NamelessConfiguration, instantiate, rename_cfg, rename_ncfg, Channel
from .timebase import FinTime, Time, fin, le, lt

V = TypeVar("V")


@dataclass(frozen=True)
class Trajectory:
    """Segments are (start time, value); starts are strictly increasing,
    the first equals ``lo``, all lie below ``hi``, and adjacent values
    differ (canonical form)."""

    lo: Time
    hi: Time
    segments: tuple[tuple[FinTime, object], ...]

    def __post_init__(self) -> None:
        if not lt(self.lo, self.hi):
            raise ValueError(f"empty trajectory interval [{self.lo!r}, {self.hi!r})")
        if self.lo.is_infinite:
            raise ValueError("trajectory cannot start at infinity")
        if not self.segments:
            raise ValueError("trajectory needs at least one segment")
        if self.segments[0][0] != self.lo.finite():
            raise ValueError("first segment must start at lo")
        starts = [s for s, _ in self.segments]
        if any(a >= b for a, b in zip(starts, starts[1:])):
            raise ValueError("segment starts must strictly increase")
        if any(not lt(fin(s), self.hi) for s in starts):
            raise ValueError("segment starts must lie below hi")
        if any(v1 == v2 for (_, v1), (_, v2) in zip(self.segments, self.segments[1:])):
            raise ValueError("adjacent segments must differ (canonical form)")

    def sample(self, t: Time | FinTime) -> object:
        tt = fin(t) if isinstance(t, int) else t
        if not (le(self.lo, tt) and lt(tt, self.hi)):
            raise ValueError(f"sample time {tt!r} outside [{self.lo!r}, {self.hi!r})")
        idx = bisect_right([s for s, _ in self.segments], tt.finite()) - 1
        return self.segments[idx][1]

    @property
    def final_value(self) -> object:
        return self.segments[-1][1]

    @property
    def boundaries(self) -> list[FinTime]:
        return [s for s, _ in self.segments]


def _canon(segments: list[tuple[FinTime, object]]) -> tuple[tuple[FinTime, object], ...]:
    out: list[tuple[FinTime, object]] = []
    for s, v in segments:
        if out and out[-1][1] == v:
            continue
        out.append((s, v))
    return tuple(out)


def make_traj(lo: Time, hi: Time, segments: list[tuple[FinTime, object]]) -> Trajectory:
    return Trajectory(lo, hi, _canon(segments))


def const_traj(value: object, lo: Time | FinTime, hi: Time | FinTime) -> Trajectory:
    lo_t = fin(lo) if isinstance(lo, int) else lo
    hi_t = fin(hi) if isinstance(hi, int) else hi
    return Trajectory(lo_t, hi_t, ((lo_t.finite(), value),))


def concat_traj(s1: Trajectory, s2: Trajectory) -> Trajectory:
    """Piece two trajectories together; the boundary belongs to ``s2``."""
    if s1.hi != s2.lo:
        raise ValueError(f"concat interval mismatch: {s1.hi!r} vs {s2.lo!r}")
    cut = s2.lo.finite()
    segs = [(s, v) for s, v in s1.segments if s < cut] + list(s2.segments)
    return make_traj(s1.lo, s2.hi, segs)


def extend_traj(value: object, t3: Time | FinTime, s: Trajectory) -> Trajectory:
    """Prefix ``s`` with a constant ``value`` from ``t3``; identity at t3 = lo."""
    t3_t = fin(t3) if isinstance(t3, int) else t3
    if lt(s.lo, t3_t):
        raise ValueError(f"extension point {t3_t!r} after start {s.lo!r}")
    if t3_t == s.lo:
        return s
    return concat_traj(const_traj(value, t3_t, s.lo), s)


def partition_before(s: Trajectory, t2: Time | FinTime) -> Trajectory:
    """Restrict to [lo, t2); ``t2`` may equal hi, giving the whole graph."""
    t2_t = fin(t2) if isinstance(t2, int) else t2
    if t2_t == s.hi:
        return s
    if not (lt(s.lo, t2_t) and lt(t2_t, s.hi)):
        raise ValueError(f"partition point {t2_t!r} outside ({s.lo!r}, {s.hi!r})")
    cut = t2_t.finite()
    return make_traj(s.lo, t2_t, [(b, v) for b, v in s.segments if b < cut])


def partition_after(s: Trajectory, t2: Time | FinTime) -> Trajectory:
    """Restrict to [t2, hi); the boundary sample comes with the after part."""
    t2_t = fin(t2) if isinstance(t2, int) else t2
    if not (le(s.lo, t2_t) and lt(t2_t, s.hi)):
        raise ValueError(f"partition point {t2_t!r} outside [{s.lo!r}, {s.hi!r})")
    cut = t2_t.finite()
    segs = [(cut, s.sample(t2_t))] + [(b, v) for b, v in s.segments if b > cut]
    return make_traj(t2_t, s.hi, segs)


def pointwise(s1: Trajectory, s2: Trajectory, op: Callable[[object, object], object]) -> Trajectory:
    """Combine two same-interval trajectories value by value."""
    if s1.lo != s2.lo or s1.hi != s2.hi:
        raise ValueError(f"interval mismatch: [{s1.lo!r},{s1.hi!r}) vs [{s2.lo!r},{s2.hi!r})")
    cuts = sorted({b for b, _ in s1.segments} | {b for b, _ in s2.segments})
    segs = [(b, op(s1.sample(b), s2.sample(b))) for b in cuts]
    return make_traj(s1.lo, s1.hi, segs)


def interleave_traj(s1: Trajectory, s2: Trajectory) -> Trajectory:
    """Pointwise multiset union of two configuration trajectories."""
    return pointwise(s1, s2, lambda a, b: a.union(b))


def map_traj(s: Trajectory, f: Callable[[object], object]) -> Trajectory:
    return make_traj(s.lo, s.hi, [(b, f(v)) for b, v in s.segments])


# ---------------------------------------------------------------------------
# nameless trajectories: same representation, values are nameless
# configurations; instantiation commutes with the whole algebra.

NamelessTrajectory = Trajectory


def instantiate_traj(s: Trajectory, a: Channel) -> Trajectory:
    """Name every nameless configuration in the trajectory at ``a``."""
    return map_traj(s, lambda nc: instantiate(nc, a))


def interleave_named_nameless(named: Trajectory, nameless: Trajectory) -> Trajectory:
    """Union a configuration trajectory into a nameless one, keeping roots."""
    return pointwise(named, nameless,
                     lambda cfg, nc: NamelessConfiguration(cfg.union(nc.rest), nc.root))


def rename_traj(s: Trajectory, mapping: dict[str, str], nameless: bool) -> Trajectory:
    f = rename_ncfg if nameless else rename_cfg
    return make_traj(s.lo, s.hi, [(b, f(v, mapping)) for b, v in s.segments])
