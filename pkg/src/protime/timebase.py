"""Time domain: natural-number ticks extended with an explicit infinity.

Finite times are plain non-negative ints.  ``Time`` wraps either a finite
tick count or the distinguished infinity point, with a decidable strict
total order in which every finite time sits below infinity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering

FinTime = int


@total_ordering
@dataclass(frozen=True)
class Time:
    """A point in extended time: ``ticks`` is None exactly for infinity."""

    ticks: int | None

    def __post_init__(self) -> None:
        if self.ticks is not None and self.ticks < 0:
            raise ValueError(f"negative time: {self.ticks}")

    @property
    def is_infinite(self) -> bool:
        return self.ticks is None

    @property
    def is_finite(self) -> bool:
        return self.ticks is not None

    def finite(self) -> FinTime:
        if self.ticks is None:
            raise ValueError("infinite time has no finite value")
        return self.ticks

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, Time):
            return NotImplemented
        if self.ticks is None:
            # not (inf < t) for any t, including inf itself
            return False
        if other.ticks is None:
            return True
        return self.ticks < other.ticks

    def plus(self, delta: int) -> "Time":
        """Add a natural constant; infinity absorbs."""
        if self.ticks is None:
            return self
        return Time(self.ticks + delta)

    def __repr__(self) -> str:
        return "inf" if self.ticks is None else str(self.ticks)


INFINITY = Time(None)


def fin(value: FinTime) -> Time:
    return Time(value)


def lt(a: Time, b: Time) -> bool:
    return a < b


def le(a: Time, b: Time) -> bool:
    return not (b < a)


def time_min(a: Time, b: Time) -> Time:
    return a if a < b else b


def time_max(a: Time, b: Time) -> Time:
    return b if a < b else a


def parse_time(text: str) -> Time:
    """Parse the textual form: decimal naturals, or ``inf``."""
    text = text.strip()
    if text == "inf":
        return INFINITY
    if not text.isdigit():
        raise ValueError(f"bad time literal: {text!r}")
    return Time(int(text))


def show_time(t: Time) -> str:
    return repr(t)
