"""Finite multisets with disjoint union and structure-preserving map.

Elements must be hashable and have a deterministic ``repr``: the canonical
form of a multiset is its (element, multiplicity) pairs sorted by repr,
which makes equality and ordering of multisets decidable and stable.
"""

from __future__ import annotations

from typing import Callable, Generic, Hashable, Iterable, Iterator, TypeVar

X = TypeVar("X", bound=Hashable)
Y = TypeVar("Y", bound=Hashable)


class FMSet(Generic[X]):
    """Immutable finite multiset over hashable elements."""

    __slots__ = ("_counts", "_key", "_hash")

    def __init__(self, items: Iterable[X] = ()) -> None:
        counts: dict[X, int] = {}
        for item in items:
            counts[item] = counts.get(item, 0) + 1
        self._counts = counts
        self._key = tuple(sorted(((repr(e), e, n) for e, n in counts.items()),
                                 key=lambda t: t[0]))
        self._hash = hash(tuple((r, n) for r, _, n in self._key))

    @staticmethod
    def of(*items: X) -> "FMSet[X]":
        return FMSet(items)

    @staticmethod
    def from_counts(counts: dict[X, int]) -> "FMSet[X]":
        out: FMSet[X] = FMSet()
        cleaned = {e: n for e, n in counts.items() if n > 0}
        if any(n < 0 for n in counts.values()):
            raise ValueError("negative multiplicity")
        out._counts = cleaned
        out._key = tuple(sorted(((repr(e), e, n) for e, n in cleaned.items()),
                                key=lambda t: t[0]))
        out._hash = hash(tuple((r, n) for r, _, n in out._key))
        return out

    def union(self, other: "FMSet[X]") -> "FMSet[X]":
        counts = dict(self._counts)
        for e, n in other._counts.items():
            counts[e] = counts.get(e, 0) + n
        return FMSet.from_counts(counts)

    def map(self, f: Callable[[X], Y]) -> "FMSet[Y]":
        out: list[Y] = []
        for e, n in self._counts.items():
            fe = f(e)
            out.extend([fe] * n)
        return FMSet(out)

    def count(self, item: X) -> int:
        return self._counts.get(item, 0)

    def remove_one(self, item: X) -> "FMSet[X]":
        if self._counts.get(item, 0) == 0:
            raise KeyError(f"not in multiset: {item!r}")
        counts = dict(self._counts)
        counts[item] -= 1
        return FMSet.from_counts(counts)

    def difference(self, other: "FMSet[X]") -> "FMSet[X]":
        """Remove ``other``; it must be a sub-multiset."""
        counts = dict(self._counts)
        for e, n in other._counts.items():
            if counts.get(e, 0) < n:
                raise KeyError(f"not a sub-multiset at {e!r}")
            counts[e] -= n
        return FMSet.from_counts(counts)

    def is_submultiset(self, other: "FMSet[X]") -> bool:
        return all(other._counts.get(e, 0) >= n for e, n in self._counts.items())

    def items(self) -> Iterator[tuple[X, int]]:
        """(element, multiplicity) pairs in canonical order."""
        for _, e, n in self._key:
            yield e, n

    def __iter__(self) -> Iterator[X]:
        """Elements with multiplicity, in canonical order."""
        for _, e, n in self._key:
            for _ in range(n):
                yield e

    def __len__(self) -> int:
        return sum(self._counts.values())

    def __contains__(self, item: object) -> bool:
        return item in self._counts

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FMSet):
            return NotImplemented
        return self._counts == other._counts

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(r if n == 1 else f"{r} x{n}" for r, _, n in self._key)
        return "{" + inner + "}"

    def is_empty(self) -> bool:
        return not self._counts


def empty() -> FMSet:
    return FMSet()


def singleton(item: X) -> FMSet[X]:
    return FMSet([item])


def union(a: FMSet[X], b: FMSet[X]) -> FMSet[X]:
    return a.union(b)


def fmap(f: Callable[[X], Y], m: FMSet[X]) -> FMSet[Y]:
    return m.map(f)


def equal(a: FMSet[X], b: FMSet[X]) -> bool:
    return a == b
