from __future__ import annotations

import random

import pytest

from protime.multiset import FMSet, empty, equal, fmap, singleton, union


def _random_multiset(r: random.Random) -> FMSet:
    return FMSet(r.choices(["p", "q", "r", "s"], k=r.randint(0, 6)))


def test_unit_law():
    m = singleton("P")
    assert union(m, empty()) == m
    assert union(empty(), m) == m


def test_multiplicity():
    assert union(singleton("P"), singleton("P")) == FMSet(["P", "P"])
    assert FMSet(["P", "P"]).count("P") == 2


def test_commutativity_simple():
    assert union(singleton("P"), singleton("Q")) == union(singleton("Q"), singleton("P"))


def test_monoid_laws_randomized():
    r = random.Random(7)
    for _ in range(1000):
        a, b, c = (_random_multiset(r) for _ in range(3))
        assert union(union(a, b), c) == union(a, union(b, c))
        assert union(a, b) == union(b, a)
        assert union(a, empty()) == a


def test_map_homomorphism_randomized():
    r = random.Random(8)
    f = lambda x: x * 2  # noqa: E731
    for _ in range(1000):
        a, b = _random_multiset(r), _random_multiset(r)
        assert fmap(f, union(a, b)) == union(fmap(f, a), fmap(f, b))
    assert fmap(f, empty()) == empty()


def test_map_identity_and_multiplicity():
    m = FMSet(["x", "x"])
    assert fmap(lambda v: v, m) == m
    assert fmap(lambda v: "y", m) == FMSet(["y", "y"])


def test_equality_is_canonical():
    assert equal(FMSet(["P", "Q"]), FMSet(["Q", "P"]))
    assert not equal(FMSet(["P"]), FMSet(["P", "P"]))
    assert equal(empty(), empty())
    # canonical form is unique: equal multisets have equal item lists
    r = random.Random(9)
    for _ in range(300):
        items = r.choices("abcd", k=r.randint(0, 8))
        shuffled = items[:]
        r.shuffle(shuffled)
        assert list(FMSet(items).items()) == list(FMSet(shuffled).items())


def test_difference_and_submultiset():
    big = FMSet(["p", "p", "q"])
    small = FMSet(["p"])
    assert small.is_submultiset(big)
    assert big.difference(small) == FMSet(["p", "q"])
    with pytest.raises(KeyError):
        small.difference(big)


def test_remove_one():
    m = FMSet(["p", "p"])
    assert m.remove_one("p") == FMSet(["p"])
    with pytest.raises(KeyError):
        FMSet().remove_one("p")
