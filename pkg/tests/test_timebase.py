from __future__ import annotations

import itertools

import pytest

from protime.timebase import (
    INFINITY,
    Time,
    fin,
    le,
    lt,
    parse_time,
    show_time,
    time_max,
    time_min,
)

DOMAIN = [fin(n) for n in range(21)] + [INFINITY]


def test_finite_below_infinity():
    assert lt(fin(3), INFINITY)
    assert not lt(INFINITY, INFINITY)
    assert not lt(fin(5), fin(5))


def test_trichotomy_exhaustive():
    for a, b in itertools.product(DOMAIN, DOMAIN):
        holds = [lt(a, b), a == b, lt(b, a)]
        assert sum(holds) == 1, (a, b)


def test_transitivity_exhaustive():
    for a, b, c in itertools.product(DOMAIN, DOMAIN, DOMAIN):
        if lt(a, b) and lt(b, c):
            assert lt(a, c)


def test_min_max_laws():
    assert time_min(fin(3), INFINITY) == fin(3)
    assert time_max(fin(2), fin(7)) == fin(7)
    for t in DOMAIN:
        assert time_min(t, t) == t
        assert time_max(t, t) == t
        assert time_max(t, INFINITY) == INFINITY
        assert time_min(t, INFINITY) == t
    for a, b in itertools.product(DOMAIN, DOMAIN):
        assert time_min(a, b) == time_min(b, a)
        assert time_max(a, b) == time_max(b, a)


def test_le_is_not_gt():
    for a, b in itertools.product(DOMAIN, DOMAIN):
        assert le(a, b) == (not lt(b, a))


def test_plus_absorbs_infinity():
    assert INFINITY.plus(5) == INFINITY
    assert fin(4).plus(3) == fin(7)


def test_negative_rejected():
    with pytest.raises(ValueError):
        Time(-1)


def test_textual_form():
    assert parse_time("17") == fin(17)
    assert parse_time("inf") == INFINITY
    assert show_time(fin(17)) == "17"
    assert show_time(INFINITY) == "inf"
    with pytest.raises(ValueError):
        parse_time("-3")
