from __future__ import annotations

import itertools

import numpy as np
import pytest

from protime.sessiontypes import (
    FALSE,
    HypSet,
    Pred,
    TRUE,
    atom,
    entails,
    eval_pred,
    find_model,
    pand,
    pnot,
    por,
    satisfiable_beyond,
    satisfying_times,
    tlit,
    tvar,
)

BOUND = 45


def oracle_entails(gvars: list[str], hyps: list[Pred], goal: Pred,
                   bound: int = BOUND) -> bool:
    """Exhaustive-valuation oracle, vectorized over the whole grid."""
    if not gvars:
        env: dict[str, int] = {}
        return (not all(eval_pred(h, env) for h in hyps)) or eval_pred(goal, env)
    grids = np.meshgrid(*[np.arange(bound + 1)] * len(gvars), indexing="ij")
    env = {v: g for v, g in zip(gvars, grids)}

    def ev(p: Pred):
        if p.kind == "true":
            return np.ones_like(grids[0], dtype=bool)
        if p.kind == "false":
            return np.zeros_like(grids[0], dtype=bool)
        if p.kind == "atom":
            lhs = (env[p.lhs.var] if p.lhs.var else 0) + p.lhs.offset
            rhs = (env[p.rhs.var] if p.rhs.var else 0) + p.rhs.offset
            if p.op == "<=":
                return lhs <= rhs
            if p.op == "<":
                return lhs < rhs
            return lhs == rhs
        if p.kind == "and":
            return ev(p.left) & ev(p.right)
        if p.kind == "or":
            return ev(p.left) | ev(p.right)
        return ~ev(p.left)

    sat = np.ones_like(grids[0], dtype=bool)
    for h in hyps:
        sat &= ev(h)
    return bool(np.all(~sat | ev(goal)))


def test_trivial_goals():
    assert entails(HypSet(), atom(tlit(0), "<=", tlit(5)))
    assert not entails(HypSet(), atom(tlit(5), "<=", tlit(0)))
    assert entails(HypSet(), TRUE)
    assert not entails(HypSet(), FALSE)
    assert entails(HypSet(hyps=(FALSE,)), FALSE)


def test_chained_bounds():
    h = HypSet(("t0", "t1", "t2"),
               (atom(tvar("t0"), "<=", tvar("t1")),
                atom(tvar("t1"), "<=", tvar("t0", 15)),
                atom(tvar("t2"), "==", tvar("t1", 10))))
    goal = atom(tvar("t0"), "<=", tvar("t2"))
    assert entails(h, goal)
    assert oracle_entails(list(h.gvars), list(h.hyps), goal)


def test_countermodel():
    h = HypSet(("t",), (atom(tvar("t"), "<=", tlit(3)),))
    goal = atom(tvar("t"), "<=", tlit(2))
    assert not entails(h, goal)
    assert not oracle_entails(["t"], list(h.hyps), goal)


def test_naturals_matter():
    # over the integers t could be negative, so this only holds on naturals
    assert entails(HypSet(("t",)), atom(tlit(0), "<=", tvar("t")))


def test_strict_and_equality_encodings():
    h = HypSet(("t",), (atom(tvar("t"), "<", tlit(4)),))
    assert entails(h, atom(tvar("t"), "<=", tlit(3)))
    h2 = HypSet(("u", "v"), (atom(tvar("u"), "==", tvar("v")),))
    assert entails(h2, pand(atom(tvar("u"), "<=", tvar("v")),
                            atom(tvar("v"), "<=", tvar("u"))))


def test_connectives_and_negation():
    h = HypSet(("t",), (por(atom(tvar("t"), "==", tlit(2)), atom(tvar("t"), "==", tlit(5))),))
    assert entails(h, pand(atom(tlit(2), "<=", tvar("t")), atom(tvar("t"), "<=", tlit(5))))
    assert not entails(h, atom(tvar("t"), "==", tlit(2)))
    assert entails(h, pnot(atom(tvar("t"), "==", tlit(3))))


def _atom_pool(gvars: list[str]) -> list[Pred]:
    exprs = [tlit(0), tlit(3), tlit(15)] + [tvar(v) for v in gvars] + \
        [tvar(v, c) for v in gvars for c in (3, 15)]
    pool = []
    for lhs, rhs in itertools.product(exprs, exprs):
        if lhs == rhs:
            continue
        if lhs.var is None and rhs.var is None:
            continue
        for op in ("<=", "<", "=="):
            pool.append(atom(lhs, op, rhs))
    return pool


def test_oracle_agreement_grid():
    # a modest slice of the acceptance grid; the full sweep lives in the
    # acceptance suite
    gvars = ["t0", "t1"]
    pool = _atom_pool(gvars)
    hyp_picks = pool[::9]
    goal_picks = pool[::7]
    checked = 0
    for h1, h2 in itertools.product(hyp_picks[:8], hyp_picks[8:16]):
        for goal in goal_picks[:12]:
            h = HypSet(tuple(gvars), (h1, h2))
            assert entails(h, goal) == oracle_entails(gvars, [h1, h2], goal), (h1, h2, goal)
            checked += 1
    assert checked >= 700


def test_model_finder():
    h = HypSet(("t0", "t1"),
               (atom(tvar("t0"), "<=", tvar("t1")),
                atom(tvar("t1"), "<=", tvar("t0", 4)),
                atom(tlit(2), "<=", tvar("t0"))))
    model = find_model(h)
    assert model is not None
    env = dict(model)
    assert all(eval_pred(p, env) for p in h.hyps)
    assert find_model(HypSet(("t",), (atom(tvar("t"), "<", tvar("t")),))) is None


def test_satisfying_times_and_beyond():
    p = pand(atom(tlit(2), "<=", tvar("t")), atom(tvar("t"), "<=", tlit(5)))
    assert satisfying_times(p, "t", 0, 10) == [2, 3, 4, 5]
    assert satisfiable_beyond(p, "t", 10) is None
    assert satisfiable_beyond(p, "t", 3) == 4
    unbounded = atom(tlit(100), "<=", tvar("t"))
    assert satisfiable_beyond(unbounded, "t", 10) == 100
    assert satisfiable_beyond(unbounded, "t", 200) == 201


def test_fragment_violation():
    with pytest.raises(ValueError):
        satisfying_times(atom(tvar("t"), "<=", tvar("u")), "t", 0, 5)
