from __future__ import annotations

import pytest

from helpers import rng

from protime.computable import ct_partition_after, ct_refl, validate_ct
from protime.devices import close_between
from protime.harness import ftlr_check, ground_termdef
from protime.lts import Channel, FMSet, NamelessConfiguration, fresh_channels, instantiate
from protime.proclang import nobj, typecheck, apply_subst
from protime.semantics import (
    CheckBudget,
    NOSTAR,
    STAR,
    apply_compl,
    canonical_provider,
    closure_tests,
    ct_interleave_compl,
    ftlr_witness,
    generate_compl,
    input_families,
    is_complementary,
    semantic_retype_test,
    split_compl,
    subst_of,
    term_member,
    value_member,
)
from protime.sessiontypes import HypSet, retype_cut, retype_fwd, tlit
from protime.syntax import TermDef, parse_term, parse_type
from protime.timebase import INFINITY

B = CheckBudget(horizon=12)


def _nc(term_text: str) -> NamelessConfiguration:
    return NamelessConfiguration(FMSet(), nobj(parse_term(term_text)))


def _termdef(src_uses, at, type_text, term_text, gvars=(), assume=()):
    return TermDef("it", tuple(gvars), tuple(assume),
                   tuple((x, parse_type(s)) for x, s in src_uses),
                   at, parse_type(type_text), parse_term(term_text))


# --- value interpretation ----------------------------------------------------


def test_value_one_pass_and_fail():
    nc = _nc("send{t | t == 3}()")
    a = parse_type("1{t | t == 3}")
    assert value_member(nc, a, 3, NOSTAR, B).is_pass
    assert value_member(nc, a, 2, NOSTAR, B).is_fail


def test_value_with_requires_both_branches():
    a = parse_type("1{u | u == 3} &{t | t == 1} 1{u | u == 4}")
    good = _nc("case{t | t == 1}(pi1 => send{u | u == 3}() | pi2 => send{u | u == 4}())")
    assert value_member(good, a, 1, NOSTAR, B).is_pass
    # an offer of only one branch: a plus-style term against a with-type
    partial = _nc("select{t | t == 1}(pi1); send{u | u == 3}()")
    v = value_member(partial, a, 1, NOSTAR, B)
    assert v.is_fail


def test_value_plus_needs_some_branch():
    a = parse_type("1{u | u == 3} +{t | t == 1} 1{u | u == 4}")
    good = _nc("select{t | t == 2}(pi2); send{u | u == 4}()")
    # readiness is checked at the type's instant, t == 1
    assert value_member(good, a, 1, NOSTAR, B).is_fail
    good2 = _nc("select{t | t == 1}(pi2); send{u | u == 4}()")
    assert value_member(good2, a, 1, NOSTAR, B).is_pass


def test_value_tensor_splits_and_checks_components():
    a = parse_type("1{u | u == 3} *{t | t == 1} 1{v | v == 5}")
    good = _nc("send{t | t == 1}((send{u | u == 3}())); send{v | v == 5}()")
    assert value_member(good, a, 1, NOSTAR, B).is_pass
    late = _nc("send{t | t == 1}((send{u | u == 9}())); send{v | v == 5}()")
    assert value_member(late, a, 1, NOSTAR, B).is_fail


def test_value_lolli_uses_synthesized_inputs():
    a = parse_type("1{u | u == 3} -o{t | t == 2} 1{v | v == 6}")
    good = _nc("recv{t | t == 2}(y => recv{3} y(); send{v | v == 6}())")
    assert value_member(good, a, 2, NOSTAR, B).is_pass
    deaf = _nc("send{t | t == 2}((send{u | true}())); send{v | v == 6}()")
    assert value_member(deaf, a, 2, NOSTAR, B).is_fail


# --- term interpretation -------------------------------------------------------


def test_term_single_instant():
    w = ct_refl(_nc("send{t | t == 3}()"), 0, INFINITY)
    a = parse_type("1{t | t == 3}")
    assert term_member(w, a, 0, NOSTAR, B).is_pass


def test_term_vacuous_on_unsatisfiable_predicate():
    w = ct_refl(_nc("send{t | t == 3}()"), 0, INFINITY)
    a = parse_type("1{t | t == 3 && t == 4}")
    assert term_member(w, a, 0, NOSTAR, B).is_pass


def test_term_inconclusive_beyond_horizon():
    w = ct_refl(_nc("send{t | 100 <= t}()"), 0, INFINITY)
    a = parse_type("1{t | 100 <= t}")
    v = term_member(w, a, 0, NOSTAR, CheckBudget(horizon=10))
    assert v.status == "inconclusive"
    assert any("T'=100" in x for x in v.trail)


def test_term_nostar_rejects_early_instants():
    w = ct_refl(_nc("send{t | t <= 5}()"), 3, INFINITY)
    a = parse_type("1{t | t <= 5}")
    assert term_member(w, a, 3, NOSTAR, B).is_fail   # instants 0..2 precede start
    assert term_member(w, a, 3, STAR, B).is_pass     # client mode guards them away


# --- closure and retyping -------------------------------------------------------


def test_closure_on_constant_prefix():
    nc = _nc("send{t | t == 6}()")
    w2 = ct_refl(nc, 4, INFINITY)
    w1 = ct_refl(nc, 0, 4)
    a = parse_type("1{t | t == 6}")
    assert closure_tests(w1, w2, a, 0, 4, B).is_pass


def test_closure_inconclusive_propagates():
    nc = _nc("send{t | 100 <= t}()")
    v = closure_tests(ct_refl(nc, 0, 4), ct_refl(nc, 4, INFINITY),
                      parse_type("1{t | 100 <= t}"), 0, 4, CheckBudget(horizon=9))
    assert v.status == "inconclusive"


def test_semantic_retyping_cut_instance():
    h = HypSet()
    a = parse_type("1{t | t <= 10}")
    b = parse_type("1{t | t == 4}")
    assert retype_cut(h, a, b, tlit(0))
    w = ct_refl(_nc("send{t | t <= 10}()"), 0, INFINITY)
    assert semantic_retype_test(a, b, 0, w, B, style="cut").is_pass


def test_semantic_retyping_fwd_instance():
    h = HypSet()
    a = parse_type("1{t | t <= 10}")
    b = parse_type("1{t | 3 <= t && t <= 8}")
    assert retype_fwd(h, a, b, tlit(0))
    w = ct_refl(_nc("send{t | t <= 10}()"), 0, INFINITY)
    assert semantic_retype_test(a, b, 0, w, B, style="fwd").is_pass


def test_semantic_retyping_vacuous_when_lhs_fails():
    a = parse_type("1{t | t <= 10}")
    b = parse_type("1{t | t == 4}")
    w = ct_refl(_nc("send{t | t == 9}()"), 0, INFINITY)  # not a full provider of a
    assert semantic_retype_test(a, b, 0, w, B, style="cut").is_pass


# --- complementary configurations ------------------------------------------------


def _delta(r, keys):
    out = {}
    for i, k in enumerate(sorted(keys)):
        w = ct_refl(_nc(f"send{{t | t == {i + 2}}}()"), 0, INFINITY)
        out[k] = (Channel(f"d{i}"), w)
    return out


def test_apply_compl_examples():
    root = nobj(parse_term("send{t | true}()"))
    assert apply_compl({}, root) == NamelessConfiguration(FMSet(), root)
    d = _delta(None, ["x"])
    got = apply_compl(d, root)
    assert got.root == root
    assert got.rest == instantiate(d["x"][1].start, d["x"][0])


def test_apply_compl_union_split():
    root = nobj(parse_term("send{t | true}()"))
    d = _delta(None, ["x", "y", "z"])
    d1 = {k: d[k] for k in ["x", "z"]}
    d2 = {k: d[k] for k in ["y"]}
    whole = apply_compl(d, root).rest
    assert whole == apply_compl(d1, root).rest.union(apply_compl(d2, root).rest)


def test_subst_of_commutes():
    d = _delta(None, ["x", "y"])
    s = subst_of(d)
    assert set(s) == {"x", "y"}
    d2 = dict(d)
    extra = (Channel("q"), ct_refl(_nc("send{t | true}()"), 0, INFINITY))
    d2["z"] = extra
    assert subst_of(d2) == {**s, "z": Channel("q")}
    del d2["x"]
    assert subst_of(d2) == {k: v for k, v in {**s, "z": Channel("q")}.items() if k != "x"}


def test_split_compl():
    d = _delta(None, ["x", "y", "z"])
    d1, d2 = split_compl(d, {"x": None}, {"y": None, "z": None})
    assert set(d1) == {"x"} and set(d2) == {"y", "z"}
    with pytest.raises(ValueError):
        split_compl(d, {"x": None}, {"x": None, "y": None, "z": None})
    with pytest.raises(ValueError):
        split_compl(d, {"x": None}, {"y": None})


def test_ct_interleave_compl_start_equation():
    root = nobj(parse_term("send{t | true}()"))
    base = ct_refl(NamelessConfiguration(FMSet(), root), 0, INFINITY)
    d = _delta(None, ["x", "y"])
    w = ct_interleave_compl(base, d)
    assert w.start == apply_compl(d, root)
    assert ct_interleave_compl(base, {}) is base
    probes = fresh_channels(w.names() | {"d0", "d1"}, 3, "z")
    assert validate_ct(w, probes)


def test_is_complementary():
    ctx = {"x": parse_type("1{t | t == 2}")}
    d = _delta(None, ["x"])
    assert is_complementary(d, ctx, 0, B).is_pass
    bad_ctx = {"x": parse_type("1{t | t == 9}")}
    assert is_complementary(d, bad_ctx, 0, B).is_fail


# --- canonical inhabitants -------------------------------------------------------


def test_canonical_provider_typechecks():
    for text in [
        "1{t | t == 3}",
        "1{t | 2 <= t && t <= 5}",
        "1{u | u == 3} *{t | t == 1} 1{v | v == 5}",
        "1{u | u == 3} -o{t | t == 2} 1{v | v == 6}",
        "1{u | u == 3} &{t | t == 1} 1{u | u == 4}",
        "1{u | u == 3} +{t | t == 1} 1{u | u == 4}",
    ]:
        a = parse_type(text)
        term = canonical_provider(a, HypSet(), tlit(0))
        assert term is not None, text
        d = typecheck(HypSet(), {}, term, tlit(0), a)
        assert d is not None


def test_canonical_provider_refuses_uninhabitable():
    # readiness at every instant is impossible from a positive start time
    a = parse_type("1{t | true}")
    assert canonical_provider(a, HypSet(), tlit(2)) is None


def test_input_families_are_members():
    a = parse_type("1{t | 2 <= t && t <= 5}")
    fams = input_families(a, 0, STAR, B)
    assert fams
    for w in fams:
        assert term_member(w, a, 0, STAR, B).is_pass


# --- witness construction ----------------------------------------------------------


def test_ftlr_close_witness_shape():
    td = _termdef([], tlit(0), "1{t | t == 3}", "send{t | t == 3}()")
    rep = ftlr_check("close", td, B)
    assert rep.verdict.is_pass
    assert rep.witness.start == NamelessConfiguration(FMSet(), nobj(td.term))
    assert len(rep.witness.ntraj.segments) == 1


def test_ftlr_one_left_exchange():
    td = _termdef([("x", "1{t | t == 2}")], tlit(0), "1{t | t == 4}",
                  "recv{2} x(); send{t | t == 4}()")
    rep = ftlr_check("seq", td, B)
    assert rep.verdict.is_pass
    # the exchange leaves exactly the continuation at instant 2
    assert len(instantiate(rep.witness.sample(2), Channel("zz"))) == 1
    assert len(instantiate(rep.witness.sample(0), Channel("zz"))) == 2


def test_ftlr_fwd_uses_collapse():
    td = _termdef([("x", "1{t | t <= 10}")], tlit(0), "1{t | 3 <= t && t <= 8}",
                  "fwd{0}(x)")
    rep = ftlr_check("fwd", td, B)
    assert rep.verdict.is_pass
    sigma = rep.witness.steps(Channel("zz"))
    kinds = set()
    node = sigma
    while node.kind != "refl":
        if node.kind == "stepC":
            stack = [node.step]
            while stack:
                sc = stack.pop()
                kinds.add(sc.kind)
                stack.extend([c for c in (sc.inner, sc.send_part, sc.recv_part) if c])
        node = node.tail
    assert "fwd" in kinds


def test_ftlr_start_equation_with_delta():
    td = _termdef([("x", "1{t | t == 2}")], tlit(0), "1{t | t == 4}",
                  "recv{2} x(); send{t | t == 4}()")
    gj = ground_termdef(td)
    deriv = typecheck(HypSet(), gj.ctx, gj.term, tlit(0), gj.stype)
    delta = generate_compl(gj.ctx, 0, B)
    w = ftlr_witness(deriv, delta, B)
    assert w.start == apply_compl(delta, nobj(apply_subst(subst_of(delta), gj.term)))


def test_ftlr_hetero_device_delta():
    td = _termdef([("x", "1{t | 3 <= t && t <= 5}")], tlit(0), "1{t | t == 6}",
                  "recv{4} x(); send{t | t == 6}()")
    gj = ground_termdef(td)
    deriv = typecheck(HypSet(), gj.ctx, gj.term, tlit(0), gj.stype)
    wdev = ct_refl(NamelessConfiguration(FMSet(), close_between(3, 5)), 0, INFINITY)
    delta = {"x": (Channel("dev"), wdev)}
    assert is_complementary(delta, gj.ctx, 0, B).is_pass
    w = ftlr_witness(deriv, delta, B)
    assert term_member(w, gj.stype, 0, NOSTAR, B).is_pass


def test_mode_inversion_is_an_involution():
    assert STAR.invert() == NOSTAR
    assert NOSTAR.invert() == STAR
    assert STAR.invert().invert() == STAR


def test_compl_commutation_randomized():
    r = rng(41)
    root = nobj(parse_term("send{t | true}()"))
    for i in range(500):
        keys = r.sample(["x", "y", "z", "w", "v"], r.randint(0, 4))
        delta = {}
        for j, k in enumerate(sorted(keys)):
            w = ct_refl(_nc(f"send{{t | t == {j + 1}}}()"), 0, INFINITY)
            delta[k] = (Channel(f"d{j}"), w)
        # projection commutes with insertion, union and deletion
        s = subst_of(delta)
        extra_key = "extra"
        wx = ct_refl(_nc("send{t | true}()"), 0, INFINITY)
        with_insert = dict(delta)
        with_insert[extra_key] = (Channel("q9"), wx)
        assert subst_of(with_insert) == {**s, extra_key: Channel("q9")}
        if keys:
            drop = sorted(keys)[0]
            assert subst_of({k: v for k, v in delta.items() if k != drop}) == \
                {k: v for k, v in s.items() if k != drop}
        # application splits across unions of the map
        if len(keys) >= 2:
            left_keys = sorted(keys)[: len(keys) // 2]
            d1 = {k: delta[k] for k in left_keys}
            d2 = {k: delta[k] for k in delta if k not in d1}
            assert apply_compl(delta, root).rest == \
                apply_compl(d1, root).rest.union(apply_compl(d2, root).rest)


def test_subject_reduction_smoke_over_corpus():
    # every silent prefix of the canonical execution keeps the program
    # checkable: no non-terminal state goes dead before its deadlines
    from protime.corpus import all_specs
    from protime.lts import proc
    from protime.runner import run_silent, ready_actions

    for name, spec in sorted(all_specs().items()):
        for td in spec.terms.values():
            gj = ground_termdef(td)
            if gj is None or gj.ctx:
                continue
            cfg = FMSet.of(proc(Channel("a"), nobj(gj.term)))
            run = run_silent(cfg, gj.at, 30)
            if run.final_cfg.is_empty():
                continue
            offers = any(ready_actions(run.final_cfg, t)
                         for t in range(run.final_time, 31))
            assert offers, (name, run.final_cfg)


def test_forwards_closure_on_star_members():
    a = parse_type("1{t | 2 <= t && t <= 8}")
    w = ct_refl(_nc("send{t | 2 <= t && t <= 8}()"), 0, INFINITY)
    assert term_member(w, a, 0, STAR, B).is_pass
    for cut in (1, 3, 5):
        assert term_member(ct_partition_after(w, cut), a, cut, STAR, B).is_pass
