from __future__ import annotations

from dataclasses import replace

import pytest

from helpers import rng

import protime  # noqa: F401
from protime.computable import (
    certify_future,
    ct_concat,
    ct_frame,
    ct_frame_nameless,
    ct_instant_steps_at,
    ct_interleave,
    ct_partition_after,
    ct_partition_before,
    ct_prepend_steps,
    ct_refl,
    ct_step,
    ct_comm_recv,
    deinstantiate,
    validate_ct,
)
from protime.devices import close_between, device
from protime.lts import (
    Channel,
    ComposeError,
    FMSet,
    HOLE,
    NamelessConfiguration,
    Side,
    act,
    enabled_steps,
    fresh_channels,
    instantiate,
    proc,
    PAYLOAD_CLOSE,
)
from protime.proclang import TLet, TRecvClose, TSendClose, nobj, sv
from protime.sessiontypes import TRUE, TemporalAnnot, atom, one, tlit, tvar
from protime.timebase import INFINITY, fin


def _nc(*rest, root=None) -> NamelessConfiguration:
    root = root or nobj(TSendClose(TemporalAnnot("t", TRUE)))
    return NamelessConfiguration(FMSet(rest), root)


def _probes(w, n=3):
    return fresh_channels(w.names(), n, "z")


def test_ct_refl_validates():
    w = ct_refl(_nc(), 0, INFINITY)
    assert validate_ct(w, _probes(w))
    assert w.start == w.end
    assert w.step_to == 0


def test_validate_rejects_corrupted_end():
    w = ct_refl(_nc(), 0, INFINITY)
    other = _nc(proc(Channel("x"), close_between(0, 3)))
    broken = replace(w, end=other)
    assert not validate_ct(broken, _probes(broken))


def test_validate_needs_probes_and_freshness():
    w = ct_refl(_nc(), 0, INFINITY)
    with pytest.raises(ValueError):
        validate_ct(w, [])
    with pytest.raises(ValueError):
        validate_ct(w, [HOLE])


def test_ct_step_spawn():
    # a cut spawn as the uniform instant step
    inner = TSendClose(TemporalAnnot("t", atom(tvar("t"), "==", tlit(2))))
    cont = TRecvClose(sv("x"), tlit(2), TSendClose(TemporalAnnot("t", atom(tvar("t"), "==", tlit(4)))))
    let_term = TLet("x", one("t", TRUE), None, inner, cont, tlit(0))
    # build via the step enumerator so the certificate is genuine
    src = _nc(root=nobj(let_term))
    cfg = instantiate(src, HOLE)
    silent = [s for s in enabled_steps(cfg, 0) if s[0].is_silent]
    assert silent
    _, target, cert = silent[0]
    tgt_nc = deinstantiate(target, HOLE)
    w = ct_step(src, tgt_nc, cert, INFINITY)
    assert validate_ct(w, _probes(w))
    assert w.start == src and w.end == tgt_nc


def test_ct_comm_recv_close_exchange():
    d = Channel("d")
    dev_cfg = FMSet.of(proc(d, close_between(1, 4)))
    send = [c for a, t, c in enabled_steps(dev_cfg, 2)
            if a == act(d, Side.SEND, PAYLOAD_CLOSE)][0]
    cont = nobj(TSendClose(TemporalAnnot("t", atom(tvar("t"), "==", tlit(6)))))
    client = nobj(TRecvClose(sv("x"), tlit(2), TSendClose(
        TemporalAnnot("t", atom(tvar("t"), "==", tlit(6))))))
    from protime.proclang import apply_subst
    client = nobj(apply_subst({"x": d}, client.term))
    recv_t = [c for a, t, c in enabled_steps(FMSet.of(proc(HOLE, client)), 2)
              if a == act(d, Side.RECV, PAYLOAD_CLOSE)][0]
    w = ct_comm_recv(_nc(root=client), _nc(root=cont), recv_t, send, INFINITY)
    assert validate_ct(w, _probes(w))
    assert w.start.rest == dev_cfg
    assert w.end.rest.is_empty()


def test_ct_concat_and_mismatch():
    nc = _nc()
    w1 = ct_refl(nc, 0, 4)
    w2 = ct_refl(nc, 4, INFINITY)
    w = ct_concat(w1, w2)
    assert validate_ct(w, _probes(w))
    with pytest.raises(ComposeError):
        ct_concat(w1, ct_refl(_nc(proc(Channel("k"), close_between(0, 1))), 4, INFINITY))
    with pytest.raises(ComposeError):
        ct_concat(w2, w1)


def test_ct_frame_both_kinds():
    w = ct_refl(_nc(), 1, INFINITY)
    frame = FMSet.of(proc(Channel("f"), close_between(2, 3)))
    fr = ct_frame(w, frame)
    assert validate_ct(fr, _probes(fr))
    assert fr.start.rest == frame
    named_at = Channel("g")
    fn = ct_frame_nameless(w, _nc(root=nobj(TSendClose(TemporalAnnot("u", TRUE)))), named_at)
    assert validate_ct(fn, _probes(fn))
    assert proc(named_at, w.start.root) in fn.start.rest


def test_ct_interleave_pointwise_law():
    g = rng(1)
    a = Channel("left")
    w1 = certify_future(_nc(root=device(("tick", 1, 1), ("tick", 3, 3), ("close", 5, 20))), 0, 10)
    w2 = certify_future(_nc(root=device(("tick", 2, 2), ("close", 5, 20))), 0, 10)
    w = ct_interleave(w1, w2, a)
    assert validate_ct(w, _probes(w))
    for t in range(0, 8):
        assert instantiate(w.sample(t), Channel("zz")) == \
            instantiate(w1.sample(t), a).union(instantiate(w2.sample(t), Channel("zz")))
    assert w.hi == w1.hi
    with pytest.raises(ComposeError):
        ct_interleave(ct_refl(_nc(), 0, 5), ct_refl(_nc(), 0, 6), a)


def test_partition_facts():
    w = certify_future(_nc(root=device(("tick", 2, 2), ("tick", 5, 5), ("close", 8, 20))), 0, 12)
    before = ct_partition_before(w, 4)
    after = ct_partition_after(w, 4)
    assert validate_ct(before, _probes(before))
    assert validate_ct(after, _probes(after))
    assert before.end == w.sample(4)          # end of the kept piece is the sample
    assert after.start == w.sample(4)
    assert before.hi == fin(5) and after.lo == fin(4)
    for t in range(0, 5):
        assert before.sample(t) == w.sample(t)
    # identity at an unbounded cut
    assert ct_partition_before(w, INFINITY) is w
    # cutting exactly at a step instant keeps the post-step value
    b2 = ct_partition_before(w, 2)
    assert b2.end == w.sample(2)
    at = ct_instant_steps_at(w, 2)
    assert len(at) == 1 and at[0].time == 2


def test_partition_before_on_refl():
    w = ct_refl(_nc(), 0, INFINITY)
    before = ct_partition_before(w, 0)
    assert before.hi == fin(1)
    assert validate_ct(before, _probes(before))
    assert before.end == w.start


def test_prepend_steps():
    src = _nc(root=nobj(TLet(
        "x", one("t", TRUE), None,
        TSendClose(TemporalAnnot("t", atom(tvar("t"), "==", tlit(1)))),
        TRecvClose(sv("x"), tlit(1), TSendClose(TemporalAnnot("t", atom(tvar("t"), "==", tlit(3))))),
        tlit(0))))
    cfg = instantiate(src, HOLE)
    _, target, cert = [s for s in enabled_steps(cfg, 0) if s[0].is_silent][0]
    base = certify_future(deinstantiate(target, HOLE), 0, 10)
    w = ct_prepend_steps(base, [cert], src)
    assert validate_ct(w, _probes(w))
    assert w.start == src
    assert w.ntraj == base.ntraj
    with pytest.raises(ComposeError):
        ct_prepend_steps(base, [cert], base.start)  # does not thread


def test_uniformity_pairwise_probes():
    g = rng(2)
    w = certify_future(_nc(root=device(("tick", 1, 3), ("close", 5, 20))), 0, 9)
    probes = fresh_channels(w.names(), 4, "u")
    verdicts = [validate_ct(w, [p]) for p in probes]
    assert all(verdicts)


def test_certify_future_runs_lets():
    term = TLet(
        "x", one("t", TRUE), None,
        TSendClose(TemporalAnnot("t", atom(tvar("t"), "==", tlit(2)))),
        TRecvClose(sv("x"), tlit(2), TSendClose(TemporalAnnot("t", atom(tvar("t"), "==", tlit(5))))),
        tlit(0))
    w = certify_future(_nc(root=nobj(term)), 0, 10)
    assert validate_ct(w, _probes(w))
    assert len(instantiate(w.sample(0), Channel("z"))) == 2   # spawned
    assert len(instantiate(w.sample(2), Channel("z"))) == 1   # exchanged
    assert w.step_to == 2
