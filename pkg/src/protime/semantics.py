"""Semantic protocol compliance: the bounded membership checker for the
logical relation, complementary configurations, the witness builder for
well-typed terms, and the adequacy harness.

Membership in the relation is undecidable as stated (it quantifies over
all instants, channels and input trajectories), so the checker is a
three-valued bounded approximation: ``fail`` verdicts carry a definitive
counterexample trail, ``pass`` certifies every obligation within the
budget, and ``inconclusive`` names the first unchecked obligation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .computable import (
    ComputableTrajectory,
    certify_future,
    ct_concat,
    ct_interleave,
    ct_partition_after,
    ct_partition_before,
    ct_prepend_steps,
    ct_refl,
    deinstantiate,
)
from .lts import (
    HOLE,
    Action,
    AtomicProc,
    Channel,
    Configuration,
    NamelessConfiguration,
    NamelessObj,
    PAYLOAD_CLOSE,
    Payload,
    Side,
    StepCert,
    act,
    atom_names,
    enabled_steps,
    fresh_channel,
    fresh_channels,
    instantiate,
    ncfg_names,
    payload_chan,
    proc,
    step_comm,
    step_frame,
    step_fwd,
    step_obj,
)
from .realization import r_partition_after
from .multiset import FMSet
from .proclang import (
    TFwd,
    TLet,
    TRecvChan,
    TRecvChanR,
    TRecvClose,
    TRecvSel,
    TRecvSelR,
    TSendChan,
    TSendChanR,
    TSendClose,
    TSendSel,
    TSendSelR,
    Term,
    TypingDerivation,
    apply_subst,
    nobj,
    term_channels,
    typecheck,
    ProtocolTypeError,
)
from .runner import run_silent, state_at
from .sessiontypes import (
    HypSet,
    SessionType,
    TimeExpr,
    atom,
    entails,
    max_constant,
    satisfiable_beyond,
    satisfying_times,
    subst_pred,
    subst_type,
    tlit,
    tvar,
    type_vars,
)
from .timebase import INFINITY, FinTime, fin

# ---------------------------------------------------------------------------
# modes, budgets, verdicts


@dataclass(frozen=True)
class Mode:
    star: bool

    def invert(self) -> "Mode":
        return Mode(not self.star)

    def __repr__(self) -> str:
        return "star" if self.star else "nostar"


STAR = Mode(True)
NOSTAR = Mode(False)


@dataclass(frozen=True)
class CheckBudget:
    horizon: FinTime = 50
    probe_channels: int = 2
    input_families: int = 2
    depth: int = 12

    def __post_init__(self) -> None:
        if min(self.horizon, self.probe_channels, self.input_families, self.depth) <= 0:
            raise ValueError("budget components must be positive")

    def deeper(self) -> "CheckBudget":
        return replace(self, depth=self.depth - 1)


@dataclass(frozen=True)
class Verdict:
    status: str                     # "pass" | "fail" | "inconclusive"
    trail: tuple[str, ...] = ()

    @property
    def is_pass(self) -> bool:
        return self.status == "pass"

    @property
    def is_fail(self) -> bool:
        return self.status == "fail"

    def under(self, frame: str) -> "Verdict":
        if self.is_pass:
            return self
        return Verdict(self.status, (frame,) + self.trail)


PASS = Verdict("pass")


def fail(reason: str) -> Verdict:
    return Verdict("fail", (reason,))


def inconclusive(reason: str) -> Verdict:
    return Verdict("inconclusive", (reason,))


def _all_of(verdicts: list[Verdict]) -> Verdict:
    for v in verdicts:
        if v.is_fail:
            return v
    for v in verdicts:
        if not v.is_pass:
            return v
    return PASS


def _any_of(verdicts: list[Verdict], none_reason: str) -> Verdict:
    if not verdicts:
        return fail(none_reason)
    for v in verdicts:
        if v.is_pass:
            return PASS
    for v in verdicts:
        if not v.is_fail:
            return v
    return verdicts[0]


# ---------------------------------------------------------------------------
# configuration splitting by name connectivity


def split_by_roots(cfg: Configuration, root1: Channel, root2: Channel
                   ) -> tuple[Configuration, Configuration] | None:
    """Partition a configuration into the components reachable (by shared
    channel names) from each of two root providers."""
    atoms = list(cfg)
    comp: list[int] = list(range(len(atoms)))

    def find(i: int) -> int:
        while comp[i] != i:
            comp[i] = comp[comp[i]]
            i = comp[i]
        return i

    names = [atom_names(a) for a in atoms]
    for i in range(len(atoms)):
        for j in range(i + 1, len(atoms)):
            if names[i] & names[j]:
                comp[find(i)] = find(j)

    side1: list = []
    side2: list = []
    root_of: dict[int, int] = {}
    for i, a in enumerate(atoms):
        if a.provider == root1 and not a.is_fwd:
            root_of[find(i)] = 1
        elif a.provider == root2 and not a.is_fwd:
            root_of[find(i)] = 2
    for i, a in enumerate(atoms):
        side = root_of.get(find(i))
        if side == 1:
            side1.append(a)
        elif side == 2:
            side2.append(a)
        else:
            return None
    return FMSet(side1), FMSet(side2)


# ---------------------------------------------------------------------------
# membership checking


def _probe_channels(avoid: frozenset[str], budget: CheckBudget) -> list[Channel]:
    return fresh_channels(avoid | {HOLE.name}, budget.probe_channels, "p")


def _closed(a: SessionType) -> bool:
    return not type_vars(a)


def value_member(nc: NamelessConfiguration, a: SessionType, t: FinTime,
                 d: Mode, budget: CheckBudget) -> Verdict:
    """Is the configuration ready, at instant ``t``, to engage as the
    type's head connective demands?"""
    if not _closed(a):
        raise ValueError(f"open type in value check: {a!r}")
    if budget.depth <= 1:
        return inconclusive(f"depth budget exhausted at {a!r} @ {t}")
    frame = f"value {a.kind} @ {t} [{d!r}]"
    binder_at = tlit(t)
    probes = _probe_channels(ncfg_names(nc), budget)
    per_probe: list[Verdict] = []

    for ch in probes:
        cfg = instantiate(nc, ch)
        if a.kind == "one":
            per_probe.append(_check_one(cfg, ch, t))
        elif a.kind == "tensor":
            per_probe.append(_check_tensor(cfg, ch, a, binder_at, t, d, budget))
        elif a.kind == "lolli":
            per_probe.append(_check_lolli(nc, cfg, ch, a, binder_at, t, d, budget))
        elif a.kind == "with":
            per_probe.append(_check_branch(cfg, ch, a, binder_at, t, d, budget, need_both=True))
        elif a.kind == "plus":
            per_probe.append(_check_branch(cfg, ch, a, binder_at, t, d, budget, need_both=False))
        else:
            raise ValueError(f"unknown connective {a.kind}")
    return _all_of(per_probe).under(frame)


def _check_one(cfg: Configuration, ch: Channel, t: FinTime) -> Verdict:
    want = act(ch, Side.SEND, PAYLOAD_CLOSE)
    for action, target, _ in enabled_steps(cfg, t):
        if action == want and target.is_empty():
            return PASS
    return fail(f"no closing send on {ch!r} at {t} emptying the configuration")


def _check_tensor(cfg: Configuration, ch: Channel, a: SessionType, at: TimeExpr,
                  t: FinTime, d: Mode, budget: CheckBudget) -> Verdict:
    a1 = subst_type(a.left, a.annot.binder, at)
    a2 = subst_type(a.right, a.annot.binder, at)
    options: list[Verdict] = []
    for action, target, _ in enabled_steps(cfg, t):
        if action.is_silent or action.side is not Side.SEND or action.channel != ch:
            continue
        if action.payload.kind != "chan":
            continue
        c = action.payload.chan
        split = split_by_roots(target, c, ch)
        if split is None:
            options.append(inconclusive(
                f"cannot attribute the successor of {action!r} to the two roots"))
            continue
        part1, part2 = split
        w1 = certify_future(deinstantiate(part1, c), t, budget.horizon)
        w2 = certify_future(deinstantiate(part2, ch), t, budget.horizon)
        v = _all_of([
            term_member(w1, a1, t, d, budget.deeper()).under("sent component"),
            term_member(w2, a2, t, d, budget.deeper()).under("continuation"),
        ])
        options.append(v)
    return _any_of(options, f"no channel send on {ch!r} at {t}")


def _interp_definitely_empty(a: SessionType, t: FinTime, d: Mode) -> bool:
    """Provider membership demands every satisfying instant lie at or
    after the start, so an earlier satisfying instant empties the
    interpretation outright."""
    if d.star or t == 0:
        return False
    return bool(satisfying_times(a.annot.pred, a.annot.binder, 0, t - 1))


def _check_lolli(nc: NamelessConfiguration, cfg: Configuration, ch: Channel,
                 a: SessionType, at: TimeExpr, t: FinTime, d: Mode,
                 budget: CheckBudget) -> Verdict:
    a1 = subst_type(a.left, a.annot.binder, at)
    a2 = subst_type(a.right, a.annot.binder, at)
    in_mode = d.invert()
    inputs = input_families(a1, t, in_mode, budget)
    if not inputs:
        if _interp_definitely_empty(a1, t, in_mode):
            return PASS  # no admissible inputs exist: the clause is vacuous
        return inconclusive(f"no candidate inputs synthesized for {a1!r}")
    results: list[Verdict] = []
    for w1 in inputs:
        c = fresh_channel(ncfg_names(nc) | {ch.name} | w1.names() | {HOLE.name}, "q")
        got = None
        for action, target, _ in enabled_steps(cfg, t, chan_candidates=[c]):
            if (not action.is_silent and action.side is Side.RECV
                    and action.channel == ch and action.payload == Payload("chan", chan=c)):
                got = target
                break
        if got is None:
            results.append(fail(f"no channel receive on {ch!r} at {t}"))
            continue
        cont = deinstantiate(got, ch)
        joined = NamelessConfiguration(
            cont.rest.union(instantiate(w1.start, c)), cont.root)
        w2 = certify_future(joined, t, budget.horizon)
        results.append(term_member(w2, a2, t, d, budget.deeper())
                       .under(f"continuation against input at {c!r}"))
    return _all_of(results)


def _check_branch(cfg: Configuration, ch: Channel, a: SessionType, at: TimeExpr,
                  t: FinTime, d: Mode, budget: CheckBudget, need_both: bool) -> Verdict:
    a_parts = (subst_type(a.left, a.annot.binder, at),
               subst_type(a.right, a.annot.binder, at))
    side = Side.RECV if need_both else Side.SEND
    branch_verdicts: list[Verdict] = []
    for i in (1, 2):
        want = act(ch, side, Payload("sel", sel=i))
        found = None
        for action, target, _ in enabled_steps(cfg, t):
            if action == want:
                found = target
                break
        if found is None:
            branch_verdicts.append(fail(f"no {side.value}pi{i} step on {ch!r} at {t}"))
            continue
        wi = certify_future(deinstantiate(found, ch), t, budget.horizon)
        branch_verdicts.append(term_member(wi, a_parts[i - 1], t, d, budget.deeper())
                               .under(f"branch pi{i}"))
    if need_both:
        return _all_of(branch_verdicts)
    return _any_of(branch_verdicts, "no selector branch available")


def term_member(w: ComputableTrajectory, a: SessionType, t: FinTime,
                d: Mode, budget: CheckBudget) -> Verdict:
    """Bounded check that the trajectory inhabits the type at ``t``.

    In client mode the time bound guards each obligation; in provider
    mode it is itself an obligation at every satisfying instant.
    """
    if not _closed(a):
        raise ValueError(f"open type in term check: {a!r}")
    if w.lo > fin(t):
        raise ValueError(f"trajectory starts at {w.lo!r}, after check time {t}")
    binder = a.annot.binder
    pred = a.annot.pred
    frame = f"term {a.kind} @ {t} [{d!r}] horizon {budget.horizon}"
    verdicts: list[Verdict] = []
    for tp in satisfying_times(pred, binder, 0, budget.horizon):
        if d.star:
            if t <= tp:
                verdicts.append(value_member(w.sample(tp), a, tp, d, budget).under(f"T'={tp}"))
        else:
            if tp < t:
                verdicts.append(fail(f"satisfying instant {tp} precedes start {t}"))
            else:
                verdicts.append(value_member(w.sample(tp), a, tp, d, budget).under(f"T'={tp}"))
    beyond = satisfiable_beyond(pred, binder, budget.horizon)
    if beyond is not None:
        verdicts.append(inconclusive(f"first unchecked satisfying instant: T'={beyond}"))
    return _all_of(verdicts).under(frame)


# ---------------------------------------------------------------------------
# closure and retyping checks


def closure_tests(w1: ComputableTrajectory, w2: ComputableTrajectory,
                  a: SessionType, t: FinTime, t_mid: FinTime,
                  budget: CheckBudget) -> Verdict:
    """Executable instances of the two closure facts: prefixing preserves
    provider membership, partitioning preserves client membership."""
    results: list[Verdict] = []
    base = term_member(w2, a, t_mid, NOSTAR, budget)
    if base.is_pass:
        glued = ct_concat(w1, w2)
        after = term_member(glued, a, t, NOSTAR, budget)
        if after.is_fail:
            results.append(after.under("backwards closure violated"))
        else:
            results.append(after)
    else:
        results.append(PASS if base.is_fail else base)
    star_base = term_member(ct_concat(w1, w2), a, t, STAR, budget)
    if star_base.is_pass:
        cut = ct_partition_after(ct_concat(w1, w2), t_mid)
        fwd_v = term_member(cut, a, t_mid, STAR, budget)
        if fwd_v.is_fail:
            results.append(fwd_v.under("forwards closure violated"))
        else:
            results.append(fwd_v)
    else:
        results.append(PASS if star_base.is_fail else star_base)
    return _all_of(results)


def semantic_retype_test(a: SessionType, b: SessionType, t: FinTime,
                         w: ComputableTrajectory, budget: CheckBudget,
                         style: str) -> Verdict:
    """Check the semantic content of a syntactic retyping on an instance.

    cut style: provider membership at the source type must give client
    membership at the target; fwd style: client membership at the source
    must give provider membership at the target.
    """
    if style == "cut":
        have = term_member(w, a, t, NOSTAR, budget)
        if not have.is_pass:
            return PASS if have.is_fail else have
        out = term_member(w, b, t, STAR, budget)
    elif style == "fwd":
        have = term_member(w, a, t, STAR, budget)
        if not have.is_pass:
            return PASS if have.is_fail else have
        out = term_member(w, b, t, NOSTAR, budget)
    else:
        raise ValueError(f"unknown retyping style {style}")
    if out.is_fail:
        return out.under(f"semantic retyping ({style}) violated")
    return out


# ---------------------------------------------------------------------------
# complementary configurations


ComplConfig = dict  # str -> (Channel, ComputableTrajectory)


def subst_of(delta: ComplConfig) -> dict[str, Channel]:
    return {x: ch for x, (ch, _) in delta.items()}


def apply_compl(delta: ComplConfig, root: NamelessObj) -> NamelessConfiguration:
    cfg: Configuration = FMSet()
    for x in sorted(delta):
        ch, w = delta[x]
        cfg = cfg.union(instantiate(w.start, ch))
    return NamelessConfiguration(cfg, root)


def split_compl(delta: ComplConfig, ctx1: dict, ctx2: dict
                ) -> tuple[ComplConfig, ComplConfig]:
    overlap = set(ctx1) & set(ctx2)
    if overlap:
        raise ValueError(f"contexts overlap: {sorted(overlap)}")
    if set(delta) != set(ctx1) | set(ctx2):
        raise ValueError("complementary configuration does not cover the contexts")
    return ({x: delta[x] for x in ctx1}, {x: delta[x] for x in ctx2})


def ct_interleave_compl(w: ComputableTrajectory, delta: ComplConfig
                        ) -> ComputableTrajectory:
    """Fold the complementary trajectories around ``w`` in canonical key
    order, cutting each to ``w``'s interval first."""
    acc = w
    for x in sorted(delta):
        ch, wx = delta[x]
        if wx.lo != w.lo:
            raise ValueError(f"complementary trajectory for {x} starts at {wx.lo!r}, not {w.lo!r}")
        if w.hi.is_finite:
            wx = ct_partition_before(wx, w.hi.finite() - 1)
        acc = ct_interleave(wx, acc, ch)
    return acc


def is_complementary(delta: ComplConfig, ctx: dict, t: FinTime,
                     budget: CheckBudget) -> Verdict:
    if set(delta) != set(ctx):
        return fail(f"domains differ: {sorted(delta)} vs {sorted(ctx)}")
    results = []
    for x in sorted(ctx):
        ch, w = delta[x]
        results.append(term_member(w, ctx[x], t, STAR, budget).under(f"binding {x}@{ch!r}"))
    return _all_of(results)


# ---------------------------------------------------------------------------
# canonical inhabitants (input families and harness environments)


class _Names:
    def __init__(self) -> None:
        self.n = 0

    def var(self) -> str:
        self.n += 1
        return f"v{self.n}"


def canonical_provider(a: SessionType, h: HypSet, at: TimeExpr,
                       names: _Names | None = None) -> Term | None:
    """A closed provider term for ``a`` at time ``at``, when one exists."""
    names = names or _Names()
    t = a.annot.binder if a.annot.binder not in h.gvars else None
    if t is None:
        base = a.annot.binder
        i = 0
        while f"{base}_{i}" in h.gvars:
            i += 1
        t = f"{base}_{i}"
    p_t = subst_pred(a.annot.pred, a.annot.binder, tvar(t))
    h2 = h.extend(t).assume(p_t)
    if not entails(h2, atom(at, "<=", tvar(t))):
        return None
    h3 = h2.assume(atom(at, "<=", tvar(t)))
    annot = a.annot
    if a.kind == "one":
        return TSendClose(annot)
    a1 = subst_type(a.left, a.annot.binder, tvar(t))
    a2 = subst_type(a.right, a.annot.binder, tvar(t))
    if a.kind == "tensor":
        m1 = canonical_provider(a1, h3, tvar(t), names)
        m2 = canonical_provider(a2, h3, tvar(t), names)
        if m1 is None or m2 is None:
            return None
        return TSendChanR(annot, m1, m2)
    if a.kind == "lolli":
        x = names.var()
        body = canonical_consumer(
            x, a1, h3, tvar(t),
            lambda hh, tt: canonical_provider(a2, hh, tt, names), names)
        return None if body is None else TRecvChan(annot, x, body)
    if a.kind == "with":
        m1 = canonical_provider(a1, h3, tvar(t), names)
        m2 = canonical_provider(a2, h3, tvar(t), names)
        if m1 is None or m2 is None:
            return None
        return TRecvSel(annot, m1, m2)
    if a.kind == "plus":
        m1 = canonical_provider(a1, h3, tvar(t), names)
        if m1 is not None:
            return TSendSelR(annot, 1, m1)
        m2 = canonical_provider(a2, h3, tvar(t), names)
        return None if m2 is None else TSendSelR(annot, 2, m2)
    return None


def _first_action_offset(a: SessionType, h: HypSet, at: TimeExpr) -> int | None:
    limit = max_constant(a.annot.pred) + 2
    binder = a.annot.binder
    for k in range(0, limit + 1):
        cand = at.shift(k)
        if entails(h, subst_pred(a.annot.pred, binder, cand)):
            return k
    return None


def canonical_consumer(x: str, a: SessionType, h: HypSet, at: TimeExpr, rest,
                       names: _Names) -> Term | None:
    """Drive the resource ``x : a`` to completion, then continue with
    ``rest`` at the reached time."""
    k = _first_action_offset(a, h, at)
    if k is None:
        return None
    tc = at.shift(k)
    a1 = subst_type(a.left, a.annot.binder, tc) if a.kind != "one" else None
    a2 = subst_type(a.right, a.annot.binder, tc) if a.kind != "one" else None
    from .proclang import sv  # local import to avoid a cycle at module load

    if a.kind == "one":
        tail = rest(h, tc)
        return None if tail is None else TRecvClose(sv(x), tc, tail)
    if a.kind == "tensor":
        y = names.var()
        body = canonical_consumer(
            y, a1, h, tc,
            lambda hh, tt: canonical_consumer(x, a2, hh, tt, rest, names), names)
        return None if body is None else TRecvChanR(sv(x), tc, y, body)
    if a.kind == "lolli":
        arg = canonical_provider(a1, h, tc, names)
        if arg is None:
            return None
        cont = canonical_consumer(x, a2, h, tc, rest, names)
        return None if cont is None else TSendChan(sv(x), tc, arg, cont)
    if a.kind == "with":
        cont = canonical_consumer(x, a1, h, tc, rest, names)
        if cont is not None:
            return TSendSel(sv(x), tc, 1, cont)
        cont = canonical_consumer(x, a2, h, tc, rest, names)
        return None if cont is None else TSendSel(sv(x), tc, 2, cont)
    if a.kind == "plus":
        b1 = canonical_consumer(x, a1, h, tc, rest, names)
        b2 = canonical_consumer(x, a2, h, tc, rest, names)
        if b1 is None or b2 is None:
            return None
        return TRecvSelR(sv(x), tc, b1, b2)
    return None


def generate_compl(ctx: dict, t: FinTime, budget: CheckBudget,
                   avoid: frozenset[str] = frozenset()) -> ComplConfig | None:
    """Synthesize a complementary configuration for a context: one
    canonical provider witness per binding, on fresh channels."""
    delta: ComplConfig = {}
    taken = set(avoid) | {HOLE.name}
    for x in sorted(ctx):
        a = ctx[x]
        term = canonical_provider(a, HypSet(), tlit(t))
        if term is None:
            return None
        try:
            deriv = typecheck(HypSet(), {}, term, tlit(t), a)
        except ProtocolTypeError:
            return None
        try:
            w = ftlr_witness(deriv, {}, budget)
        except FtlrBlocked:
            return None
        ch = fresh_channel(taken | w.names(), "d")
        taken.add(ch.name)
        taken |= w.names()
        delta[x] = (ch, w)
    return delta


def input_families(a: SessionType, t: FinTime, d: Mode, budget: CheckBudget
                   ) -> list[ComputableTrajectory]:
    """Candidate member trajectories for an input position, built as
    witnesses of synthesized canonical inhabitant terms."""
    term = canonical_provider(a, HypSet(), tlit(t))
    if term is None:
        return []
    try:
        deriv = typecheck(HypSet(), {}, term, tlit(t), a)
    except ProtocolTypeError:
        return []
    try:
        w = ftlr_witness(deriv, {}, budget)
    except FtlrBlocked:
        return []
    return [w][: budget.input_families]


# ---------------------------------------------------------------------------
# the witness builder


class FtlrBlocked(Exception):
    """The builder could not discharge an obligation within its budget."""


def _ground_time(e: TimeExpr) -> FinTime:
    if e.var is not None:
        raise FtlrBlocked(f"non-ground judgment time {e!r}")
    return e.offset


def _delta_names(delta: ComplConfig) -> frozenset[str]:
    out: set[str] = {HOLE.name}
    for x in delta:
        ch, w = delta[x]
        out.add(ch.name)
        out |= w.names()
    return frozenset(out)


RIGHT_RULES = {"one-right", "lolli-right", "tensor-right", "with-right", "plus-right"}


def ftlr_witness(d: TypingDerivation, delta: ComplConfig,
                 budget: CheckBudget) -> ComputableTrajectory:
    """Build a trajectory witnessing the judgment against ``delta``.

    Provider-side rules contribute their readiness configuration; the
    cut spawns and frames; identity collapses through the forwarder; and
    client-side rules drive the principal variable's trajectory through
    the exchange, splicing the continuation in at the action instant.
    """
    t0 = _ground_time(d.time)
    sigma = subst_of(delta)
    root = nobj(apply_subst(sigma, d.term))

    if d.rule in RIGHT_RULES:
        base = ct_refl(NamelessConfiguration(FMSet(), root), t0, INFINITY)
        return ct_interleave_compl(base, delta)
    if d.rule == "cut":
        return _witness_cut(d, delta, budget, t0, root)
    if d.rule == "fwd":
        return _witness_fwd(d, delta, t0, root)
    return _witness_left(d, delta, budget, t0, root)


def _witness_cut(d: TypingDerivation, delta: ComplConfig, budget: CheckBudget,
                 t0: FinTime, root: NamelessObj) -> ComputableTrajectory:
    d1, d2 = d.premises
    term: TLet = d.term
    ctx1_keys = {x for x, _ in d1.ctx}
    ctx2_keys = {x for x, _ in d2.ctx} - {term.var}
    delta1, delta2 = split_compl(delta, {x: None for x in ctx1_keys},
                                 {x: None for x in ctx2_keys})
    w1 = ftlr_witness(d1, delta1, budget)
    avoid = _delta_names(delta) | w1.names() | term_channels(root.term)
    c = fresh_channel(avoid, "s")
    delta2p = dict(delta2)
    delta2p[term.var] = (c, w1)
    w_rest = ftlr_witness(d2, delta2p, budget)

    spawn_body = apply_subst({term.var: c}, apply_subst(_drop(subst_of(delta), term.var), term.m2))
    sigma1 = subst_of(delta)
    spawned = FMSet.of(proc(c, nobj(apply_subst(sigma1, term.m1))),
                       proc(HOLE, nobj(spawn_body)))
    spawn = step_obj(HOLE, root, Action(), t0, spawned)
    frame: Configuration = FMSet()
    for x in sorted(delta):
        ch, wx = delta[x]
        frame = frame.union(instantiate(wx.start, ch))
    framed = step_frame(spawn, frame)
    new_start = apply_compl(delta, root)
    if framed.target != instantiate(w_rest.start, HOLE):
        raise FtlrBlocked("cut spawn does not reach the continuation start")
    return ct_prepend_steps(w_rest, [framed], new_start)


def _drop(sigma: dict, var: str) -> dict:
    return {k: v for k, v in sigma.items() if k != var}


def _witness_fwd(d: TypingDerivation, delta: ComplConfig, t0: FinTime,
                 root: NamelessObj) -> ComputableTrajectory:
    term: TFwd = d.term
    ch, wx = delta[term.sym.var]
    named = wx.realize(ch)
    tail = ct_partition_after(wx, t0)

    steps: list[StepCert] = []
    start_x = instantiate(wx.start, ch)
    fwd_atom = FMSet.of(AtomicProc(HOLE, target=ch))
    spawn = step_frame(step_obj(HOLE, root, Action(), t0, fwd_atom), start_x)
    steps.append(spawn)
    at_steps, _ = r_partition_after(named, t0)
    for sc in at_steps:
        steps.append(step_frame(sc, fwd_atom))
    val = wx.sample(t0)
    collapse = step_frame(step_fwd(HOLE, ch, val.root, t0), val.rest)
    steps.append(collapse)
    return ct_prepend_steps(tail, steps, apply_compl(delta, root))


def _find_step(cfg: Configuration, t: FinTime, want: Action, avoid: frozenset[str],
               candidates: tuple[Channel, ...] = ()) -> tuple[Configuration, StepCert]:
    for action, target, cert in enabled_steps(cfg, t, chan_candidates=list(candidates),
                                              avoid=avoid):
        if action == want:
            return target, cert
    raise FtlrBlocked(f"complementary trajectory offers no {want!r} at {t}")


def _client_step(root: NamelessObj, t: FinTime, want: Action,
                 candidates: tuple[Channel, ...] = ()) -> StepCert:
    cfg = FMSet.of(proc(HOLE, root))
    for action, _, cert in enabled_steps(cfg, t, chan_candidates=list(candidates)):
        if action == want:
            return cert
    raise FtlrBlocked(f"client term offers no {want!r} at {t}")


def _witness_left(d: TypingDerivation, delta: ComplConfig, budget: CheckBudget,
                  t0: FinTime, root: NamelessObj) -> ComputableTrajectory:
    term = d.term
    x = term.sym.var
    ch_x, w_x = delta[x]
    tp = _ground_time(term.time)
    if tp > budget.horizon:
        raise FtlrBlocked(f"action time {tp} beyond horizon {budget.horizon}")
    if tp < t0:
        raise FtlrBlocked(f"action time {tp} precedes judgment time {t0}")

    x_val = w_x.sample(tp)
    x_cfg = instantiate(x_val, ch_x)
    avoid = _delta_names(delta) | term_channels(root.term)

    # per rule: the complementary directed pair, the continuation premise,
    # and the updated complementary configuration from the exchange instant
    send_cert: StepCert
    recv_cert: StepCert
    new_bindings: dict
    if isinstance(term, TRecvClose):
        send_target, send_cert = _find_step(x_cfg, tp, act(ch_x, Side.SEND, PAYLOAD_CLOSE), avoid)
        if not send_target.is_empty():
            raise FtlrBlocked("closing send does not empty the provider")
        recv_cert = _client_step(root, tp, act(ch_x, Side.RECV, PAYLOAD_CLOSE))
        d_next = d.premises[0]
        new_bindings = {}
    elif isinstance(term, TRecvChanR):
        sends = [
            (action, target, cert)
            for action, target, cert in enabled_steps(x_cfg, tp, avoid=avoid)
            if not action.is_silent and action.side is Side.SEND
            and action.channel == ch_x and action.payload.kind == "chan"
        ]
        if not sends:
            raise FtlrBlocked(f"provider of {x} offers no channel send at {tp}")
        action, target, send_cert = sends[0]
        c = action.payload.chan
        split = split_by_roots(target, c, ch_x)
        if split is None:
            raise FtlrBlocked("cannot split the provider successor between the roots")
        part_c, part_x = split
        w_sent = certify_future(deinstantiate(part_c, c), tp, budget.horizon, avoid)
        w_cont = certify_future(deinstantiate(part_x, ch_x), tp, budget.horizon, avoid)
        recv_cert = _client_step(root, tp, act(ch_x, Side.RECV, payload_chan(c)),
                                 candidates=(c,))
        d_next = d.premises[0]
        new_bindings = {x: (ch_x, w_cont), term.var: (c, w_sent)}
    elif isinstance(term, TSendChan):
        c = fresh_channel(avoid, "c")
        send_cert = step_obj(
            HOLE, root, act(ch_x, Side.SEND, payload_chan(c)), tp,
            FMSet.of(proc(c, nobj(root.term.arg)), proc(HOLE, nobj(root.term.cont))))
        recv_target, recv_cert = _find_step(
            x_cfg, tp, act(ch_x, Side.RECV, payload_chan(c)), avoid, candidates=(c,))
        d_arg, d_next = d.premises
        ctx_arg = {y for y, _ in d_arg.ctx}
        delta_arg = {y: _cut_after(delta[y], tp) for y in ctx_arg}
        w_arg = ftlr_witness(d_arg, delta_arg, budget)
        cont_nc = deinstantiate(recv_target, ch_x)
        joined = NamelessConfiguration(
            cont_nc.rest.union(instantiate(w_arg.start, c)), cont_nc.root)
        w_xcont = certify_future(joined, tp, budget.horizon, avoid | {c.name})
        new_bindings = {x: (ch_x, w_xcont)}
    elif isinstance(term, TSendSel):
        recv_target, recv_cert = _find_step(
            x_cfg, tp, act(ch_x, Side.RECV, Payload("sel", sel=term.sel)), avoid)
        w_cont = certify_future(deinstantiate(recv_target, ch_x), tp, budget.horizon, avoid)
        send_cert = _client_step(root, tp, act(ch_x, Side.SEND, Payload("sel", sel=term.sel)))
        d_next = d.premises[0]
        new_bindings = {x: (ch_x, w_cont)}
    elif isinstance(term, TRecvSelR):
        offered = None
        for i in (1, 2):
            try:
                send_target, send_cert = _find_step(
                    x_cfg, tp, act(ch_x, Side.SEND, Payload("sel", sel=i)), avoid)
                offered = (i, send_target, send_cert)
                break
            except FtlrBlocked:
                continue
        if offered is None:
            raise FtlrBlocked(f"provider of {x} offers no selector at {tp}")
        i, send_target, send_cert = offered
        w_cont = certify_future(deinstantiate(send_target, ch_x), tp, budget.horizon, avoid)
        recv_cert = _client_step(root, tp, act(ch_x, Side.RECV, Payload("sel", sel=i)))
        d_next = d.premises[i - 1]
        new_bindings = {x: (ch_x, w_cont)}
    else:
        raise FtlrBlocked(f"unsupported rule {d.rule}")

    keep_keys = {y for y, _ in d_next.ctx}
    delta_next: ComplConfig = dict(new_bindings)
    for y in sorted(delta):
        if y in delta_next or y not in keep_keys:
            continue
        delta_next[y] = _cut_after(delta[y], tp)
    if set(delta_next) != keep_keys:
        raise FtlrBlocked(
            f"continuation context {sorted(keep_keys)} vs bindings {sorted(delta_next)}")
    w_rest = ftlr_witness(d_next, delta_next, budget)

    # instant steps at the exchange time: per-binding internal catch-up in
    # canonical order, then the exchange itself, each framed by the rest
    pre_parts: dict[str, Configuration] = {}
    client_part = FMSet.of(proc(HOLE, root))
    current = client_part
    for y in sorted(delta):
        ch_y, w_y = delta[y]
        pre_val = w_y.start if tp == t0 else w_y.sample(tp - 1)
        pre_parts[y] = instantiate(pre_val, ch_y)
        current = current.union(pre_parts[y])
    pre_total = current

    steps: list[StepCert] = []
    for y in sorted(delta):
        ch_y, w_y = delta[y]
        at_steps, _ = r_partition_after(w_y.realize(ch_y), tp)
        part = pre_parts[y]
        for sc in at_steps:
            frame = current.difference(part)
            steps.append(step_frame(sc, frame))
            part = sc.target
            current = frame.union(part)
        pre_parts[y] = part

    comm = step_comm(send_cert, recv_cert)
    frame = current.difference(pre_parts[x]).difference(client_part)
    steps.append(step_frame(comm, frame))
    current = frame.union(comm.target)

    if current != instantiate(w_rest.start, HOLE):
        raise FtlrBlocked("exchange does not reach the continuation start")

    w_spliced = ct_prepend_steps(w_rest, steps, deinstantiate(pre_total, HOLE))
    if tp == t0:
        return w_spliced
    base = ct_refl(NamelessConfiguration(FMSet(), root), t0, tp)
    before = ct_interleave_compl(base, delta)
    return ct_concat(before, w_spliced)


def _cut_after(entry: tuple[Channel, ComputableTrajectory], tp: FinTime
               ) -> tuple[Channel, ComputableTrajectory]:
    ch, w = entry
    return ch, ct_partition_after(w, tp)


# ---------------------------------------------------------------------------
# adequacy


@dataclass
class AdequacyReport:
    verdict: Verdict
    witness_instants: list[FinTime] = field(default_factory=list)
    simulator_instants: list[FinTime] = field(default_factory=list)


def adequacy(term: Term, a: SessionType, ch: Channel, t: FinTime,
             budget: CheckBudget) -> AdequacyReport:
    """Closed unit-typed programs must fire the closing signal at every
    in-horizon satisfying instant, along both the constructed witness and
    the independent deterministic execution."""
    if a.kind != "one":
        raise ValueError("adequacy applies to closing protocols")
    deriv = typecheck(HypSet(), {}, term, tlit(t), a)
    try:
        w = ftlr_witness(deriv, {}, budget)
    except FtlrBlocked as exc:
        return AdequacyReport(inconclusive(f"witness construction blocked: {exc}"))
    if w.start != NamelessConfiguration(FMSet(), nobj(term)):
        return AdequacyReport(fail("witness does not start at the bare program"))

    instants = [u for u in satisfying_times(a.annot.pred, a.annot.binder, 0, budget.horizon)
                if u >= t]
    run = run_silent(FMSet.of(proc(ch, nobj(term))), t, budget.horizon)

    wit_ok: list[FinTime] = []
    sim_ok: list[FinTime] = []
    problems: list[Verdict] = []
    want = act(ch, Side.SEND, PAYLOAD_CLOSE)
    for u in instants:
        cfg_w = instantiate(w.sample(u), ch)
        if any(action == want and target.is_empty()
               for action, target, _ in enabled_steps(cfg_w, u)):
            wit_ok.append(u)
        else:
            problems.append(fail(f"witness path not ready to close at {u}"))
        cfg_s = state_at(run, u)
        if any(action == want and target.is_empty()
               for action, target, _ in enabled_steps(cfg_s, u)):
            sim_ok.append(u)
        else:
            problems.append(fail(f"simulator path not ready to close at {u}"))
    beyond = satisfiable_beyond(a.annot.pred, a.annot.binder, budget.horizon)
    if beyond is not None:
        problems.append(inconclusive(f"satisfying instants beyond horizon (first {beyond})"))
    return AdequacyReport(_all_of(problems) if problems else PASS, wit_ok, sim_ok)
