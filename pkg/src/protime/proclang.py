"""Process terms: grammar, channel substitution, object-level dynamics,
and the linear sequent-calculus typechecker.

Terms carry either a concrete time annotation (client-side forms, which
act at that instant) or a temporal annotation ``t.p`` (provider-side
forms, which are ready at every instant satisfying ``p``).  When a
predicate-annotated form fires at time T, the binder is instantiated to
T throughout its continuations, so runtime terms stay ground.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .lts import (
    Action,
    AtomicProc,
    Channel,
    Configuration,
    EPS,
    NamelessObj,
    PAYLOAD_CLOSE,
    Payload,
    Side,
    act,
    fresh_channel,
    payload_chan,
    proc,
    register_language,
)
from .multiset import FMSet
from .sessiontypes import (
    HypSet,
    Pred,
    SessionType,
    TemporalAnnot,
    TimeExpr,
    all_names_type,
    atom,
    check_formation,
    entails,
    eval_pred,
    pred_vars,
    retype_cut_reason,
    retype_fwd_reason,
    subst_pred,
    subst_type,
    tvar,
)
from .timebase import FinTime

LANG_ID = "sess"


# ---------------------------------------------------------------------------
# symbols and terms


@dataclass(frozen=True)
class Sym:
    """A subject position: a term variable or an already-named channel."""

    var: str | None = None
    chan: Channel | None = None

    @property
    def is_chan(self) -> bool:
        return self.chan is not None

    def __repr__(self) -> str:
        return self.var if self.var is not None else repr(self.chan)


def sv(name: str) -> Sym:
    return Sym(var=name)


def sc(ch: Channel) -> Sym:
    return Sym(chan=ch)


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class TFwd(Term):
    sym: Sym
    time: TimeExpr


@dataclass(frozen=True)
class TLet(Term):
    var: str
    annot: SessionType                 # the type the bound session is used at
    src: SessionType | None           # the type the provider is checked at
    m1: Term
    m2: Term
    time: TimeExpr


@dataclass(frozen=True)
class TSendClose(Term):
    annot: TemporalAnnot


@dataclass(frozen=True)
class TRecvClose(Term):
    sym: Sym
    time: TimeExpr
    cont: Term


@dataclass(frozen=True)
class TRecvChan(Term):
    annot: TemporalAnnot
    var: str
    body: Term


@dataclass(frozen=True)
class TSendChan(Term):
    sym: Sym
    time: TimeExpr
    arg: Term
    cont: Term


@dataclass(frozen=True)
class TSendChanR(Term):
    annot: TemporalAnnot
    arg: Term
    cont: Term


@dataclass(frozen=True)
class TRecvChanR(Term):
    sym: Sym
    time: TimeExpr
    var: str
    body: Term


@dataclass(frozen=True)
class TRecvSel(Term):
    annot: TemporalAnnot
    b1: Term
    b2: Term


@dataclass(frozen=True)
class TSendSel(Term):
    sym: Sym
    time: TimeExpr
    sel: int
    cont: Term


@dataclass(frozen=True)
class TSendSelR(Term):
    annot: TemporalAnnot
    sel: int
    cont: Term


@dataclass(frozen=True)
class TRecvSelR(Term):
    sym: Sym
    time: TimeExpr
    b1: Term
    b2: Term


def nobj(term: Term) -> NamelessObj:
    return NamelessObj(LANG_ID, term)


# ---------------------------------------------------------------------------
# free variables, channels, renaming


def fv(m: Term) -> frozenset[str]:
    if isinstance(m, TFwd):
        return frozenset() if m.sym.is_chan else frozenset({m.sym.var})
    if isinstance(m, TLet):
        return fv(m.m1) | (fv(m.m2) - {m.var})
    if isinstance(m, TSendClose):
        return frozenset()
    if isinstance(m, TRecvClose):
        return _sym_fv(m.sym) | fv(m.cont)
    if isinstance(m, TRecvChan):
        return fv(m.body) - {m.var}
    if isinstance(m, TSendChan):
        return _sym_fv(m.sym) | fv(m.arg) | fv(m.cont)
    if isinstance(m, TSendChanR):
        return fv(m.arg) | fv(m.cont)
    if isinstance(m, TRecvChanR):
        return _sym_fv(m.sym) | (fv(m.body) - {m.var})
    if isinstance(m, TRecvSel):
        return fv(m.b1) | fv(m.b2)
    if isinstance(m, TSendSel):
        return _sym_fv(m.sym) | fv(m.cont)
    if isinstance(m, TSendSelR):
        return fv(m.cont)
    if isinstance(m, TRecvSelR):
        return _sym_fv(m.sym) | fv(m.b1) | fv(m.b2)
    raise TypeError(f"not a term: {m!r}")


def _sym_fv(s: Sym) -> frozenset[str]:
    return frozenset() if s.is_chan else frozenset({s.var})


def term_channels(m: Term) -> frozenset[str]:
    out: set[str] = set()

    def sym(s: Sym) -> None:
        if s.is_chan:
            out.add(s.chan.name)

    def walk(t: Term) -> None:
        if isinstance(t, TFwd):
            sym(t.sym)
        elif isinstance(t, TLet):
            walk(t.m1)
            walk(t.m2)
        elif isinstance(t, TSendClose):
            pass
        elif isinstance(t, (TRecvClose, TSendSel)):
            sym(t.sym)
            walk(t.cont)
        elif isinstance(t, TRecvChan):
            walk(t.body)
        elif isinstance(t, TSendChan):
            sym(t.sym)
            walk(t.arg)
            walk(t.cont)
        elif isinstance(t, TSendChanR):
            walk(t.arg)
            walk(t.cont)
        elif isinstance(t, TRecvChanR):
            sym(t.sym)
            walk(t.body)
        elif isinstance(t, (TRecvSel,)):
            walk(t.b1)
            walk(t.b2)
        elif isinstance(t, TSendSelR):
            walk(t.cont)
        elif isinstance(t, TRecvSelR):
            sym(t.sym)
            walk(t.b1)
            walk(t.b2)

    walk(m)
    return frozenset(out)


def rename_channels(m: Term, mapping: dict[str, str]) -> Term:
    def rsym(s: Sym) -> Sym:
        if s.is_chan and s.chan.name in mapping:
            return sc(Channel(mapping[s.chan.name]))
        return s

    if isinstance(m, TFwd):
        return TFwd(rsym(m.sym), m.time)
    if isinstance(m, TLet):
        return TLet(m.var, m.annot, m.src,
                    rename_channels(m.m1, mapping), rename_channels(m.m2, mapping), m.time)
    if isinstance(m, TSendClose):
        return m
    if isinstance(m, TRecvClose):
        return TRecvClose(rsym(m.sym), m.time, rename_channels(m.cont, mapping))
    if isinstance(m, TRecvChan):
        return TRecvChan(m.annot, m.var, rename_channels(m.body, mapping))
    if isinstance(m, TSendChan):
        return TSendChan(rsym(m.sym), m.time,
                         rename_channels(m.arg, mapping), rename_channels(m.cont, mapping))
    if isinstance(m, TSendChanR):
        return TSendChanR(m.annot, rename_channels(m.arg, mapping), rename_channels(m.cont, mapping))
    if isinstance(m, TRecvChanR):
        return TRecvChanR(rsym(m.sym), m.time, m.var, rename_channels(m.body, mapping))
    if isinstance(m, TRecvSel):
        return TRecvSel(m.annot, rename_channels(m.b1, mapping), rename_channels(m.b2, mapping))
    if isinstance(m, TSendSel):
        return TSendSel(rsym(m.sym), m.time, m.sel, rename_channels(m.cont, mapping))
    if isinstance(m, TSendSelR):
        return TSendSelR(m.annot, m.sel, rename_channels(m.cont, mapping))
    if isinstance(m, TRecvSelR):
        return TRecvSelR(rsym(m.sym), m.time, rename_channels(m.b1, mapping),
                         rename_channels(m.b2, mapping))
    raise TypeError(f"not a term: {m!r}")


# ---------------------------------------------------------------------------
# substitution of channels for variables


Subst = dict


def _minus(sigma: Subst, var: str) -> Subst:
    return {k: v for k, v in sigma.items() if k != var}


def _subst_sym(sigma: Subst, s: Sym) -> Sym:
    if not s.is_chan and s.var in sigma:
        return sc(sigma[s.var])
    return s


def apply_subst(sigma: Subst, m: Term) -> Term:
    """Substitute channels for free variables, removing each binder from
    the substitution as it is crossed."""
    if isinstance(m, TFwd):
        return TFwd(_subst_sym(sigma, m.sym), m.time)
    if isinstance(m, TLet):
        return TLet(m.var, m.annot, m.src, apply_subst(sigma, m.m1),
                    apply_subst(_minus(sigma, m.var), m.m2), m.time)
    if isinstance(m, TSendClose):
        return m
    if isinstance(m, TRecvClose):
        # the consumed subject also leaves the substitution
        drop = m.sym.var if not m.sym.is_chan else None
        return TRecvClose(_subst_sym(sigma, m.sym), m.time,
                          apply_subst(_minus(sigma, drop) if drop else sigma, m.cont))
    if isinstance(m, TRecvChan):
        return TRecvChan(m.annot, m.var, apply_subst(_minus(sigma, m.var), m.body))
    if isinstance(m, TSendChan):
        return TSendChan(_subst_sym(sigma, m.sym), m.time,
                         apply_subst(sigma, m.arg), apply_subst(sigma, m.cont))
    if isinstance(m, TSendChanR):
        return TSendChanR(m.annot, apply_subst(sigma, m.arg), apply_subst(sigma, m.cont))
    if isinstance(m, TRecvChanR):
        return TRecvChanR(_subst_sym(sigma, m.sym), m.time, m.var,
                          apply_subst(_minus(sigma, m.var), m.body))
    if isinstance(m, TRecvSel):
        return TRecvSel(m.annot, apply_subst(sigma, m.b1), apply_subst(sigma, m.b2))
    if isinstance(m, TSendSel):
        return TSendSel(_subst_sym(sigma, m.sym), m.time, m.sel, apply_subst(sigma, m.cont))
    if isinstance(m, TSendSelR):
        return TSendSelR(m.annot, m.sel, apply_subst(sigma, m.cont))
    if isinstance(m, TRecvSelR):
        return TRecvSelR(_subst_sym(sigma, m.sym), m.time,
                         apply_subst(sigma, m.b1), apply_subst(sigma, m.b2))
    raise TypeError(f"not a term: {m!r}")


# ---------------------------------------------------------------------------
# time substitution (instantiating predicate binders at step time)


def subst_time(m: Term, var: str, repl: TimeExpr) -> Term:
    def e(x: TimeExpr) -> TimeExpr:
        return TimeExpr(repl.var, repl.offset + x.offset) if x.var == var else x

    def p(an: TemporalAnnot) -> TemporalAnnot:
        if an.binder == var:
            return an
        return TemporalAnnot(an.binder, subst_pred(an.pred, var, repl))

    if isinstance(m, TFwd):
        return TFwd(m.sym, e(m.time))
    if isinstance(m, TLet):
        return TLet(m.var, subst_type(m.annot, var, repl),
                    None if m.src is None else subst_type(m.src, var, repl),
                    subst_time(m.m1, var, repl), subst_time(m.m2, var, repl), e(m.time))
    if isinstance(m, TSendClose):
        return TSendClose(p(m.annot))
    if isinstance(m, TRecvClose):
        return TRecvClose(m.sym, e(m.time), subst_time(m.cont, var, repl))
    if isinstance(m, TRecvChan):
        if m.annot.binder == var:
            return m
        return TRecvChan(p(m.annot), m.var, subst_time(m.body, var, repl))
    if isinstance(m, TSendChan):
        return TSendChan(m.sym, e(m.time), subst_time(m.arg, var, repl),
                         subst_time(m.cont, var, repl))
    if isinstance(m, TSendChanR):
        if m.annot.binder == var:
            return m
        return TSendChanR(p(m.annot), subst_time(m.arg, var, repl),
                          subst_time(m.cont, var, repl))
    if isinstance(m, TRecvChanR):
        return TRecvChanR(m.sym, e(m.time), m.var, subst_time(m.body, var, repl))
    if isinstance(m, TRecvSel):
        if m.annot.binder == var:
            return m
        return TRecvSel(p(m.annot), subst_time(m.b1, var, repl), subst_time(m.b2, var, repl))
    if isinstance(m, TSendSel):
        return TSendSel(m.sym, e(m.time), m.sel, subst_time(m.cont, var, repl))
    if isinstance(m, TSendSelR):
        if m.annot.binder == var:
            return m
        return TSendSelR(p(m.annot), m.sel, subst_time(m.cont, var, repl))
    if isinstance(m, TRecvSelR):
        return TRecvSelR(m.sym, e(m.time), subst_time(m.b1, var, repl),
                         subst_time(m.b2, var, repl))
    raise TypeError(f"not a term: {m!r}")


def ground_term(m: Term, env: dict[str, FinTime]) -> Term:
    out = m
    for var, t in env.items():
        out = subst_time(out, var, TimeExpr(None, t))
    return out


# ---------------------------------------------------------------------------
# object-level dynamics


def _ground(e: TimeExpr) -> FinTime | None:
    return e.offset if e.var is None else None


def _pred_holds_at(an: TemporalAnnot, t: FinTime) -> bool:
    p = subst_pred(an.pred, an.binder, TimeExpr(None, t))
    if pred_vars(p):
        return False  # open predicates never fire
    return eval_pred(p, {})


def _inst_binder(an: TemporalAnnot, t: FinTime, m: Term) -> Term:
    return subst_time(m, an.binder, TimeExpr(None, t))


def object_step(
    m: Term,
    provider: Channel,
    time: FinTime,
    chan_candidates: Sequence[Channel] = (),
    avoid: frozenset[str] = frozenset(),
) -> list[tuple[Action, Configuration]]:
    """All transitions of a (closed) term at an instant.

    Receive-a-channel forms produce one successor per candidate payload
    channel; the caller supplies the candidates.  Spawning forms pick the
    deterministically-first fresh channel outside ``avoid``.
    """
    base_avoid = avoid | term_channels(m) | {provider.name}
    out: list[tuple[Action, Configuration]] = []

    if isinstance(m, TFwd) and m.sym.is_chan:
        if _ground(m.time) == time:
            out.append((EPS, FMSet.of(AtomicProc(provider, target=m.sym.chan))))
    elif isinstance(m, TLet):
        if _ground(m.time) == time:
            b = fresh_channel(base_avoid, "s")
            body = apply_subst({m.var: b}, m.m2)
            out.append((EPS, FMSet.of(proc(b, nobj(m.m1)), proc(provider, nobj(body)))))
    elif isinstance(m, TSendClose):
        if _pred_holds_at(m.annot, time):
            out.append((act(provider, Side.SEND, PAYLOAD_CLOSE), FMSet()))
    elif isinstance(m, TRecvClose) and m.sym.is_chan:
        if _ground(m.time) == time:
            out.append((act(m.sym.chan, Side.RECV, PAYLOAD_CLOSE),
                        FMSet.of(proc(provider, nobj(m.cont)))))
    elif isinstance(m, TRecvChan):
        if _pred_holds_at(m.annot, time):
            for c in chan_candidates:
                body = apply_subst({m.var: c}, _inst_binder(m.annot, time, m.body))
                out.append((act(provider, Side.RECV, payload_chan(c)),
                            FMSet.of(proc(provider, nobj(body)))))
    elif isinstance(m, TSendChan) and m.sym.is_chan:
        if _ground(m.time) == time:
            c = fresh_channel(base_avoid, "c")
            out.append((act(m.sym.chan, Side.SEND, payload_chan(c)),
                        FMSet.of(proc(c, nobj(m.arg)), proc(provider, nobj(m.cont)))))
    elif isinstance(m, TSendChanR):
        if _pred_holds_at(m.annot, time):
            c = fresh_channel(base_avoid, "c")
            out.append((act(provider, Side.SEND, payload_chan(c)),
                        FMSet.of(proc(c, nobj(_inst_binder(m.annot, time, m.arg))),
                                 proc(provider, nobj(_inst_binder(m.annot, time, m.cont))))))
    elif isinstance(m, TRecvChanR) and m.sym.is_chan:
        if _ground(m.time) == time:
            for c in chan_candidates:
                body = apply_subst({m.var: c}, m.body)
                out.append((act(m.sym.chan, Side.RECV, payload_chan(c)),
                            FMSet.of(proc(provider, nobj(body)))))
    elif isinstance(m, TRecvSel):
        if _pred_holds_at(m.annot, time):
            for i, branch in ((1, m.b1), (2, m.b2)):
                out.append((act(provider, Side.RECV, Payload("sel", sel=i)),
                            FMSet.of(proc(provider, nobj(_inst_binder(m.annot, time, branch))))))
    elif isinstance(m, TSendSel) and m.sym.is_chan:
        if _ground(m.time) == time:
            out.append((act(m.sym.chan, Side.SEND, Payload("sel", sel=m.sel)),
                        FMSet.of(proc(provider, nobj(m.cont)))))
    elif isinstance(m, TSendSelR):
        if _pred_holds_at(m.annot, time):
            out.append((act(provider, Side.SEND, Payload("sel", sel=m.sel)),
                        FMSet.of(proc(provider, nobj(_inst_binder(m.annot, time, m.cont))))))
    elif isinstance(m, TRecvSelR) and m.sym.is_chan:
        if _ground(m.time) == time:
            for i, branch in ((1, m.b1), (2, m.b2)):
                out.append((act(m.sym.chan, Side.RECV, Payload("sel", sel=i)),
                            FMSet.of(proc(provider, nobj(branch)))))

    return sorted(out, key=lambda s: (repr(s[0]), repr(s[1])))


def check_object_step(m: Term, provider: Channel, action: Action, time: FinTime,
                      target: Configuration) -> bool:
    """Decide derivability of one claimed object transition."""
    if isinstance(m, TFwd) and m.sym.is_chan:
        return (action.is_silent and _ground(m.time) == time
                and target == FMSet.of(AtomicProc(provider, target=m.sym.chan)))
    if isinstance(m, TLet):
        if not (action.is_silent and _ground(m.time) == time and len(target) == 2):
            return False
        spawned = [a for a, _ in target.items() if a.provider != provider and not a.is_fwd]
        kept = [a for a, _ in target.items() if a.provider == provider and not a.is_fwd]
        if len(spawned) != 1 or len(kept) != 1:
            return False
        b = spawned[0].provider
        return (spawned[0].body == nobj(m.m1)
                and kept[0].body == nobj(apply_subst({m.var: b}, m.m2)))
    if isinstance(m, TSendClose):
        return (action == act(provider, Side.SEND, PAYLOAD_CLOSE)
                and _pred_holds_at(m.annot, time) and target.is_empty())
    if isinstance(m, TRecvClose) and m.sym.is_chan:
        return (action == act(m.sym.chan, Side.RECV, PAYLOAD_CLOSE)
                and _ground(m.time) == time
                and target == FMSet.of(proc(provider, nobj(m.cont))))
    if isinstance(m, TRecvChan):
        if action.is_silent or action.side is not Side.RECV or action.payload.kind != "chan":
            return False
        if action.channel != provider or not _pred_holds_at(m.annot, time):
            return False
        c = action.payload.chan
        body = apply_subst({m.var: c}, _inst_binder(m.annot, time, m.body))
        return target == FMSet.of(proc(provider, nobj(body)))
    if isinstance(m, TSendChan) and m.sym.is_chan:
        if action.is_silent or action.side is not Side.SEND or action.payload.kind != "chan":
            return False
        if action.channel != m.sym.chan or _ground(m.time) != time:
            return False
        c = action.payload.chan
        return target == FMSet.of(proc(c, nobj(m.arg)), proc(provider, nobj(m.cont)))
    if isinstance(m, TSendChanR):
        if action.is_silent or action.side is not Side.SEND or action.payload.kind != "chan":
            return False
        if action.channel != provider or not _pred_holds_at(m.annot, time):
            return False
        c = action.payload.chan
        return target == FMSet.of(
            proc(c, nobj(_inst_binder(m.annot, time, m.arg))),
            proc(provider, nobj(_inst_binder(m.annot, time, m.cont))))
    if isinstance(m, TRecvChanR) and m.sym.is_chan:
        if action.is_silent or action.side is not Side.RECV or action.payload.kind != "chan":
            return False
        if action.channel != m.sym.chan or _ground(m.time) != time:
            return False
        c = action.payload.chan
        return target == FMSet.of(proc(provider, nobj(apply_subst({m.var: c}, m.body))))
    if isinstance(m, TRecvSel):
        if action.is_silent or action.side is not Side.RECV or action.payload.kind != "sel":
            return False
        if action.channel != provider or not _pred_holds_at(m.annot, time):
            return False
        branch = m.b1 if action.payload.sel == 1 else m.b2
        return target == FMSet.of(proc(provider, nobj(_inst_binder(m.annot, time, branch))))
    if isinstance(m, TSendSel) and m.sym.is_chan:
        return (action == act(m.sym.chan, Side.SEND, Payload("sel", sel=m.sel))
                and _ground(m.time) == time
                and target == FMSet.of(proc(provider, nobj(m.cont))))
    if isinstance(m, TSendSelR):
        return (action == act(provider, Side.SEND, Payload("sel", sel=m.sel))
                and _pred_holds_at(m.annot, time)
                and target == FMSet.of(proc(provider, nobj(_inst_binder(m.annot, time, m.cont)))))
    if isinstance(m, TRecvSelR) and m.sym.is_chan:
        if action.is_silent or action.side is not Side.RECV or action.payload.kind != "sel":
            return False
        if action.channel != m.sym.chan or _ground(m.time) != time:
            return False
        branch = m.b1 if action.payload.sel == 1 else m.b2
        return target == FMSet.of(proc(provider, nobj(branch)))
    return False


class SessionTermLanguage:
    """The session-typed process language, registered in the step relation."""

    lang_id = LANG_ID

    def enumerate_steps(self, term, provider, time, chan_candidates, avoid):
        return object_step(term, provider, time, chan_candidates, avoid)

    def check_step(self, term, provider, action, time, target):
        return check_object_step(term, provider, action, time, target)

    def term_names(self, term):
        return term_channels(term)

    def rename_term(self, term, mapping):
        return rename_channels(term, mapping)

    def show_term(self, term):
        from .syntax import show_term
        return show_term(term)

    def parse_term(self, text):
        from .syntax import parse_term
        return parse_term(text)


register_language(SessionTermLanguage())


# ---------------------------------------------------------------------------
# typing


class ProtocolTypeError(Exception):
    category = "error"


class LinearityError(ProtocolTypeError):
    category = "linearity"


class RuleShapeError(ProtocolTypeError):
    category = "rule-shape"


class EntailmentError(ProtocolTypeError):
    category = "entailment"

    def __init__(self, message: str, obligation: str):
        super().__init__(message)
        self.obligation = obligation


class RetypeError(ProtocolTypeError):
    category = "retyping"


TypingCtx = dict  # str -> SessionType


@dataclass(frozen=True)
class TypingDerivation:
    rule: str
    hyp: HypSet
    ctx: tuple[tuple[str, SessionType], ...]
    term: Term
    time: TimeExpr
    stype: SessionType
    premises: tuple["TypingDerivation", ...] = ()
    # (description, hypotheses, goal) for each discharged entailment
    obligations: tuple[tuple[str, HypSet, Pred], ...] = ()
    retype: tuple[str, SessionType, SessionType] | None = None


def _ctx_tuple(ctx: TypingCtx) -> tuple[tuple[str, SessionType], ...]:
    return tuple(sorted(ctx.items()))


def _require(cond: bool, err: ProtocolTypeError) -> None:
    if not cond:
        raise err


def _oblige(h: HypSet, goal: Pred, what: str,
            sink: list[tuple[str, HypSet, Pred]]) -> None:
    if not entails(h, goal):
        raise EntailmentError(f"cannot discharge {what}: |- {goal!r}", what)
    sink.append((what, h, goal))


def _expr_scoped(h: HypSet, e: TimeExpr) -> bool:
    return e.var is None or e.var in h.gvars


def _fresh_binder(h: HypSet, a: SessionType, extra: frozenset[str]) -> str:
    avoid = set(h.gvars) | all_names_type(a) | extra
    cand = a.annot.binder
    if cand not in h.gvars and cand not in extra:
        return cand
    i = 0
    while f"{cand}_{i}" in avoid:
        i += 1
    return f"{cand}_{i}"


def _split_ctx(ctx: TypingCtx, left_vars: frozenset[str], right_vars: frozenset[str],
               term: Term) -> tuple[TypingCtx, TypingCtx]:
    overlap = left_vars & right_vars
    _require(not overlap, LinearityError(
        f"variables used in both premises: {sorted(overlap)}"))
    left = {x: a for x, a in ctx.items() if x in left_vars}
    right = {x: a for x, a in ctx.items() if x in right_vars}
    unused = set(ctx) - left_vars - right_vars
    _require(not unused, LinearityError(f"unused bindings: {sorted(unused)}"))
    return left, right


def _open_components(a: SessionType, t: str) -> tuple[SessionType, SessionType]:
    te = tvar(t)
    return (subst_type(a.left, a.annot.binder, te),
            subst_type(a.right, a.annot.binder, te))


def _right_rule_setup(h: HypSet, a: SessionType, term_annot: TemporalAnnot,
                      time: TimeExpr, extra_names: frozenset[str],
                      sink: list) -> tuple[HypSet, str]:
    """Common premise plumbing for provider-side rules: extend the
    hypotheses with a fresh binder, the type predicate and T <= t, then
    require the type's instants to be covered by the term's readiness."""
    conflict = extra_names | (pred_vars(term_annot.pred) - {term_annot.binder})
    if time.var is not None:
        conflict = conflict | {time.var}
    t = _fresh_binder(h, a, conflict)
    p_t = subst_pred(a.annot.pred, a.annot.binder, tvar(t))
    h_p = h.extend(t).assume(p_t)
    _oblige(h_p, atom(time, "<=", tvar(t)), f"{time!r} <= {t} (future exchange)", sink)
    q_t = subst_pred(term_annot.pred, term_annot.binder, tvar(t))
    if q_t != p_t:
        _oblige(h_p, q_t, f"readiness of the term at every instant of {a.annot!r}", sink)
    return h_p.assume(atom(time, "<=", tvar(t))), t


@dataclass(frozen=True)
class Judgment:
    hyp: HypSet
    ctx: tuple[tuple[str, SessionType], ...]
    term: Term
    time: TimeExpr
    stype: SessionType


def _rule_instance(h: HypSet, ctx: TypingCtx, m: Term, time: TimeExpr, a: SessionType
                   ) -> tuple[str, list[Judgment], tuple[str, SessionType, SessionType] | None,
                              list[tuple[str, HypSet, Pred]]]:
    """Match the conclusion against its (unique) rule: discharge the
    rule's entailment and retyping side conditions and compute the
    premise judgments.  Raises a classified error on any failure."""
    sink: list[tuple[str, HypSet, Pred]] = []

    def prem(h2: HypSet, ctx2: TypingCtx, m2: Term, t2: TimeExpr, a2: SessionType) -> Judgment:
        return Judgment(h2, _ctx_tuple(ctx2), m2, t2, a2)

    # --- identity and cut ---------------------------------------------------
    if isinstance(m, TFwd):
        _require(not m.sym.is_chan, RuleShapeError("forward subject must be a variable"))
        _require(set(ctx) == {m.sym.var},
                 LinearityError(f"forward needs exactly its subject in context, got {sorted(ctx)}"))
        _equal_times(h, time, m.time, sink)
        src = ctx[m.sym.var]
        reason = retype_fwd_reason(h, src, a, time)
        if reason is not None:
            raise RetypeError(f"cannot forward {src!r} as {a!r}: {reason}")
        return "fwd", [], ("fwd", src, a), sink

    if isinstance(m, TLet):
        _equal_times(h, time, m.time, sink)
        _require(m.var not in ctx, RuleShapeError(f"shadowed binding: {m.var}"))
        src = m.src if m.src is not None else m.annot
        _require(check_formation(frozenset(h.gvars), src),
                 RuleShapeError(f"cut source type not well formed: {src!r}"))
        _require(check_formation(frozenset(h.gvars), m.annot),
                 RuleShapeError(f"cut annotation not well formed: {m.annot!r}"))
        reason = retype_cut_reason(h, src, m.annot, time)
        if reason is not None:
            raise RetypeError(f"cannot hand {src!r} to a client of {m.annot!r}: {reason}")
        ctx1, ctx2 = _split_ctx(ctx, fv(m.m1), fv(m.m2) - {m.var}, m)
        return "cut", [prem(h, ctx1, m.m1, time, src),
                       prem(h, {**ctx2, m.var: m.annot}, m.m2, time, a)], \
            ("cut", src, m.annot), sink

    # --- provider-side (right) rules -----------------------------------------
    if isinstance(m, TSendClose):
        _require(a.kind == "one", RuleShapeError(f"close provider against {a.kind}"))
        _require(not ctx, LinearityError(f"unused bindings: {sorted(ctx)}"))
        _right_rule_setup(h, a, m.annot, time, frozenset(), sink)
        return "one-right", [], None, sink

    if isinstance(m, TRecvChan):
        _require(a.kind == "lolli", RuleShapeError(f"channel receive against {a.kind}"))
        _require(m.var not in ctx, RuleShapeError(f"shadowed binding: {m.var}"))
        h2, t = _right_rule_setup(h, a, m.annot, time, frozenset(), sink)
        a1, a2 = _open_components(a, t)
        return "lolli-right", [prem(h2, {**ctx, m.var: a1}, m.body, tvar(t), a2)], None, sink

    if isinstance(m, TSendChanR):
        _require(a.kind == "tensor", RuleShapeError(f"channel send against {a.kind}"))
        h2, t = _right_rule_setup(h, a, m.annot, time, frozenset(), sink)
        a1, a2 = _open_components(a, t)
        ctx1, ctx2 = _split_ctx(ctx, fv(m.arg), fv(m.cont), m)
        return "tensor-right", [prem(h2, ctx1, m.arg, tvar(t), a1),
                                prem(h2, ctx2, m.cont, tvar(t), a2)], None, sink

    if isinstance(m, TRecvSel):
        _require(a.kind == "with", RuleShapeError(f"selector offer against {a.kind}"))
        h2, t = _right_rule_setup(h, a, m.annot, time, frozenset(), sink)
        a1, a2 = _open_components(a, t)
        return "with-right", [prem(h2, dict(ctx), m.b1, tvar(t), a1),
                              prem(h2, dict(ctx), m.b2, tvar(t), a2)], None, sink

    if isinstance(m, TSendSelR):
        _require(a.kind == "plus", RuleShapeError(f"selector choice against {a.kind}"))
        _require(m.sel in (1, 2), RuleShapeError(f"bad selector {m.sel}"))
        h2, t = _right_rule_setup(h, a, m.annot, time, frozenset(), sink)
        a1, a2 = _open_components(a, t)
        return "plus-right", [prem(h2, dict(ctx), m.cont, tvar(t), a1 if m.sel == 1 else a2)], \
            None, sink

    # --- client-side (left) rules --------------------------------------------
    if isinstance(m, (TRecvClose, TSendChan, TRecvChanR, TSendSel, TRecvSelR)):
        _require(not m.sym.is_chan, RuleShapeError("subject must be a variable"))
        x = m.sym.var
        _require(x in ctx, RuleShapeError(f"subject not in context: {x}"))
        ax = ctx[x]
        tp = m.time
        _require(_expr_scoped(h, tp), RuleShapeError(f"time {tp!r} out of scope"))
        _oblige(h, atom(time, "<=", tp), f"{time!r} <= {tp!r} (action not before now)", sink)
        _oblige(h, subst_pred(ax.annot.pred, ax.annot.binder, tp),
                f"annotation instant {tp!r} satisfies {ax.annot!r}", sink)
        rest = {y: b for y, b in ctx.items() if y != x}

        if isinstance(m, TRecvClose):
            _require(ax.kind == "one", RuleShapeError(f"close receive on {ax.kind}"))
            return "one-left", [prem(h, rest, m.cont, tp, a)], None, sink

        if isinstance(m, TSendChan):
            _require(ax.kind == "lolli", RuleShapeError(f"channel send on {ax.kind}"))
            a1 = subst_type(ax.left, ax.annot.binder, tp)
            a2 = subst_type(ax.right, ax.annot.binder, tp)
            ctx1, ctx2 = _split_ctx(rest, fv(m.arg), fv(m.cont) - {x}, m)
            return "lolli-left", [prem(h, ctx1, m.arg, tp, a1),
                                  prem(h, {**ctx2, x: a2}, m.cont, tp, a)], None, sink

        if isinstance(m, TRecvChanR):
            _require(ax.kind == "tensor", RuleShapeError(f"channel receive on {ax.kind}"))
            _require(m.var not in ctx, RuleShapeError(f"shadowed binding: {m.var}"))
            a1 = subst_type(ax.left, ax.annot.binder, tp)
            a2 = subst_type(ax.right, ax.annot.binder, tp)
            return "tensor-left", [prem(h, {**rest, x: a2, m.var: a1}, m.body, tp, a)], None, sink

        if isinstance(m, TSendSel):
            _require(ax.kind == "with", RuleShapeError(f"selector send on {ax.kind}"))
            _require(m.sel in (1, 2), RuleShapeError(f"bad selector {m.sel}"))
            ai = subst_type(ax.left if m.sel == 1 else ax.right, ax.annot.binder, tp)
            return "with-left", [prem(h, {**rest, x: ai}, m.cont, tp, a)], None, sink

        # TRecvSelR
        _require(ax.kind == "plus", RuleShapeError(f"selector receive on {ax.kind}"))
        a1 = subst_type(ax.left, ax.annot.binder, tp)
        a2 = subst_type(ax.right, ax.annot.binder, tp)
        return "plus-left", [prem(h, {**rest, x: a1}, m.b1, tp, a),
                             prem(h, {**rest, x: a2}, m.b2, tp, a)], None, sink

    raise RuleShapeError(f"no rule for term {m!r} at type {a!r}")


def _equal_times(h: HypSet, t1: TimeExpr, t2: TimeExpr, sink: list) -> None:
    _oblige(h, atom(t1, "<=", t2), f"{t1!r} == {t2!r} (annotation matches judgment)", sink)
    _oblige(h, atom(t2, "<=", t1), f"{t2!r} == {t1!r} (annotation matches judgment)", sink)


def typecheck(h: HypSet, ctx: TypingCtx, m: Term, time: TimeExpr,
              a: SessionType) -> TypingDerivation:
    """Check ``m`` against ``a`` at ``time``; returns the derivation or
    raises a classified error."""
    _require(check_formation(frozenset(h.gvars), a),
             RuleShapeError(f"goal type not well formed: {a!r}"))
    for x, ax in ctx.items():
        _require(check_formation(frozenset(h.gvars), ax),
                 RuleShapeError(f"context type for {x} not well formed: {ax!r}"))
    _require(_expr_scoped(h, time), RuleShapeError(f"time {time!r} out of scope"))
    missing = fv(m) - set(ctx)
    _require(not missing, RuleShapeError(f"free variables not in context: {sorted(missing)}"))
    return _check(h, ctx, m, time, a)


def _check(h: HypSet, ctx: TypingCtx, m: Term, time: TimeExpr,
           a: SessionType) -> TypingDerivation:
    rule, prems, retype, sink = _rule_instance(h, ctx, m, time, a)
    sub = tuple(_check(j.hyp, dict(j.ctx), j.term, j.time, j.stype) for j in prems)
    return TypingDerivation(rule, h, _ctx_tuple(ctx), m, time, a, sub, tuple(sink), retype)


# ---------------------------------------------------------------------------
# derivation re-validation: every node is re-matched against its rule
# schema with fresh entailment calls, independent of how it was found


def validate_derivation(d: TypingDerivation) -> bool:
    try:
        rule, prems, retype, _ = _rule_instance(d.hyp, dict(d.ctx), d.term, d.time, d.stype)
    except ProtocolTypeError:
        return False
    if rule != d.rule or retype != d.retype or len(prems) != len(d.premises):
        return False
    for expected, stored in zip(prems, d.premises):
        if (expected.hyp != stored.hyp or expected.ctx != stored.ctx
                or expected.term != stored.term or expected.time != stored.time
                or expected.stype != stored.stype):
            return False
        if not validate_derivation(stored):
            return False
    return True
