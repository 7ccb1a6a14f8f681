"""Whole-program checks over spec files: ground the time variables,
build witnesses against synthesized environments, and compare the
constructed and executed behaviours.
"""

from __future__ import annotations

from dataclasses import dataclass

from .computable import ComputableTrajectory, validate_ct
from .lts import Channel, fresh_channels
from .proclang import (
    Term,
    TypingDerivation,
    ground_term,
    nobj,
    typecheck,
)
from .semantics import (
    CheckBudget,
    ComplConfig,
    FtlrBlocked,
    NOSTAR,
    PASS,
    Verdict,
    apply_compl,
    apply_subst,
    fail,
    ftlr_witness,
    generate_compl,
    inconclusive,
    subst_of,
    term_member,
    adequacy,
    AdequacyReport,
)
from .sessiontypes import HypSet, SessionType, find_model, subst_type, tlit
from .syntax import TermDef
from .timebase import FinTime


@dataclass
class GroundJudgment:
    ctx: dict[str, SessionType]
    term: Term
    at: FinTime
    stype: SessionType
    valuation: dict[str, int]


def ground_termdef(td: TermDef) -> GroundJudgment | None:
    """Instantiate the declared time variables with a satisfying
    valuation, yielding a closed judgment."""
    if not td.gvars:
        if td.at.var is not None:
            return None
        return GroundJudgment(td.ctx, td.term, td.at.offset, td.stype, {})
    model = find_model(td.hyp)
    if model is None:
        return None
    env = {v: model.get(v, 0) for v in td.gvars}
    ctx = {x: _ground_type(a, env) for x, a in td.ctx.items()}
    term = ground_term(td.term, env)
    stype = _ground_type(td.stype, env)
    at = td.at.offset + (env[td.at.var] if td.at.var is not None else 0)
    return GroundJudgment(ctx, term, at, stype, env)


def _ground_type(a: SessionType, env: dict[str, int]) -> SessionType:
    for var, val in env.items():
        a = subst_type(a, var, tlit(val))
    return a


@dataclass
class FtlrReport:
    name: str
    verdict: Verdict
    witness: ComputableTrajectory | None = None
    delta: ComplConfig | None = None
    derivation: TypingDerivation | None = None
    membership: Verdict | None = None
    judgment: GroundJudgment | None = None


def ftlr_check(name: str, td: TermDef, budget: CheckBudget,
               delta: ComplConfig | None = None) -> FtlrReport:
    """The witness pipeline for one program: ground, typecheck, build a
    complementary configuration, construct the witness, and verify the
    start equation, the trajectory invariants, and provider membership."""
    gj = ground_termdef(td)
    if gj is None:
        return FtlrReport(name, inconclusive("no satisfying valuation for the time variables"))
    deriv = typecheck(HypSet(), gj.ctx, gj.term, tlit(gj.at), gj.stype)
    if delta is None:
        delta = generate_compl(gj.ctx, gj.at, budget)
    if delta is None:
        return FtlrReport(name, inconclusive("no canonical environment for the context"))
    try:
        w = ftlr_witness(deriv, delta, budget)
    except FtlrBlocked as exc:
        return FtlrReport(name, inconclusive(f"witness construction blocked: {exc}"),
                          delta=delta, derivation=deriv, judgment=gj)
    expected = apply_compl(delta, nobj(apply_subst(subst_of(delta), gj.term)))
    if w.start != expected:
        return FtlrReport(name, fail("start equation violated"), w, delta, deriv, judgment=gj)
    probes = fresh_channels(w.names() | {c.name for c, _ in delta.values()}, 3, "z")
    if not validate_ct(w, probes):
        return FtlrReport(name, fail("witness fails trajectory validation"), w, delta, deriv,
                          judgment=gj)
    member = term_member(w, gj.stype, gj.at, NOSTAR, budget)
    verdict = member if not member.is_pass else PASS
    return FtlrReport(name, verdict, w, delta, deriv, member, gj)


def adequacy_check(name: str, td: TermDef, channel: str, budget: CheckBudget
                   ) -> AdequacyReport:
    gj = ground_termdef(td)
    if gj is None:
        return AdequacyReport(inconclusive("no satisfying valuation"))
    if gj.ctx:
        return AdequacyReport(inconclusive("program is not closed"))
    if gj.stype.kind != "one":
        return AdequacyReport(inconclusive("program is not unit-typed"))
    return adequacy(gj.term, gj.stype, Channel(channel), gj.at, budget)
