"""The certification service: every toolkit operation behind one endpoint.

All state lives in the request; identical requests produce identical
responses, so the service can sit behind any number of clients.
"""

from __future__ import annotations

import os

from fastapi import FastAPI

from .. import corpus
from ..computable import validate_ct
from ..harness import ftlr_check, ground_termdef
from ..lts import Channel, fresh_channels, proc
from ..multiset import FMSet
from ..proclang import ProtocolTypeError, nobj, typecheck, validate_derivation
from ..runner import multistep_of_run, ready_actions, run_silent, state_at, stuck_report
from ..semantics import NOSTAR, STAR, CheckBudget, term_member
from ..serialize import (
    cfg_to_json,
    ct_from_json,
    ct_to_json,
    multistep_to_json,
    traj_to_json,
)
from ..sessiontypes import HypSet, retype_cut_reason, retype_fwd_reason, satisfiable_beyond, satisfying_times
from ..syntax import ParseError, parse_spec, parse_time_expr, parse_type
from ..timebase import fin
from ..trajectory import make_traj
from .models import (
    EXIT_FAIL,
    EXIT_INCONCLUSIVE,
    EXIT_PASS,
    EXIT_USAGE,
    CheckRequest,
    CheckResponse,
    RetypeRequest,
    RetypeResponse,
    RunRequest,
    RunResponse,
    SemcheckRequest,
    SemcheckResponse,
    TermReport,
    ValidateRequest,
    ValidateResponse,
    WitnessRequest,
    WitnessResponse,
    exit_of_status,
)

DEFAULT_HORIZON = 50


def default_horizon() -> int:
    return int(os.environ.get("PROTIME_HORIZON", DEFAULT_HORIZON))


def _budget(horizon: int | None) -> CheckBudget:
    return CheckBudget(horizon=horizon if horizon is not None else default_horizon())


def create_app() -> FastAPI:
    app = FastAPI(title="protime", description="timed protocol certification service")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/corpus")
    def corpus_index() -> list[str]:
        return corpus.corpus_names()

    @app.get("/corpus/{name}")
    def corpus_entry(name: str) -> dict:
        return {"name": name, "source": corpus.corpus_text(name)}

    @app.post("/check", response_model=CheckResponse)
    def check(req: CheckRequest) -> CheckResponse:
        try:
            spec = parse_spec(req.source)
        except ParseError as exc:
            return CheckResponse(exit_code=EXIT_USAGE, error=str(exc))
        reports: list[TermReport] = []
        ok_all = True
        for name, td in spec.terms.items():
            try:
                deriv = typecheck(td.hyp, td.ctx, td.term, td.at, td.stype)
                reports.append(TermReport(name=name, ok=True, rule=deriv.rule,
                                          revalidated=validate_derivation(deriv)))
            except ProtocolTypeError as exc:
                ok_all = False
                reports.append(TermReport(name=name, ok=False,
                                          category=exc.category, error=str(exc)))
        return CheckResponse(exit_code=EXIT_PASS if ok_all else EXIT_FAIL, reports=reports)

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        try:
            spec = parse_spec(req.source)
            td = _pick_term(spec, req.name)
        except (ParseError, LookupError) as exc:
            return RunResponse(exit_code=EXIT_USAGE, error=str(exc))
        gj = ground_termdef(td)
        if gj is None or gj.ctx:
            return RunResponse(exit_code=EXIT_USAGE,
                               error="run needs a closed, ground program")
        try:
            typecheck(HypSet(), {}, gj.term, _lit(gj.at), gj.stype)
        except ProtocolTypeError as exc:
            return RunResponse(exit_code=EXIT_FAIL, error=f"does not typecheck: {exc}")
        horizon = req.horizon if req.horizon is not None else default_horizon()
        ch = Channel(req.channel)
        result = run_silent(FMSet.of(proc(ch, nobj(gj.term))), gj.at, horizon)
        sigma = multistep_of_run(result)
        executed = make_traj(fin(result.start_time), fin(horizon + 1), result.timeline)
        ready = {
            t: [repr(a) for a in ready_actions(state_at(result, t), t)]
            for t in range(gj.at, horizon + 1)
            if ready_actions(state_at(result, t), t)
        }
        trace = {
            "multistep": multistep_to_json(sigma),
            "trajectory": traj_to_json(executed, nameless=False),
            "final": cfg_to_json(result.final_cfg),
        }
        diagnosis = stuck_report(result)
        exit_code = EXIT_PASS
        if gj.stype.kind == "one":
            an = gj.stype.annot
            want = [u for u in satisfying_times(an.pred, an.binder, 0, horizon) if u >= gj.at]
            close = f"{req.channel}!()"
            missing = [u for u in want if close not in ready.get(u, [])]
            if missing:
                exit_code = EXIT_FAIL
                diagnosis.append(f"not ready to close at satisfying instants {missing}")
            elif satisfiable_beyond(an.pred, an.binder, horizon) is not None:
                exit_code = EXIT_INCONCLUSIVE
                diagnosis.append("closing obligations extend beyond the horizon")
        return RunResponse(exit_code=exit_code, trace=trace, ready=ready, diagnosis=diagnosis)

    @app.post("/witness", response_model=WitnessResponse)
    def witness(req: WitnessRequest) -> WitnessResponse:
        try:
            spec = parse_spec(req.source)
            td = _pick_term(spec, req.name)
        except (ParseError, LookupError) as exc:
            return WitnessResponse(exit_code=EXIT_USAGE, error=str(exc))
        try:
            rep = ftlr_check(td.name, td, _budget(req.horizon))
        except ProtocolTypeError as exc:
            return WitnessResponse(exit_code=EXIT_FAIL, error=f"does not typecheck: {exc}")
        if rep.witness is None:
            return WitnessResponse(exit_code=exit_of_status(rep.verdict.status),
                                   trail=list(rep.verdict.trail))
        return WitnessResponse(exit_code=exit_of_status(rep.verdict.status),
                               certificate=ct_to_json(rep.witness),
                               trail=list(rep.verdict.trail))

    @app.post("/validate", response_model=ValidateResponse)
    def validate(req: ValidateRequest) -> ValidateResponse:
        try:
            w = ct_from_json(req.certificate)
        except (ValueError, KeyError, TypeError) as exc:
            return ValidateResponse(exit_code=EXIT_FAIL,
                                    detail=f"certificate malformed: {exc}")
        probes = fresh_channels(w.names(), 3, "p")
        ok = validate_ct(w, probes)
        return ValidateResponse(exit_code=EXIT_PASS if ok else EXIT_FAIL,
                                detail="certificate valid" if ok else "certificate invalid")

    @app.post("/semcheck", response_model=SemcheckResponse)
    def semcheck(req: SemcheckRequest) -> SemcheckResponse:
        try:
            w = ct_from_json(req.certificate)
            a = parse_type(req.type)
            mode = {"star": STAR, "nostar": NOSTAR}[req.mode]
        except (ValueError, KeyError, TypeError) as exc:
            return SemcheckResponse(exit_code=EXIT_USAGE, verdict="error", error=str(exc))
        verdict = term_member(w, a, req.time, mode, _budget(req.horizon))
        return SemcheckResponse(exit_code=exit_of_status(verdict.status),
                                verdict=verdict.status, trail=list(verdict.trail))

    @app.post("/retype", response_model=RetypeResponse)
    def retype(req: RetypeRequest) -> RetypeResponse:
        try:
            style, a, b, t = _parse_retype_query(req.query)
        except (ParseError, ValueError) as exc:
            return RetypeResponse(exit_code=EXIT_USAGE, error=str(exc))
        reason = (retype_cut_reason if style == "cut" else retype_fwd_reason)(
            HypSet(), a, b, t)
        return RetypeResponse(exit_code=EXIT_PASS if reason is None else EXIT_FAIL,
                              holds=reason is None, reason=reason)

    return app


def _pick_term(spec, name: str | None):
    if name is not None:
        if name not in spec.terms:
            raise LookupError(f"no term named {name!r}")
        return spec.terms[name]
    if spec.runs:
        run = spec.runs[0]
        if run.name in spec.terms:
            return spec.terms[run.name]
    if len(spec.terms) == 1:
        return next(iter(spec.terms.values()))
    raise LookupError("several terms defined; pick one with name=...")


def _lit(t: int):
    from ..sessiontypes import tlit
    return tlit(t)


def _parse_retype_query(query: str):
    # "A <| B @ T" is the cut relation, "A |> B @ T" the forwarding one
    if "<|" in query:
        style, sep = "cut", "<|"
    elif "|>" in query:
        style, sep = "fwd", "|>"
    else:
        raise ValueError("query must contain <| or |>")
    left, rest = query.split(sep, 1)
    if "@" not in rest:
        raise ValueError("query must end with @ time")
    right, at = rest.rsplit("@", 1)
    return style, parse_type(left.strip()), parse_type(right.strip()), \
        parse_time_expr(at.strip())


app = create_app()
