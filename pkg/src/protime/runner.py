"""Deterministic execution of configurations.

The scheduler policy: at the current instant, fire silent steps
exhaustively in canonical order; then advance time to the earliest
instant within the horizon at which any silent step becomes enabled.
The run is recorded as (time, step certificate) events from which a
multistep certificate and the executed piecewise trajectory follow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lts import (
    Action,
    Configuration,
    MultistepCert,
    StepCert,
    cfg_names,
    enabled_steps,
    fresh_channel,
    ms_refl,
    ms_stepC,
    ms_stepT,
    silent_steps,
)
from .timebase import FinTime


@dataclass
class RunResult:
    start_cfg: Configuration
    start_time: FinTime
    events: list[tuple[FinTime, StepCert]]
    final_cfg: Configuration
    final_time: FinTime
    horizon: FinTime
    # configuration snapshots after exhausting each instant with activity
    timeline: list[tuple[FinTime, Configuration]] = field(default_factory=list)


def run_silent(cfg: Configuration, t0: FinTime, horizon: FinTime,
               avoid: frozenset[str] = frozenset()) -> RunResult:
    """Run the canonical silent schedule from (cfg, t0) up to the horizon."""
    used = set(cfg_names(cfg)) | set(avoid)
    events: list[tuple[FinTime, StepCert]] = []
    timeline: list[tuple[FinTime, Configuration]] = [(t0, cfg)]
    t = t0
    current = cfg
    while True:
        fired = False
        while True:
            steps = silent_steps(current, t, avoid=used)
            if not steps:
                break
            _, target, cert = steps[0]
            events.append((t, cert))
            current = target
            used |= cfg_names(current)
            fired = True
        if fired:
            if timeline[-1][0] == t:
                timeline[-1] = (t, current)
            else:
                timeline.append((t, current))
        # advance to the next instant with an enabled silent step
        nxt = None
        for cand in range(t + 1, horizon + 1):
            if silent_steps(current, cand, avoid=used):
                nxt = cand
                break
        if nxt is None:
            return RunResult(cfg, t0, events, current, t, horizon, timeline)
        t = nxt


def multistep_of_run(run: RunResult) -> MultistepCert:
    """Assemble the certificate for a recorded run."""
    sigma = ms_refl(run.final_cfg, run.final_time)
    for t, cert in reversed(run.events):
        if sigma.start_time > t:
            sigma = ms_stepT(cert.target, t, sigma.start_time, sigma)
        sigma = ms_stepC(cert, sigma)
    if sigma.start_time > run.start_time:
        sigma = ms_stepT(run.start_cfg, run.start_time, sigma.start_time, sigma)
    return sigma


def state_at(run: RunResult, t: FinTime) -> Configuration:
    """The configuration the run holds at instant ``t`` (post-activity)."""
    best = run.start_cfg
    for when, cfg in run.timeline:
        if when <= t:
            best = cfg
        else:
            break
    return best


def ready_actions(cfg: Configuration, time: FinTime) -> list[Action]:
    """External communication offers of a configuration at an instant.

    Receive-a-channel readiness only shows up against a candidate
    payload, so one fresh probe channel is supplied.
    """
    probe = fresh_channel(cfg_names(cfg), "probe")
    offers = {
        repr(a): a
        for a, _, _ in enabled_steps(cfg, time, chan_candidates=[probe])
        if not a.is_silent
    }
    return sorted(offers.values(), key=repr)


def stuck_report(run: RunResult) -> list[str]:
    """Describe what the final configuration is waiting for, if anything."""
    notes: list[str] = []
    if run.final_cfg.is_empty():
        return notes
    offers_now = ready_actions(run.final_cfg, run.final_time)
    if offers_now:
        notes.append(
            f"at t={run.final_time} offering: " + ", ".join(repr(a) for a in offers_now))
    future = []
    for cand in range(run.final_time + 1, run.horizon + 1):
        acts = ready_actions(run.final_cfg, cand)
        if acts:
            future.append((cand, acts))
            break
    for cand, acts in future:
        notes.append(f"next offers at t={cand}: " + ", ".join(repr(a) for a in acts))
    if not offers_now and not future:
        notes.append(
            f"no offers enabled in [{run.final_time}, {run.horizon}]: "
            f"{len(run.final_cfg)} process(es) stuck before any deadline in range")
    return notes
