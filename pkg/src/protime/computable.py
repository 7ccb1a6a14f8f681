"""Computable trajectories: a nameless trajectory bundled, per channel,
with the multistep that produces it and the realization tying the two.

The per-channel family is represented as one channel-parametric template
built over the reserved hole channel; supplying a concrete channel means
renaming the hole throughout.  Templates never branch on the hole name,
so behaviour is uniform in the channel and finite probing is sound.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lts import (
    HOLE,
    Action,
    Channel,
    ComposeError,
    Configuration,
    MultistepCert,
    NamelessConfiguration,
    StepCert,
    cfg_names,
    instantiate,
    ncfg_names,
    ncfg_union,
    rename_action,
    rename_cfg,
    rename_channel,
    rename_obj,
    step_comm,
)
from .realization import (
    RealizationCert,
    r_concat,
    r_frame,
    r_interleave,
    r_partition,
    r_partition_after,
    r_refl,
    r_stepC,
    realize_multistep,
    validate_realization,
)
from .runner import multistep_of_run, run_silent
from .timebase import INFINITY, FinTime, Time, fin, le, lt
from .trajectory import (
    NamelessTrajectory,
    concat_traj,
    const_traj,
    instantiate_traj,
    interleave_named_nameless,
    make_traj,
    partition_after,
    partition_before,
    rename_traj,
)

# ---------------------------------------------------------------------------
# renaming of certificates (template evaluation)


def rename_step_cert(c: StepCert, mapping: dict[str, str]) -> StepCert:
    return StepCert(
        c.kind,
        rename_action(c.action, mapping),
        c.time,
        rename_cfg(c.source, mapping),
        rename_cfg(c.target, mapping),
        obj_provider=None if c.obj_provider is None else rename_channel(c.obj_provider, mapping),
        obj_body=None if c.obj_body is None else rename_obj(c.obj_body, mapping),
        inner=None if c.inner is None else rename_step_cert(c.inner, mapping),
        frame=None if c.frame is None else rename_cfg(c.frame, mapping),
        fwd_outer=None if c.fwd_outer is None else rename_channel(c.fwd_outer, mapping),
        fwd_inner=None if c.fwd_inner is None else rename_channel(c.fwd_inner, mapping),
        fwd_body=None if c.fwd_body is None else rename_obj(c.fwd_body, mapping),
        send_part=None if c.send_part is None else rename_step_cert(c.send_part, mapping),
        recv_part=None if c.recv_part is None else rename_step_cert(c.recv_part, mapping),
    )


def rename_multistep(m: MultistepCert, mapping: dict[str, str]) -> MultistepCert:
    return MultistepCert(
        m.kind,
        cfg=None if m.cfg is None else rename_cfg(m.cfg, mapping),
        time=m.time,
        time2=m.time2,
        step=None if m.step is None else rename_step_cert(m.step, mapping),
        tail=None if m.tail is None else rename_multistep(m.tail, mapping),
    )


def rename_realization(r: RealizationCert, mapping: dict[str, str]) -> RealizationCert:
    return RealizationCert(
        r.kind,
        rename_traj(r.s, mapping, nameless=False),
        rename_multistep(r.sigma, mapping),
        sub=None if r.sub is None else rename_realization(r.sub, mapping),
        ext_time=r.ext_time,
        pre_cfg=None if r.pre_cfg is None else rename_cfg(r.pre_cfg, mapping),
    )


def step_cert_names(c: StepCert) -> frozenset[str]:
    return cfg_names(c.source) | cfg_names(c.target)


def multistep_names(m: MultistepCert) -> frozenset[str]:
    out: frozenset[str] = frozenset()
    node: MultistepCert | None = m
    while node is not None:
        if node.cfg is not None:
            out |= cfg_names(node.cfg)
        if node.step is not None:
            out |= step_cert_names(node.step)
        node = node.tail
    return out


# ---------------------------------------------------------------------------
# the computable trajectory structure


@dataclass(frozen=True)
class ComputableTrajectory:
    """Interval, nameless endpoints and trajectory, plus the per-channel
    template: a realization whose multistep runs from start[hole] at lo
    to end[hole] at step_to."""

    lo: Time
    hi: Time
    start: NamelessConfiguration
    end: NamelessConfiguration
    ntraj: NamelessTrajectory
    realize_template: RealizationCert

    @property
    def steps_template(self) -> MultistepCert:
        return self.realize_template.sigma

    @property
    def step_to(self) -> FinTime:
        return self.steps_template.end_time

    def realize(self, a: Channel) -> RealizationCert:
        return rename_realization(self.realize_template, {HOLE.name: a.name})

    def steps(self, a: Channel) -> MultistepCert:
        return rename_multistep(self.steps_template, {HOLE.name: a.name})

    def sample(self, t: Time | FinTime) -> NamelessConfiguration:
        return self.ntraj.sample(t)

    def names(self) -> frozenset[str]:
        base = ncfg_names(self.start) | ncfg_names(self.end)
        for _, v in self.ntraj.segments:
            base |= ncfg_names(v)
        base |= multistep_names(self.steps_template)
        return base - {HOLE.name}


def validate_ct(w: ComputableTrajectory, probe_channels: list[Channel]) -> bool:
    """Check, per fresh probe channel, the endpoint equations and the
    realization of the instantiated trajectory."""
    if not probe_channels:
        raise ValueError("need at least one probe channel")
    taken = w.names()
    if w.ntraj.lo != w.lo or w.ntraj.hi != w.hi:
        return False
    for a in probe_channels:
        if a.name in taken or a == HOLE:
            raise ValueError(f"probe channel {a!r} is not fresh for this trajectory")
        r = w.realize(a)
        if not validate_realization(r):
            return False
        sigma = r.sigma
        if sigma.start_cfg != instantiate(w.start, a) or sigma.start_time != w.lo.finite():
            return False
        if sigma.end_cfg != instantiate(w.end, a):
            return False
        if w.hi.is_finite and not le(fin(sigma.end_time), w.hi):
            return False
        if r.s != instantiate_traj(w.ntraj, a):
            return False
    return True


# ---------------------------------------------------------------------------
# constructors


def ct_refl(nc: NamelessConfiguration, lo: Time | FinTime, hi: Time | FinTime
            ) -> ComputableTrajectory:
    lo_t = fin(lo) if isinstance(lo, int) else lo
    hi_t = fin(hi) if isinstance(hi, int) else hi
    ntraj = const_traj(nc, lo_t, hi_t)
    template = r_refl(instantiate(nc, HOLE), lo_t, hi_t)
    return ComputableTrajectory(lo_t, hi_t, nc, nc, ntraj, template)


def ct_concat(w1: ComputableTrajectory, w2: ComputableTrajectory) -> ComputableTrajectory:
    if w1.hi != w2.lo:
        raise ComposeError(f"interval mismatch: {w1.hi!r} vs {w2.lo!r}")
    if w1.end != w2.start:
        raise ComposeError("concat needs end(w1) = start(w2)")
    template = r_concat(w1.realize_template, w2.realize_template)
    return ComputableTrajectory(
        w1.lo, w2.hi, w1.start, w2.end,
        concat_traj(w1.ntraj, w2.ntraj), template,
    )


def _ct_instant(source: NamelessConfiguration, target: NamelessConfiguration,
                step_template: StepCert, hi: Time | FinTime) -> ComputableTrajectory:
    """A single silent step at its own time, then constant to ``hi``."""
    hi_t = fin(hi) if isinstance(hi, int) else hi
    t = step_template.time
    if not step_template.action.is_silent:
        raise ComposeError("instant constructors need a silent step")
    if step_template.source != instantiate(source, HOLE):
        raise ComposeError("step source does not match the nameless source")
    if step_template.target != instantiate(target, HOLE):
        raise ComposeError("step target does not match the nameless target")
    if not lt(fin(t), hi_t):
        raise ComposeError("step time must lie below the horizon")
    template = r_stepC(r_refl(step_template.target, t, hi_t), step_template)
    return ComputableTrajectory(
        fin(t), hi_t, source, target, const_traj(target, fin(t), hi_t), template,
    )


def ct_step(source: NamelessConfiguration, target: NamelessConfiguration,
            step_template: StepCert, hi: Time | FinTime) -> ComputableTrajectory:
    """A uniform silent object step from source to target."""
    return _ct_instant(source, target, step_template, hi)


def _complementary(a: Action, b: Action) -> bool:
    return (not a.is_silent and not b.is_silent
            and a.channel == b.channel and a.payload == b.payload
            and a.side != b.side)


def ct_comm_recv(nc_pre: NamelessConfiguration, nc_post: NamelessConfiguration,
                 recv_template: StepCert, send_cert: StepCert,
                 hi: Time | FinTime) -> ComputableTrajectory:
    """Exchange where the nameless family receives and a named part sends."""
    if not _complementary(send_cert.action, recv_template.action):
        raise ComposeError(
            f"actions are not complementary: {send_cert.action!r} vs {recv_template.action!r}")
    comm = step_comm(send_cert, recv_template)
    source = ncfg_union(send_cert.source, nc_pre)
    target = ncfg_union(send_cert.target, nc_post)
    return _ct_instant(source, target, comm, hi)


def ct_comm_send(nc_pre: NamelessConfiguration, nc_post: NamelessConfiguration,
                 send_template: StepCert, recv_cert: StepCert,
                 hi: Time | FinTime) -> ComputableTrajectory:
    """Exchange where the nameless family sends and a named part receives."""
    if not _complementary(send_template.action, recv_cert.action):
        raise ComposeError(
            f"actions are not complementary: {send_template.action!r} vs {recv_cert.action!r}")
    comm = step_comm(send_template, recv_cert)
    source = ncfg_union(recv_cert.source, nc_pre)
    target = ncfg_union(recv_cert.target, nc_post)
    return _ct_instant(source, target, comm, hi)


def ct_frame(w: ComputableTrajectory, frame: Configuration) -> ComputableTrajectory:
    """Union an inert named configuration into every point of ``w``."""
    template = r_frame(w.realize_template, frame)
    ntraj = make_traj(w.ntraj.lo, w.ntraj.hi,
                      [(b, ncfg_union(frame, v)) for b, v in w.ntraj.segments])
    return ComputableTrajectory(
        w.lo, w.hi, ncfg_union(frame, w.start), ncfg_union(frame, w.end), ntraj, template,
    )


def ct_interleave(w1: ComputableTrajectory, w2: ComputableTrajectory,
                  a: Channel) -> ComputableTrajectory:
    """Run ``w1`` (fully named at ``a``) next to ``w2`` (which keeps the
    root): pointwise, the result samples to w1[t][a] joined with w2[t]."""
    if w1.lo != w2.lo or w1.hi != w2.hi:
        raise ComposeError("interleave needs matching intervals")
    if a == HOLE:
        raise ComposeError("cannot name a trajectory at the hole channel")
    named = instantiate_traj(w1.ntraj, a)
    ntraj = interleave_named_nameless(named, w2.ntraj)
    template = r_interleave(w1.realize(a), w2.realize_template)
    start = ncfg_union(instantiate(w1.start, a), w2.start)
    end = ncfg_union(instantiate(w1.end, a), w2.end)
    return ComputableTrajectory(w1.lo, w1.hi, start, end, ntraj, template)


def ct_frame_nameless(w: ComputableTrajectory, nc: NamelessConfiguration,
                      a: Channel) -> ComputableTrajectory:
    """Frame a constant nameless configuration around ``w`` named at ``a``."""
    return ct_interleave(w, ct_refl(nc, w.lo, w.hi), a)


def ct_partition_before(w: ComputableTrajectory, t2: Time | FinTime) -> ComputableTrajectory:
    """The part of ``w`` through ``t2`` inclusive (interval [lo, t2+1)),
    so its end is the sample at ``t2``; identity at t2 = infinity."""
    t2_t = fin(t2) if isinstance(t2, int) else t2
    if t2_t.is_infinite:
        return w
    if not w.hi.is_infinite:
        raise ComposeError("finite before-partitions need an unbounded trajectory")
    if lt(t2_t, w.lo):
        raise ComposeError(f"cut {t2_t!r} before start {w.lo!r}")
    cut = t2_t.finite() + 1
    before, _, _ = r_partition(w.realize_template, cut)
    return ComputableTrajectory(
        w.lo, fin(cut), w.start, w.ntraj.sample(t2_t),
        partition_before(w.ntraj, cut), before,
    )


def ct_partition_after(w: ComputableTrajectory, t2: Time | FinTime) -> ComputableTrajectory:
    """The part of ``w`` from ``t2`` on; it starts at the sample at ``t2``."""
    t2_t = fin(t2) if isinstance(t2, int) else t2
    if not (le(w.lo, t2_t) and lt(t2_t, w.hi)):
        raise ComposeError(f"cut {t2_t!r} outside [{w.lo!r}, {w.hi!r})")
    _, after = r_partition_after(w.realize_template, t2_t)
    return ComputableTrajectory(
        t2_t, w.hi, w.ntraj.sample(t2_t), w.end,
        partition_after(w.ntraj, t2_t), after,
    )


def ct_instant_steps_at(w: ComputableTrajectory, t: FinTime) -> list[StepCert]:
    """The silent steps of ``w``'s template occurring exactly at ``t``."""
    at, _ = r_partition_after(w.realize_template, t)
    return at


def ct_prepend_steps(w: ComputableTrajectory, steps: list[StepCert],
                     new_start: NamelessConfiguration) -> ComputableTrajectory:
    """Prepend instant silent steps at ``w``'s start time; the trajectory
    itself is unchanged, only the start configuration moves back."""
    if not steps:
        return w
    expected = instantiate(w.start, HOLE)
    for st in steps:
        if st.time != w.lo.finite():
            raise ComposeError("prepended steps must happen at the start instant")
        if not st.action.is_silent:
            raise ComposeError("prepended steps must be silent")
    for st, nxt in zip(steps, steps[1:]):
        if st.target != nxt.source:
            raise ComposeError("prepended steps do not thread")
    if steps[-1].target != expected:
        raise ComposeError("last prepended step must reach the trajectory start")
    if steps[0].source != instantiate(new_start, HOLE):
        raise ComposeError("first prepended step must leave the new start")
    template = w.realize_template
    for st in reversed(steps):
        template = r_stepC(template, st)
    return ComputableTrajectory(w.lo, w.hi, new_start, w.end, w.ntraj, template)


# ---------------------------------------------------------------------------
# canonical futures via the deterministic scheduler


def deinstantiate(cfg: Configuration, a: Channel) -> NamelessConfiguration:
    """Split off the object providing ``a`` as the root."""
    root = None
    for atom, _ in cfg.items():
        if atom.provider == a and not atom.is_fwd:
            root = atom
            break
    if root is None:
        raise ComposeError(f"no root object providing {a!r}")
    return NamelessConfiguration(cfg.remove_one(root), root.body)


def certify_future(nc: NamelessConfiguration, t0: FinTime, scan_horizon: FinTime,
                   avoid: frozenset[str] = frozenset()) -> ComputableTrajectory:
    """Run the canonical silent schedule of ``nc`` and package the result.

    The trajectory is faithful for internal activity up to the scan
    horizon and constant afterwards.  Freshly spawned channels also avoid
    ``avoid``, so futures built for disjoint parts of one system do not
    collide.
    """
    cfg0 = instantiate(nc, HOLE)
    run = run_silent(cfg0, t0, scan_horizon, avoid)
    sigma = multistep_of_run(run)
    template = realize_multistep(sigma, INFINITY)
    segments = [(t, deinstantiate(c, HOLE)) for t, c in run.timeline]
    ntraj = make_traj(fin(t0), INFINITY, segments)
    return ComputableTrajectory(
        fin(t0), INFINITY, nc, deinstantiate(run.final_cfg, HOLE), ntraj, template,
    )
