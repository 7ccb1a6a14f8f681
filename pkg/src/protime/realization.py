"""Certificates tying a trajectory to the multistep that produces it.

A realization derivation mirrors the multistep it certifies: a constant
trajectory is realized by reflexivity, a backwards time extension by the
idle rule, and a silent step leaves the trajectory untouched while the
multistep grows.  The trajectory records the most reduced form, so its
value at the start need not be the multistep's start configuration, and
the multistep may stop strictly before the trajectory's horizon.

Every node stores the trajectory/multistep pair it relates, so validation
is a local rule check per node plus one multistep validation at the root.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lts import (
    ComposeError,
    Configuration,
    MultistepCert,
    StepCert,
    ms_refl,
    ms_stepC,
    ms_stepT,
    step_frame,
    validate_multistep,
)
from .timebase import FinTime, Time, fin, le, lt
from .trajectory import Trajectory, const_traj, extend_traj


@dataclass(frozen=True)
class RealizationCert:
    """kind is "refl", "stepT" or "stepC"; ``s``/``sigma`` are the subject
    pair of this node, stored redundantly for O(1) local checks."""

    kind: str
    s: Trajectory
    sigma: MultistepCert
    sub: "RealizationCert | None" = None
    ext_time: FinTime | None = None        # stepT extension point
    pre_cfg: Configuration | None = None   # stepC source configuration


def r_refl(cfg: Configuration, lo: Time | FinTime, hi: Time | FinTime) -> RealizationCert:
    lo_t = fin(lo) if isinstance(lo, int) else lo
    return RealizationCert("refl", const_traj(cfg, lo_t, hi), ms_refl(cfg, lo_t.finite()))


def r_stepT(sub: RealizationCert, t: FinTime) -> RealizationCert:
    """Extend the realized trajectory backwards to ``t``, idling on the
    multistep's start configuration."""
    base = sub.sigma.start_cfg
    s = extend_traj(base, t, sub.s)
    sigma = ms_stepT(base, t, sub.sigma.start_time, sub.sigma)
    return RealizationCert("stepT", s, sigma, sub=sub, ext_time=t)


def r_stepC(sub: RealizationCert, step: StepCert) -> RealizationCert:
    """Prepend an instant silent step; the trajectory is unchanged."""
    sigma = ms_stepC(step, sub.sigma)
    return RealizationCert("stepC", sub.s, sigma, sub=sub, pre_cfg=step.source)


def _check_node(r: RealizationCert) -> bool:
    s, sigma = r.s, r.sigma
    if s.lo.is_infinite or fin(sigma.start_time) != s.lo:
        return False
    if r.kind == "refl":
        if sigma.kind != "refl" or len(s.segments) != 1:
            return False
        return s.segments[0][1] == sigma.cfg
    if r.kind == "stepT":
        if sigma.kind != "stepT" or r.sub is None:
            return False
        if r.ext_time != sigma.time or r.sub.sigma != sigma.tail:
            return False
        sub_s = r.sub.s
        if fin(sigma.time2) != sub_s.lo or sub_s.hi != s.hi:
            return False
        if sigma.time > sigma.time2:
            return False
        return s == extend_traj(sigma.cfg, sigma.time, sub_s)
    if r.kind == "stepC":
        if sigma.kind != "stepC" or r.sub is None:
            return False
        if r.pre_cfg != sigma.step.source or r.sub.sigma != sigma.tail:
            return False
        return r.sub.s == s
    return False


def validate_realization(r: RealizationCert) -> bool:
    """Structural check of the derivation plus multistep validity."""
    if not validate_multistep(r.sigma):
        return False
    node: RealizationCert | None = r
    while node is not None:
        if not _check_node(node):
            return False
        node = node.sub
    return True


def realized_implies_lt(r: RealizationCert) -> bool:
    """The two strict-advance facts of valid realizations: the realized
    interval is nonempty, and the multistep starts strictly below the
    trajectory's horizon."""
    return lt(r.s.lo, r.s.hi) and lt(fin(r.sigma.start_time), r.s.hi)


def realize_multistep(sigma: MultistepCert, hi: Time) -> RealizationCert:
    """Canonical realization of a valid multistep, with horizon ``hi``
    (which must lie strictly beyond the multistep's end time)."""
    if sigma.kind == "refl":
        return r_refl(sigma.cfg, sigma.time, hi)
    if sigma.kind == "stepT":
        return r_stepT(realize_multistep(sigma.tail, hi), sigma.time)
    return r_stepC(realize_multistep(sigma.tail, hi), sigma.step)


# ---------------------------------------------------------------------------
# admissible operations


def r_frame(r: RealizationCert, frame: Configuration) -> RealizationCert:
    """Realize the framed multistep against the pointwise-framed trajectory."""
    if r.kind == "refl":
        cfg = r.sigma.cfg.union(frame)
        return RealizationCert("refl", const_traj(cfg, r.s.lo, r.s.hi),
                               ms_refl(cfg, r.sigma.time))
    if r.kind == "stepT":
        return r_stepT(r_frame(r.sub, frame), r.ext_time)
    return r_stepC(r_frame(r.sub, frame), step_frame(r.sigma.step, frame))


def r_concat(r1: RealizationCert, r2: RealizationCert) -> RealizationCert:
    """Realize the concatenated trajectory against the chained multistep."""
    if r1.s.hi != r2.s.lo:
        raise ComposeError(f"trajectory endpoints differ: {r1.s.hi!r} vs {r2.s.lo!r}")
    if r1.sigma.end_cfg != r2.sigma.start_cfg:
        raise ComposeError("multistep endpoint configurations differ")
    if r1.sigma.end_time > r2.sigma.start_time:
        raise ComposeError("multistep times overlap")
    if r1.kind == "refl":
        # the first piece is constant at the second's start configuration
        return r_stepT(r2, r1.sigma.time)
    if r1.kind == "stepT":
        return r_stepT(r_concat(r1.sub, r2), r1.ext_time)
    return r_stepC(r_concat(r1.sub, r2), r1.sigma.step)


def _strip_instant(r: RealizationCert) -> tuple[list[StepCert], RealizationCert]:
    """Peel the leading silent steps of a realization (all at its start
    time), returning them with the remainder."""
    if r.kind == "stepC":
        at, rest = _strip_instant(r.sub)
        return [r.sigma.step] + at, rest
    return [], r


def _split(r: RealizationCert, cut: FinTime
           ) -> tuple[RealizationCert | None, list[StepCert], RealizationCert]:
    if r.kind == "refl":
        t = r.sigma.time
        before = r_refl(r.sigma.cfg, t, cut) if cut > t else None
        return before, [], r_refl(r.sigma.cfg, cut, r.s.hi)
    if r.kind == "stepT":
        t1, t2 = r.sigma.time, r.sigma.time2
        if cut < t2:
            before = r_refl(r.sigma.cfg, t1, cut) if cut > t1 else None
            return before, [], r_stepT(r.sub, cut)
        if cut == t2:
            before = r_refl(r.sigma.cfg, t1, cut) if cut > t1 else None
            at, after = _strip_instant(r.sub)
            return before, at, after
        b, at, after = _split(r.sub, cut)
        return r_stepT(b, t1), at, after
    # stepC: the step happens at the subject's start time
    if cut == r.sigma.start_time:
        at, after = _strip_instant(r)
        return None, at, after
    b, at, after = _split(r.sub, cut)
    return r_stepC(b, r.sigma.step), at, after


def r_partition(r: RealizationCert, t2: Time | FinTime
                ) -> tuple[RealizationCert, list[StepCert], RealizationCert]:
    """Split a realization at ``t2`` into a before part over [lo, t2) and
    an after part over [t2, hi).

    Silent steps at exactly ``t2`` fall in neither piece: the before
    multistep stops at the value just below the cut, the after one starts
    at the sample at the cut.  They are returned in the middle so callers
    composing around the cut can re-thread them.
    """
    t2_t = fin(t2) if isinstance(t2, int) else t2
    if not (lt(r.s.lo, t2_t) and lt(t2_t, r.s.hi)):
        raise ComposeError(f"partition point {t2_t!r} outside ({r.s.lo!r}, {r.s.hi!r})")
    before, at, after = _split(r, t2_t.finite())
    assert before is not None
    return before, at, after


def r_partition_after(r: RealizationCert, t2: Time | FinTime
                      ) -> tuple[list[StepCert], RealizationCert]:
    """The after part alone; the cut may also sit exactly at the start."""
    t2_t = fin(t2) if isinstance(t2, int) else t2
    if not (le(r.s.lo, t2_t) and lt(t2_t, r.s.hi)):
        raise ComposeError(f"partition point {t2_t!r} outside [{r.s.lo!r}, {r.s.hi!r})")
    _, at, after = _split(r, t2_t.finite())
    return at, after


def r_interleave(r1: RealizationCert, r2: RealizationCert) -> RealizationCert:
    """Realize the pointwise interleaving of two same-interval subjects
    against the interleaved multistep, via the two mutually recursive
    one-sided constructions dispatched on the start-time comparison."""
    if r1.s.lo != r2.s.lo or r1.s.hi != r2.s.hi:
        raise ComposeError("interleave needs a shared subject interval")
    return _rint(r1, r2)


def _rint(r1: RealizationCert, r2: RealizationCert) -> RealizationCert:
    if r1.sigma.start_time <= r2.sigma.start_time:
        return _rint_l(r1, r2)
    return _rint_r(r1, r2)


def _rint_l(r1: RealizationCert, r2: RealizationCert) -> RealizationCert:
    # r1 starts first: peel it, framing r2's start configuration through.
    if r1.kind == "refl":
        return r_stepT(r_frame(r2, r1.sigma.cfg), r1.sigma.time)
    if r1.kind == "stepT":
        return r_stepT(_rint(r1.sub, r2), r1.sigma.time)
    framed = step_frame(r1.sigma.step, r2.sigma.start_cfg)
    return r_stepC(_rint_l(r1.sub, r2), framed)


def _rint_r(r1: RealizationCert, r2: RealizationCert) -> RealizationCert:
    if r2.kind == "refl":
        return r_stepT(r_frame(r1, r2.sigma.cfg), r2.sigma.time)
    if r2.kind == "stepT":
        return r_stepT(_rint(r1, r2.sub), r2.sigma.time)
    framed = step_frame(r2.sigma.step, r1.sigma.start_cfg)
    return r_stepC(_rint_r(r1, r2.sub), framed)
