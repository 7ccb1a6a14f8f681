"""Shared randomized generators for the test suite.

Everything is seeded; the scripted-device language supplies cheap real
objects whose steps validate, so generated certificates are genuine.
"""

from __future__ import annotations

import random

import protime  # noqa: F401  (registers languages)
from protime.devices import Script
from protime.lts import (
    Channel,
    Configuration,
    MultistepCert,
    NamelessObj,
    fwd,
    ms_refl,
    ms_stepC,
    ms_stepT,
    proc,
    silent_steps,
)
from protime.multiset import FMSet
from protime.realization import RealizationCert, realize_multistep
from protime.timebase import INFINITY, Time, fin
from protime.trajectory import Trajectory, make_traj


def rng(seed: int) -> random.Random:
    return random.Random(seed)


def random_script(r: random.Random, max_events: int = 3) -> NamelessObj:
    events = []
    t = r.randint(0, 4)
    for _ in range(r.randint(0, max_events)):
        lo = t + r.randint(0, 2)
        hi = lo + r.randint(0, 3)
        events.append(("tick", lo, hi))
        t = lo
    return NamelessObj("device", Script(tuple(events)))


def random_cfg(r: random.Random, max_procs: int = 3) -> Configuration:
    atoms = []
    names = ["a", "b", "c", "d", "e"]
    r.shuffle(names)
    for i in range(r.randint(1, max_procs)):
        atoms.append(proc(Channel(names[i]), random_script(r)))
    if r.random() < 0.3 and atoms:
        inner = atoms[0].provider
        atoms.append(fwd(Channel(names[max_procs]), inner))
    return FMSet(atoms)


def random_multistep(r: random.Random, depth: int = 6) -> MultistepCert:
    """A valid certificate built by a random walk over device configs."""
    cfg = random_cfg(r)
    t0 = r.randint(0, 5)
    events: list[tuple[int, object]] = []
    current, t = cfg, t0
    final_t = t0
    for _ in range(depth):
        steps = silent_steps(current, t)
        if steps and r.random() < 0.65:
            _, target, cert = steps[r.randrange(len(steps))]
            events.append((t, cert))
            current = target
            final_t = t
        else:
            t += r.randint(1, 3)
            if t > 20:
                break
    # assemble backwards; idle segments become time extensions
    sigma = ms_refl(current, final_t)
    for when, cert in reversed(events):
        if sigma.start_time > when:
            sigma = ms_stepT(cert.target, when, sigma.start_time, sigma)
        sigma = ms_stepC(cert, sigma)
    if sigma.start_time > t0:
        sigma = ms_stepT(cfg, t0, sigma.start_time, sigma)
    # sometimes stretch the tail
    if r.random() < 0.4:
        from protime.lts import ms_stepTR
        sigma = ms_stepTR(sigma, sigma.end_time + r.randint(1, 3))
    return sigma


def random_realization(r: random.Random, depth: int = 6) -> RealizationCert:
    sigma = random_multistep(r, depth)
    hi: Time = INFINITY if r.random() < 0.5 else fin(sigma.end_time + r.randint(1, 5))
    return realize_multistep(sigma, hi)


_MARKERS = [FMSet(), FMSet.of(proc(Channel("m"), NamelessObj("device", Script(())))),
            FMSet.of(proc(Channel("n"), NamelessObj("device", Script((("tick", 0, 9),))))),
            FMSet.of(proc(Channel("m"), NamelessObj("device", Script(()))),
                     proc(Channel("n"), NamelessObj("device", Script((("tick", 0, 9),)))))]


def random_value(r: random.Random) -> Configuration:
    return _MARKERS[r.randrange(len(_MARKERS))]


def random_traj(r: random.Random, lo: int | None = None, hi: Time | None = None,
                max_segments: int = 6) -> Trajectory:
    lo = r.randint(0, 10) if lo is None else lo
    if hi is None:
        hi = INFINITY if r.random() < 0.3 else fin(lo + r.randint(2, 40))
    n = r.randint(1, max_segments)
    starts = sorted(r.sample(range(lo, lo + 41), n))
    starts[0] = lo
    if hi.is_finite:
        starts = [s for s in starts if s < hi.finite()]
        if not starts:
            starts = [lo]
    segments = [(s, random_value(r)) for s in sorted(set(starts))]
    return make_traj(fin(lo), hi, segments)
