"""Timed labelled transition system over multisets of atomic processes.

Configurations are finite multisets of named processes.  Single steps are
recorded as derivation-tree certificates (object step, frame, forwarder
collapse, communication) so that downstream layers can re-check and
recurse on them; multisteps layer reflexivity, time extension and silent
steps on top.  The admissible operations (frame, concat, stepT-on-the-
right, interleave) build new certificates structurally.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Protocol, Sequence

from .multiset import FMSet
from .timebase import FinTime

# ---------------------------------------------------------------------------
# channels, payloads, actions


@dataclass(frozen=True)
class Channel:
    name: str

    def __repr__(self) -> str:
        return self.name


# Reserved placeholder channel used by channel-parametric templates.  The
# parser never produces it and fresh-name generation avoids it, so
# substituting a fresh probe channel for it can never capture.
HOLE = Channel("?hole")

FRESH_PREFIX = "%"


def fresh_channel(avoid: Iterable[str], hint: str = "c") -> Channel:
    """Deterministically pick a name outside ``avoid``.

    Generated names live in a namespace (prefix ``%``) disjoint from
    user-written channels, so runs are reproducible without a counter.
    """
    taken = set(avoid)
    i = 0
    while f"{FRESH_PREFIX}{hint}{i}" in taken:
        i += 1
    return Channel(f"{FRESH_PREFIX}{hint}{i}")


def fresh_channels(avoid: Iterable[str], n: int, hint: str = "c") -> list[Channel]:
    taken = set(avoid)
    out: list[Channel] = []
    for _ in range(n):
        ch = fresh_channel(taken, hint)
        taken.add(ch.name)
        out.append(ch)
    return out


class Side(Enum):
    SEND = "!"
    RECV = "?"

    def flip(self) -> "Side":
        return Side.RECV if self is Side.SEND else Side.SEND


@dataclass(frozen=True)
class Payload:
    """Selector (pi1/pi2), closing signal, or a channel name."""

    kind: str  # "sel" | "close" | "chan"
    sel: int | None = None
    chan: Channel | None = None

    def __repr__(self) -> str:
        if self.kind == "sel":
            return f"pi{self.sel}"
        if self.kind == "close":
            return "()"
        return repr(self.chan)


PAYLOAD_CLOSE = Payload("close")
PAYLOAD_PI1 = Payload("sel", sel=1)
PAYLOAD_PI2 = Payload("sel", sel=2)


def payload_chan(ch: Channel) -> Payload:
    return Payload("chan", chan=ch)


@dataclass(frozen=True)
class Action:
    """Either the silent action or (channel, direction, payload)."""

    channel: Channel | None = None
    side: Side | None = None
    payload: Payload | None = None

    @property
    def is_silent(self) -> bool:
        return self.channel is None

    def __repr__(self) -> str:
        if self.channel is None:
            return "eps"
        return f"{self.channel!r}{self.side.value}{self.payload!r}"


EPS = Action()


def act(channel: Channel, side: Side, payload: Payload) -> Action:
    return Action(channel, side, payload)


# ---------------------------------------------------------------------------
# process languages and atomic processes


@dataclass(frozen=True)
class NamelessObj:
    """A channel-polymorphic term tagged with its process language."""

    lang: str
    term: object

    def __repr__(self) -> str:
        return f"<{self.lang}:{self.term!r}>"


@dataclass(frozen=True)
class AtomicProc:
    """Named process: either a language object or a forwarder."""

    provider: Channel
    body: NamelessObj | None = None
    target: Channel | None = None  # set exactly for forwarders

    @property
    def is_fwd(self) -> bool:
        return self.target is not None

    def __repr__(self) -> str:
        if self.is_fwd:
            return f"fwd({self.provider!r}<-{self.target!r})"
        return f"proc({self.provider!r}, {self.body!r})"


def proc(provider: Channel, body: NamelessObj) -> AtomicProc:
    return AtomicProc(provider, body=body)


def fwd(provider: Channel, target: Channel) -> AtomicProc:
    return AtomicProc(provider, target=target)


Configuration = FMSet  # FMSet[AtomicProc]


@dataclass(frozen=True)
class NamelessConfiguration:
    """A configuration with a distinguished root object, not yet named."""

    rest: Configuration
    root: NamelessObj

    def __repr__(self) -> str:
        return f"({self.rest!r}, {self.root!r})"


def instantiate(nc: NamelessConfiguration, a: Channel) -> Configuration:
    return nc.rest.union(FMSet.of(proc(a, nc.root)))


def ncfg_union(extra: Configuration, nc: NamelessConfiguration) -> NamelessConfiguration:
    return NamelessConfiguration(extra.union(nc.rest), nc.root)


class ProcessLanguage(Protocol):
    """Interface a registered object language must implement.

    ``enumerate_steps`` drives execution; ``check_step`` decides whether a
    claimed transition is derivable, so certificates can be re-validated
    without trusting the enumerator.  Receive-a-channel transitions depend
    on the incoming name, so candidates are passed in by the matching
    layer.
    """

    lang_id: str

    def enumerate_steps(
        self,
        term: object,
        provider: Channel,
        time: FinTime,
        chan_candidates: Sequence[Channel],
        avoid: frozenset[str],
    ) -> list[tuple[Action, Configuration]]:
        ...

    def check_step(
        self,
        term: object,
        provider: Channel,
        action: Action,
        time: FinTime,
        target: Configuration,
    ) -> bool:
        ...

    def term_names(self, term: object) -> frozenset[str]:
        ...

    def rename_term(self, term: object, mapping: dict[str, str]) -> object:
        ...

    def show_term(self, term: object) -> str:
        ...

    def parse_term(self, text: str) -> object:
        ...


LANGUAGES: dict[str, ProcessLanguage] = {}


def register_language(lang: ProcessLanguage) -> None:
    LANGUAGES[lang.lang_id] = lang


def get_language(lang_id: str) -> ProcessLanguage:
    try:
        return LANGUAGES[lang_id]
    except KeyError:
        raise KeyError(f"unregistered process language: {lang_id}") from None


# ---------------------------------------------------------------------------
# names and renaming


def obj_names(obj: NamelessObj) -> frozenset[str]:
    return get_language(obj.lang).term_names(obj.term)


def atom_names(atom: AtomicProc) -> frozenset[str]:
    if atom.is_fwd:
        return frozenset({atom.provider.name, atom.target.name})
    return obj_names(atom.body) | {atom.provider.name}


def cfg_names(cfg: Configuration) -> frozenset[str]:
    out: frozenset[str] = frozenset()
    for atom, _ in cfg.items():
        out |= atom_names(atom)
    return out


def ncfg_names(nc: NamelessConfiguration) -> frozenset[str]:
    return cfg_names(nc.rest) | obj_names(nc.root)


def rename_channel(ch: Channel, mapping: dict[str, str]) -> Channel:
    return Channel(mapping.get(ch.name, ch.name))


def rename_obj(obj: NamelessObj, mapping: dict[str, str]) -> NamelessObj:
    return NamelessObj(obj.lang, get_language(obj.lang).rename_term(obj.term, mapping))


def rename_atom(atom: AtomicProc, mapping: dict[str, str]) -> AtomicProc:
    if atom.is_fwd:
        return fwd(rename_channel(atom.provider, mapping), rename_channel(atom.target, mapping))
    return proc(rename_channel(atom.provider, mapping), rename_obj(atom.body, mapping))


def rename_cfg(cfg: Configuration, mapping: dict[str, str]) -> Configuration:
    return cfg.map(lambda a: rename_atom(a, mapping))


def rename_ncfg(nc: NamelessConfiguration, mapping: dict[str, str]) -> NamelessConfiguration:
    return NamelessConfiguration(rename_cfg(nc.rest, mapping), rename_obj(nc.root, mapping))


def rename_payload(p: Payload, mapping: dict[str, str]) -> Payload:
    if p.kind == "chan":
        return payload_chan(rename_channel(p.chan, mapping))
    return p


def rename_action(a: Action, mapping: dict[str, str]) -> Action:
    if a.is_silent:
        return a
    return Action(rename_channel(a.channel, mapping), a.side, rename_payload(a.payload, mapping))


# ---------------------------------------------------------------------------
# single-step certificates


@dataclass(frozen=True)
class StepCert:
    """One node of a single-step derivation.

    kind is one of "obj", "frame", "fwd", "comm".  Every node carries its
    endpoints so validation is local.
    """

    kind: str
    action: Action
    time: FinTime
    source: Configuration
    target: Configuration
    # obj
    obj_provider: Channel | None = None
    obj_body: NamelessObj | None = None
    # frame
    inner: "StepCert | None" = None
    frame: Configuration | None = None
    # fwd
    fwd_outer: Channel | None = None
    fwd_inner: Channel | None = None
    fwd_body: NamelessObj | None = None
    # comm
    send_part: "StepCert | None" = None
    recv_part: "StepCert | None" = None


def step_obj(provider: Channel, body: NamelessObj, action: Action, time: FinTime,
             target: Configuration) -> StepCert:
    return StepCert(
        "obj", action, time,
        source=FMSet.of(proc(provider, body)), target=target,
        obj_provider=provider, obj_body=body,
    )


def step_frame(inner: StepCert, frame: Configuration) -> StepCert:
    if frame.is_empty():
        return inner
    return StepCert(
        "frame", inner.action, inner.time,
        source=inner.source.union(frame), target=inner.target.union(frame),
        inner=inner, frame=frame,
    )


def step_fwd(outer: Channel, inner: Channel, body: NamelessObj, time: FinTime) -> StepCert:
    # forwarder collapse, fixed to a silent action
    return StepCert(
        "fwd", EPS, time,
        source=FMSet.of(proc(inner, body), fwd(outer, inner)),
        target=FMSet.of(proc(outer, body)),
        fwd_outer=outer, fwd_inner=inner, fwd_body=body,
    )


def step_comm(send_part: StepCert, recv_part: StepCert) -> StepCert:
    return StepCert(
        "comm", EPS, send_part.time,
        source=send_part.source.union(recv_part.source),
        target=send_part.target.union(recv_part.target),
        send_part=send_part, recv_part=recv_part,
    )


def validate_step(cert: StepCert) -> bool:
    """Re-check every node of a single-step derivation."""
    if cert.kind == "obj":
        if cert.source != FMSet.of(proc(cert.obj_provider, cert.obj_body)):
            return False
        lang = get_language(cert.obj_body.lang)
        return lang.check_step(cert.obj_body.term, cert.obj_provider, cert.action,
                               cert.time, cert.target)
    if cert.kind == "frame":
        inner, frame = cert.inner, cert.frame
        if inner is None or frame is None:
            return False
        if cert.action != inner.action or cert.time != inner.time:
            return False
        if cert.source != inner.source.union(frame):
            return False
        if cert.target != inner.target.union(frame):
            return False
        return validate_step(inner)
    if cert.kind == "fwd":
        if not cert.action.is_silent:
            return False
        expect_src = FMSet.of(proc(cert.fwd_inner, cert.fwd_body), fwd(cert.fwd_outer, cert.fwd_inner))
        expect_tgt = FMSet.of(proc(cert.fwd_outer, cert.fwd_body))
        return cert.source == expect_src and cert.target == expect_tgt
    if cert.kind == "comm":
        s, r = cert.send_part, cert.recv_part
        if s is None or r is None or not cert.action.is_silent:
            return False
        if s.action.is_silent or r.action.is_silent:
            return False
        if s.action.side is not Side.SEND or r.action.side is not Side.RECV:
            return False
        if s.action.channel != r.action.channel or s.action.payload != r.action.payload:
            return False
        if s.time != r.time or cert.time != s.time:
            return False
        if cert.source != s.source.union(r.source):
            return False
        if cert.target != s.target.union(r.target):
            return False
        return validate_step(s) and validate_step(r)
    return False


# ---------------------------------------------------------------------------
# step enumeration


def _directed_object_steps(
    cfg: Configuration,
    time: FinTime,
    chan_candidates: Sequence[Channel],
    avoid: frozenset[str],
) -> list[tuple[AtomicProc, Action, Configuration]]:
    """All object-level steps of individual processes, unframed."""
    out: list[tuple[AtomicProc, Action, Configuration]] = []
    for atom, _ in cfg.items():
        if atom.is_fwd:
            continue
        lang = get_language(atom.body.lang)
        for action, target in lang.enumerate_steps(
            atom.body.term, atom.provider, time, chan_candidates, avoid
        ):
            out.append((atom, action, target))
    return out


def _step_sort_key(item: tuple[Action, Configuration, StepCert]) -> tuple:
    action, target, _ = item
    return (repr(action), repr(target))


def enabled_steps(
    cfg: Configuration,
    time: FinTime,
    chan_candidates: Sequence[Channel] = (),
    avoid: Iterable[str] = (),
) -> list[tuple[Action, Configuration, StepCert]]:
    """Enumerate all single steps of ``cfg`` at ``time``, certificates included.

    Frames are implicit: each underlying step is certified once, framed by
    the rest of the configuration, rather than once per sub-multiset split.
    Fresh names chosen by object steps avoid every name in the
    configuration, the candidates, and ``avoid``.
    """
    base_avoid = frozenset(avoid) | cfg_names(cfg) | {c.name for c in chan_candidates} | {HOLE.name}
    results: dict[tuple[str, str], tuple[Action, Configuration, StepCert]] = {}

    def add(action: Action, cert: StepCert) -> None:
        results[(repr(action), repr(cert.target))] = (action, cert.target, cert)

    # object steps, framed by everything else
    for atom, action, target in _directed_object_steps(cfg, time, chan_candidates, base_avoid):
        rest = cfg.remove_one(atom)
        cert = step_frame(step_obj(atom.provider, atom.body, action, time, target), rest)
        add(action, cert)

    # forwarder collapses
    for atom, _ in cfg.items():
        if not atom.is_fwd:
            continue
        inner_name = atom.target
        for other, _ in cfg.items():
            if other.is_fwd or other.provider != inner_name:
                continue
            rest = cfg.remove_one(atom).remove_one(other)
            cert = step_frame(step_fwd(atom.provider, inner_name, other.body, time), rest)
            add(EPS, cert)

    # communications: match each send against each receive of another process
    sends = [
        (atom, action, target)
        for atom, action, target in _directed_object_steps(cfg, time, (), base_avoid)
        if not action.is_silent and action.side is Side.SEND
    ]
    for satom, saction, starget in sends:
        rest_after_send = cfg.remove_one(satom)
        cand = [saction.payload.chan] if saction.payload.kind == "chan" else []
        for ratom, _ in rest_after_send.items():
            if ratom.is_fwd:
                continue
            lang = get_language(ratom.body.lang)
            for raction, rtarget in lang.enumerate_steps(
                ratom.body.term, ratom.provider, time, cand, base_avoid
            ):
                if raction.is_silent or raction.side is not Side.RECV:
                    continue
                if raction.channel != saction.channel or raction.payload != saction.payload:
                    continue
                rest = rest_after_send.remove_one(ratom)
                comm = step_comm(
                    step_obj(satom.provider, satom.body, saction, time, starget),
                    step_obj(ratom.provider, ratom.body, raction, time, rtarget),
                )
                add(EPS, step_frame(comm, rest))

    return sorted(results.values(), key=_step_sort_key)


def silent_steps(cfg: Configuration, time: FinTime, avoid: Iterable[str] = ()
                 ) -> list[tuple[Action, Configuration, StepCert]]:
    return [s for s in enabled_steps(cfg, time, (), avoid) if s[0].is_silent]


# ---------------------------------------------------------------------------
# multistep certificates


@dataclass(frozen=True)
class MultistepCert:
    """Derivation of a timed silent multistep between configurations.

    kind is "refl", "stepT" (idle from t1 to t2, then tail) or "stepC"
    (silent step now, then tail).
    """

    kind: str
    cfg: Configuration | None = None      # refl / stepT start configuration
    time: FinTime | None = None           # refl time / stepT t1
    time2: FinTime | None = None          # stepT t2
    step: StepCert | None = None          # stepC step
    tail: "MultistepCert | None" = None

    @property
    def start_cfg(self) -> Configuration:
        if self.kind == "refl" or self.kind == "stepT":
            return self.cfg
        return self.step.source

    @property
    def start_time(self) -> FinTime:
        if self.kind == "refl" or self.kind == "stepT":
            return self.time
        return self.step.time

    @property
    def end_cfg(self) -> Configuration:
        node = self
        while node.kind != "refl":
            node = node.tail
        return node.cfg

    @property
    def end_time(self) -> FinTime:
        node = self
        while node.kind != "refl":
            node = node.tail
        return node.time


def ms_refl(cfg: Configuration, time: FinTime) -> MultistepCert:
    return MultistepCert("refl", cfg=cfg, time=time)


def ms_stepT(cfg: Configuration, t1: FinTime, t2: FinTime, tail: MultistepCert) -> MultistepCert:
    return MultistepCert("stepT", cfg=cfg, time=t1, time2=t2, tail=tail)


def ms_stepC(step: StepCert, tail: MultistepCert) -> MultistepCert:
    return MultistepCert("stepC", step=step, tail=tail)


def validate_multistep(cert: MultistepCert) -> bool:
    """Check side conditions and endpoint threading of every node."""
    node = cert
    while True:
        if node.kind == "refl":
            return node.cfg is not None and node.time is not None
        if node.kind == "stepT":
            if node.tail is None or node.time is None or node.time2 is None:
                return False
            if node.time > node.time2:
                return False
            if node.tail.start_time != node.time2 or node.tail.start_cfg != node.cfg:
                return False
            node = node.tail
        elif node.kind == "stepC":
            if node.tail is None or node.step is None:
                return False
            if not node.step.action.is_silent:
                return False
            if not validate_step(node.step):
                return False
            if node.tail.start_time != node.step.time:
                return False
            if node.tail.start_cfg != node.step.target:
                return False
            node = node.tail
        else:
            return False


# ---------------------------------------------------------------------------
# admissible operations


def ms_frame(cert: MultistepCert, frame: Configuration) -> MultistepCert:
    if cert.kind == "refl":
        return ms_refl(cert.cfg.union(frame), cert.time)
    if cert.kind == "stepT":
        return ms_stepT(cert.cfg.union(frame), cert.time, cert.time2,
                        ms_frame(cert.tail, frame))
    return ms_stepC(step_frame(cert.step, frame), ms_frame(cert.tail, frame))


class ComposeError(ValueError):
    """Raised when certificate endpoints do not line up."""


def ms_concat(a: MultistepCert, b: MultistepCert) -> MultistepCert:
    if a.end_cfg != b.start_cfg:
        raise ComposeError(
            f"concat endpoint mismatch: {a.end_cfg!r} vs {b.start_cfg!r}")
    if a.end_time > b.start_time:
        raise ComposeError(
            f"concat time mismatch: ends at {a.end_time}, next starts at {b.start_time}")
    if a.kind == "refl":
        return ms_stepT(a.cfg, a.time, b.start_time, b)
    if a.kind == "stepT":
        return ms_stepT(a.cfg, a.time, a.time2, ms_concat(a.tail, b))
    return ms_stepC(a.step, ms_concat(a.tail, b))


def ms_stepTR(cert: MultistepCert, t3: FinTime) -> MultistepCert:
    if cert.end_time > t3:
        raise ComposeError(f"cannot retarget end time {cert.end_time} to earlier {t3}")
    return ms_concat(cert, ms_refl(cert.end_cfg, t3))


def _interleave_l(a: MultistepCert, b: MultistepCert) -> MultistepCert:
    # requires a.start_time <= b.start_time
    if a.kind == "refl":
        return ms_stepT(a.cfg.union(b.start_cfg), a.time, b.start_time,
                        ms_frame(b, a.cfg))
    if a.kind == "stepT":
        inner = ms_interleave(a.tail, b)
        return ms_stepT(a.cfg.union(b.start_cfg), a.time, inner.start_time, inner)
    framed = step_frame(a.step, b.start_cfg)
    return ms_stepC(framed, _interleave_l(a.tail, b))


def _interleave_r(a: MultistepCert, b: MultistepCert) -> MultistepCert:
    # requires b.start_time <= a.start_time
    if b.kind == "refl":
        return ms_stepT(a.start_cfg.union(b.cfg), b.time, a.start_time,
                        ms_frame(a, b.cfg))
    if b.kind == "stepT":
        inner = ms_interleave(a, b.tail)
        return ms_stepT(a.start_cfg.union(b.cfg), b.time, inner.start_time, inner)
    framed = step_frame(b.step, a.start_cfg)
    return ms_stepC(framed, _interleave_r(a, b.tail))


def ms_interleave(a: MultistepCert, b: MultistepCert) -> MultistepCert:
    """Run two multisteps side by side.

    The result goes from the union of the starts at min(start times) to
    the union of the ends at max(end times), dispatching between the two
    mutually recursive one-sided variants on the time comparison.
    """
    if a.start_time <= b.start_time:
        return _interleave_l(a, b)
    return _interleave_r(a, b)
