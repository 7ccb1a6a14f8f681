"""A second, deliberately tiny object language: scripted devices.

A device runs a fixed list of events, each enabled inside a closed time
window on the device's own providing channel.  It exists to exercise the
heterogeneous composition path (foreign providers monitored next to
typed clients) and to generate cheap valid step certificates in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lts import (
    Action,
    EPS,
    PAYLOAD_CLOSE,
    Payload,
    Side,
    act,
    proc,
    NamelessObj,
    register_language,
)
from .multiset import FMSet

LANG_ID = "device"

# event kinds: ("tick", lo, hi) silent; ("close", lo, hi);
# ("send", sel, lo, hi); ("recv", sel, lo, hi)


@dataclass(frozen=True)
class Script:
    events: tuple[tuple, ...]

    def __repr__(self) -> str:
        return f"Script{self.events!r}"


def device(*events: tuple) -> NamelessObj:
    return NamelessObj(LANG_ID, Script(tuple(events)))


def close_between(lo: int, hi: int) -> NamelessObj:
    return device(("close", lo, hi))


def _window(ev: tuple) -> tuple[int, int]:
    return ev[-2], ev[-1]


def _rest(s: Script, provider) -> FMSet:
    tail = s.events[1:]
    if not tail:
        return FMSet()
    return FMSet.of(proc(provider, NamelessObj(LANG_ID, Script(tail))))


class DeviceLanguage:
    lang_id = LANG_ID

    def enumerate_steps(self, term, provider, time, chan_candidates, avoid):
        if not isinstance(term, Script) or not term.events:
            return []
        ev = term.events[0]
        lo, hi = _window(ev)
        if not (lo <= time <= hi):
            return []
        kind = ev[0]
        if kind == "tick":
            return [(EPS, _rest(term, provider))]
        if kind == "close":
            return [(act(provider, Side.SEND, PAYLOAD_CLOSE), FMSet())]
        if kind == "send":
            return [(act(provider, Side.SEND, Payload("sel", sel=ev[1])),
                     _rest(term, provider))]
        if kind == "recv":
            return [(act(provider, Side.RECV, Payload("sel", sel=ev[1])),
                     _rest(term, provider))]
        return []

    def check_step(self, term, provider, action: Action, time, target):
        return (action, target) in [
            (a, t) for a, t in self.enumerate_steps(term, provider, time, (), frozenset())
        ]

    def term_names(self, term):
        return frozenset()

    def rename_term(self, term, mapping):
        return term

    def show_term(self, term: Script) -> str:
        parts = []
        for ev in term.events:
            if ev[0] == "tick":
                parts.append(f"tick {ev[1]} {ev[2]}")
            elif ev[0] == "close":
                parts.append(f"close {ev[1]} {ev[2]}")
            else:
                parts.append(f"{ev[0]} pi{ev[1]} {ev[2]} {ev[3]}")
        return "; ".join(parts)

    def parse_term(self, text: str) -> Script:
        events = []
        for chunk in text.split(";"):
            words = chunk.split()
            if not words:
                continue
            kind = words[0]
            if kind in ("tick", "close"):
                if len(words) != 3:
                    raise ValueError(f"bad device event: {chunk!r}")
                events.append((kind, int(words[1]), int(words[2])))
            elif kind in ("send", "recv"):
                if len(words) != 4 or words[1] not in ("pi1", "pi2"):
                    raise ValueError(f"bad device event: {chunk!r}")
                events.append((kind, int(words[1][2]), int(words[2]), int(words[3])))
            else:
                raise ValueError(f"unknown device event: {chunk!r}")
        return Script(tuple(events))


register_language(DeviceLanguage())
