"""JSON forms for configurations, certificates and trajectories.

Every node carries an explicit tag (STEP-OBJ/FRAME/FWD/COMM, REFL/STEPT/
STEPC, RREFL/RSTEPT/RSTEPC); configurations are canonical atom lists;
object-language terms travel in their concrete syntax and are re-parsed
on load, so a decoded certificate re-validates from scratch.
"""

from __future__ import annotations

import json

from .computable import ComputableTrajectory
from .lts import (
    Action,
    AtomicProc,
    Channel,
    Configuration,
    MultistepCert,
    NamelessConfiguration,
    NamelessObj,
    Payload,
    Side,
    StepCert,
    get_language,
    proc,
    fwd,
)
from .multiset import FMSet
from .realization import RealizationCert, r_refl, r_stepC, r_stepT
from .timebase import INFINITY, Time, fin
from .trajectory import Trajectory, make_traj


def time_to_json(t: Time) -> object:
    return "inf" if t.is_infinite else t.ticks


def time_from_json(v: object) -> Time:
    return INFINITY if v == "inf" else fin(int(v))


def obj_to_json(o: NamelessObj) -> dict:
    return {"lang": o.lang, "term": get_language(o.lang).show_term(o.term)}


def obj_from_json(v: dict) -> NamelessObj:
    return NamelessObj(v["lang"], get_language(v["lang"]).parse_term(v["term"]))


def atom_to_json(a: AtomicProc) -> dict:
    if a.is_fwd:
        return {"kind": "fwd", "provider": a.provider.name, "target": a.target.name}
    return {"kind": "proc", "provider": a.provider.name, "body": obj_to_json(a.body)}


def atom_from_json(v: dict) -> AtomicProc:
    if v["kind"] == "fwd":
        return fwd(Channel(v["provider"]), Channel(v["target"]))
    return proc(Channel(v["provider"]), obj_from_json(v["body"]))


def cfg_to_json(c: Configuration) -> list:
    return [atom_to_json(a) for a in c]


def cfg_from_json(v: list) -> Configuration:
    return FMSet(atom_from_json(x) for x in v)


def ncfg_to_json(nc: NamelessConfiguration) -> dict:
    return {"rest": cfg_to_json(nc.rest), "root": obj_to_json(nc.root)}


def ncfg_from_json(v: dict) -> NamelessConfiguration:
    return NamelessConfiguration(cfg_from_json(v["rest"]), obj_from_json(v["root"]))


def payload_to_json(p: Payload) -> dict:
    if p.kind == "sel":
        return {"kind": "sel", "sel": p.sel}
    if p.kind == "close":
        return {"kind": "close"}
    return {"kind": "chan", "chan": p.chan.name}


def payload_from_json(v: dict) -> Payload:
    if v["kind"] == "sel":
        return Payload("sel", sel=v["sel"])
    if v["kind"] == "close":
        return Payload("close")
    return Payload("chan", chan=Channel(v["chan"]))


def action_to_json(a: Action) -> dict:
    if a.is_silent:
        return {"kind": "eps"}
    return {"kind": "dir", "channel": a.channel.name, "side": a.side.value,
            "payload": payload_to_json(a.payload)}


def action_from_json(v: dict) -> Action:
    if v["kind"] == "eps":
        return Action()
    return Action(Channel(v["channel"]), Side(v["side"]), payload_from_json(v["payload"]))


def step_to_json(c: StepCert) -> dict:
    base = {"action": action_to_json(c.action), "time": c.time}
    if c.kind == "obj":
        return {"tag": "STEP-OBJ", **base,
                "provider": c.obj_provider.name, "body": obj_to_json(c.obj_body),
                "target": cfg_to_json(c.target)}
    if c.kind == "frame":
        return {"tag": "STEP-FRAME", "inner": step_to_json(c.inner),
                "frame": cfg_to_json(c.frame)}
    if c.kind == "fwd":
        return {"tag": "STEP-FWD", "time": c.time, "outer": c.fwd_outer.name,
                "inner": c.fwd_inner.name, "body": obj_to_json(c.fwd_body)}
    return {"tag": "STEP-COMM", "send": step_to_json(c.send_part),
            "recv": step_to_json(c.recv_part)}


def step_from_json(v: dict) -> StepCert:
    from .lts import step_comm, step_frame, step_fwd, step_obj

    tag = v["tag"]
    if tag == "STEP-OBJ":
        return step_obj(Channel(v["provider"]), obj_from_json(v["body"]),
                        action_from_json(v["action"]), v["time"], cfg_from_json(v["target"]))
    if tag == "STEP-FRAME":
        return step_frame(step_from_json(v["inner"]), cfg_from_json(v["frame"]))
    if tag == "STEP-FWD":
        return step_fwd(Channel(v["outer"]), Channel(v["inner"]),
                        obj_from_json(v["body"]), v["time"])
    if tag == "STEP-COMM":
        return step_comm(step_from_json(v["send"]), step_from_json(v["recv"]))
    raise ValueError(f"unknown step tag {tag!r}")


def multistep_to_json(m: MultistepCert) -> dict:
    if m.kind == "refl":
        return {"tag": "REFL", "cfg": cfg_to_json(m.cfg), "time": m.time}
    if m.kind == "stepT":
        return {"tag": "STEPT", "cfg": cfg_to_json(m.cfg), "from": m.time,
                "to": m.time2, "tail": multistep_to_json(m.tail)}
    return {"tag": "STEPC", "step": step_to_json(m.step),
            "tail": multistep_to_json(m.tail)}


def multistep_from_json(v: dict) -> MultistepCert:
    from .lts import ms_refl, ms_stepC, ms_stepT

    tag = v["tag"]
    if tag == "REFL":
        return ms_refl(cfg_from_json(v["cfg"]), v["time"])
    if tag == "STEPT":
        return ms_stepT(cfg_from_json(v["cfg"]), v["from"], v["to"],
                        multistep_from_json(v["tail"]))
    if tag == "STEPC":
        return ms_stepC(step_from_json(v["step"]), multistep_from_json(v["tail"]))
    raise ValueError(f"unknown multistep tag {tag!r}")


def traj_to_json(s: Trajectory, nameless: bool) -> dict:
    enc = ncfg_to_json if nameless else cfg_to_json
    return {"lo": time_to_json(s.lo), "hi": time_to_json(s.hi),
            "segments": [[t, enc(v)] for t, v in s.segments]}


def traj_from_json(v: dict, nameless: bool) -> Trajectory:
    dec = ncfg_from_json if nameless else cfg_from_json
    return make_traj(time_from_json(v["lo"]), time_from_json(v["hi"]),
                     [(int(t), dec(x)) for t, x in v["segments"]])


def realization_to_json(r: RealizationCert) -> dict:
    """Tag tree plus the root subject; sub-subjects are reconstructed."""
    def tags(node: RealizationCert) -> dict:
        if node.kind == "refl":
            return {"tag": "RREFL"}
        if node.kind == "stepT":
            return {"tag": "RSTEPT", "time": node.ext_time, "sub": tags(node.sub)}
        return {"tag": "RSTEPC", "sub": tags(node.sub)}

    return {"tags": tags(r), "trajectory": traj_to_json(r.s, nameless=False),
            "multistep": multistep_to_json(r.sigma)}


def realization_from_json(v: dict) -> RealizationCert:
    sigma = multistep_from_json(v["multistep"])
    s = traj_from_json(v["trajectory"], nameless=False)

    def build(tags: dict, sigma_node: MultistepCert, hi: Time) -> RealizationCert:
        tag = tags["tag"]
        if tag == "RREFL":
            if sigma_node.kind != "refl":
                raise ValueError("RREFL over a non-reflexive multistep")
            return r_refl(sigma_node.cfg, sigma_node.time, hi)
        if tag == "RSTEPT":
            if sigma_node.kind != "stepT":
                raise ValueError("RSTEPT over a non-idle multistep")
            return r_stepT(build(tags["sub"], sigma_node.tail, hi), tags["time"])
        if tag == "RSTEPC":
            if sigma_node.kind != "stepC":
                raise ValueError("RSTEPC over a non-stepping multistep")
            return r_stepC(build(tags["sub"], sigma_node.tail, hi), sigma_node.step)
        raise ValueError(f"unknown realization tag {tag!r}")

    rebuilt = build(v["tags"], sigma, s.hi)
    if rebuilt.s != s:
        raise ValueError("serialized trajectory does not match the derivation")
    return rebuilt


def ct_to_json(w: ComputableTrajectory) -> dict:
    return {
        "lo": time_to_json(w.lo),
        "hi": time_to_json(w.hi),
        "start": ncfg_to_json(w.start),
        "end": ncfg_to_json(w.end),
        "trajectory": traj_to_json(w.ntraj, nameless=True),
        "realization": realization_to_json(w.realize_template),
    }


def ct_from_json(v: dict) -> ComputableTrajectory:
    return ComputableTrajectory(
        time_from_json(v["lo"]),
        time_from_json(v["hi"]),
        ncfg_from_json(v["start"]),
        ncfg_from_json(v["end"]),
        traj_from_json(v["trajectory"], nameless=True),
        realization_from_json(v["realization"]),
    )


def dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)
