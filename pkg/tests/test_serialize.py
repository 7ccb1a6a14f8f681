from __future__ import annotations

import json

import pytest

from helpers import random_multistep, random_realization, random_traj, rng

import protime  # noqa: F401
from protime.computable import certify_future, validate_ct
from protime.lts import FMSet, NamelessConfiguration, fresh_channels, validate_multistep
from protime.proclang import nobj
from protime.realization import validate_realization
from protime.serialize import (
    ct_from_json,
    ct_to_json,
    dumps,
    loads,
    multistep_from_json,
    multistep_to_json,
    realization_from_json,
    realization_to_json,
    traj_from_json,
    traj_to_json,
)
from protime.syntax import parse_term


def test_multistep_roundtrip():
    r = rng(31)
    for _ in range(100):
        m = random_multistep(r)
        again = multistep_from_json(loads(dumps(multistep_to_json(m))))
        assert again == m
        assert validate_multistep(again)


def test_trajectory_roundtrip():
    r = rng(32)
    for _ in range(100):
        s = random_traj(r)
        again = traj_from_json(loads(dumps(traj_to_json(s, nameless=False))),
                               nameless=False)
        assert again == s


def test_realization_roundtrip():
    r = rng(33)
    for _ in range(100):
        cert = random_realization(r)
        again = realization_from_json(loads(dumps(realization_to_json(cert))))
        assert validate_realization(again)
        assert again.s == cert.s and again.sigma == cert.sigma


def test_realization_rejects_mismatched_subject():
    cert = random_realization(rng(34))
    doc = realization_to_json(cert)
    other = random_realization(rng(35))
    doc["trajectory"] = traj_to_json(other.s, nameless=False)
    if other.s != cert.s:
        with pytest.raises(ValueError):
            realization_from_json(doc)


def test_ct_roundtrip_and_tampering():
    term = parse_term(
        "let{0} x : 1{t | t == 2} = (send{t | t == 2}()); "
        "recv{2} x(); send{t | t == 4}()")
    w = certify_future(NamelessConfiguration(FMSet(), nobj(term)), 0, 10)
    doc = loads(dumps(ct_to_json(w)))
    again = ct_from_json(doc)
    probes = fresh_channels(again.names(), 3, "z")
    assert validate_ct(again, probes)
    assert again.start == w.start and again.end == w.end
    # flip the declared end configuration: validation must notice
    doc2 = json.loads(json.dumps(doc))
    doc2["end"] = doc2["start"]
    broken = ct_from_json(doc2)
    if broken.end != w.end:
        assert not validate_ct(broken, fresh_channels(broken.names(), 3, "z"))


def test_serialized_terms_reparse():
    term = parse_term("recv{t | t == 2}(y => recv{3} y(); send{v | v == 6}())")
    w = certify_future(NamelessConfiguration(FMSet(), nobj(term)), 0, 8)
    again = ct_from_json(loads(dumps(ct_to_json(w))))
    assert again.start.root == w.start.root
