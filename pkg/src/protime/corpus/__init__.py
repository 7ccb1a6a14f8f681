"""Bundled protocol programs used by the demo commands and the harness.

The files cover all twelve typing rules and both retyping relations;
closed unit-typed entries double as adequacy subjects.
"""

from __future__ import annotations

from importlib import resources

from ..syntax import SpecFile, parse_spec


def corpus_names() -> list[str]:
    root = resources.files("protime.corpus")
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".proto"))


def corpus_text(name: str) -> str:
    return resources.files("protime.corpus").joinpath(name).read_text(encoding="utf-8")


def load(name: str) -> SpecFile:
    return parse_spec(corpus_text(name))


def all_specs() -> dict[str, SpecFile]:
    return {name: load(name) for name in corpus_names()}
