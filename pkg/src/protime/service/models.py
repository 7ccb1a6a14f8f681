"""Request and response bodies for the certification service."""

from __future__ import annotations

from pydantic import BaseModel, Field

# exit code contract, shared with the CLI: 0 pass, 1 fail,
# 2 inconclusive, 3 usage or parse error
EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

_STATUS_EXIT = {"pass": EXIT_PASS, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}


def exit_of_status(status: str) -> int:
    return _STATUS_EXIT[status]


class CheckRequest(BaseModel):
    source: str


class TermReport(BaseModel):
    name: str
    ok: bool
    rule: str | None = None
    revalidated: bool | None = None
    category: str | None = None
    error: str | None = None


class CheckResponse(BaseModel):
    exit_code: int
    reports: list[TermReport] = Field(default_factory=list)
    error: str | None = None


class RunRequest(BaseModel):
    source: str
    name: str | None = None
    channel: str = "a"
    horizon: int | None = None


class RunResponse(BaseModel):
    exit_code: int
    trace: dict | None = None
    ready: dict[int, list[str]] = Field(default_factory=dict)
    diagnosis: list[str] = Field(default_factory=list)
    error: str | None = None


class WitnessRequest(BaseModel):
    source: str
    name: str | None = None
    horizon: int | None = None


class WitnessResponse(BaseModel):
    exit_code: int
    certificate: dict | None = None
    trail: list[str] = Field(default_factory=list)
    error: str | None = None


class ValidateRequest(BaseModel):
    certificate: dict


class ValidateResponse(BaseModel):
    exit_code: int
    detail: str


class SemcheckRequest(BaseModel):
    certificate: dict
    type: str
    time: int = 0
    mode: str = "nostar"
    horizon: int | None = None


class SemcheckResponse(BaseModel):
    exit_code: int
    verdict: str
    trail: list[str] = Field(default_factory=list)
    error: str | None = None


class RetypeRequest(BaseModel):
    query: str


class RetypeResponse(BaseModel):
    exit_code: int
    holds: bool | None = None
    reason: str | None = None
    error: str | None = None
