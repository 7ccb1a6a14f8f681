from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from protime.cli import main
from protime.corpus import corpus_text


@pytest.fixture()
def runner():
    return CliRunner()


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_check_exit_codes(runner, tmp_path):
    ok = _write(tmp_path, "ok.proto", corpus_text("05_cut_basic.proto"))
    res = runner.invoke(main, ["check", ok])
    assert res.exit_code == 0
    assert "cut_basic: ok" in res.output
    bad = _write(tmp_path, "bad.proto",
                 corpus_text("05_cut_basic.proto").replace("recv{2}", "recv{1}"))
    res = runner.invoke(main, ["check", bad])
    assert res.exit_code == 1
    assert "entailment" in res.output
    junk = _write(tmp_path, "junk.proto", "term ?!")
    res = runner.invoke(main, ["check", junk])
    assert res.exit_code == 3


def test_witness_validate_roundtrip(runner, tmp_path):
    prog = _write(tmp_path, "p.proto", corpus_text("05_cut_basic.proto"))
    cert = tmp_path / "cert.json"
    res = runner.invoke(main, ["witness", prog, "-o", str(cert), "--horizon", "12"])
    assert res.exit_code == 0
    res = runner.invoke(main, ["validate", str(cert)])
    assert res.exit_code == 0
    # tampering flips the exit code
    doc = json.loads(cert.read_text())
    doc["end"] = doc["start"]
    cert.write_text(json.dumps(doc))
    res = runner.invoke(main, ["validate", str(cert)])
    assert res.exit_code == 1


def test_semcheck_modes(runner, tmp_path):
    prog = _write(tmp_path, "p.proto", corpus_text("02_close_at_3.proto"))
    cert = tmp_path / "cert.json"
    assert runner.invoke(main, ["witness", prog, "-o", str(cert)]).exit_code == 0
    res = runner.invoke(main, ["semcheck", str(cert), "--type", "1{t | t == 3}",
                               "--time", "0", "--mode", "nostar"])
    assert res.exit_code == 0 and "pass" in res.output
    res = runner.invoke(main, ["semcheck", str(cert), "--type", "1{t | t == 9}",
                               "--time", "0", "--mode", "nostar", "--horizon", "12"])
    assert res.exit_code == 1


def test_run_trace_and_determinism(runner, tmp_path):
    prog = _write(tmp_path, "p.proto", corpus_text("20_double_cut.proto"))
    t1, t2 = tmp_path / "a.json", tmp_path / "b.json"
    r1 = runner.invoke(main, ["run", prog, "--horizon", "10", "--trace", str(t1)])
    r2 = runner.invoke(main, ["run", prog, "--horizon", "10", "--trace", str(t2)])
    assert r1.exit_code == 0 and r2.exit_code == 0
    assert t1.read_bytes() == t2.read_bytes()
    out1 = r1.output.replace(str(t1), "X")
    out2 = r2.output.replace(str(t2), "X")
    assert out1 == out2


def test_retype_cli(runner):
    res = runner.invoke(main, ["retype", "1{t | t <= 10} <| 1{t | t == 4} @ 0"])
    assert res.exit_code == 0 and "holds" in res.output
    res = runner.invoke(main, ["retype", "nonsense"])
    assert res.exit_code == 3


def test_corpus_listing(runner):
    res = runner.invoke(main, ["corpus"])
    assert res.exit_code == 0
    assert "17_sensor.proto" in res.output
    res = runner.invoke(main, ["corpus", "17_sensor.proto"])
    assert "sensor" in res.output
