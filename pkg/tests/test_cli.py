"""Command line driver: exit codes, output formats, determinism."""

import hashlib
import json

import pytest

import daesa

import oracles
from conftest import MODELS_DIR
from helpers import run_cli

PENDULUM = str(MODELS_DIR / "pendulum.dae")
CLUTCH = str(MODELS_DIR / "clutch.dae")
RLDC2 = str(MODELS_DIR / "rldc2.dae")

HAPPY = [
    ["parse", PENDULUM],
    ["dm", PENDULUM],
    ["btf", PENDULUM],
    ["offsets", PENDULUM],
    ["offsets", PENDULUM, "--nonsquare"],
    ["pantelides", PENDULUM],
    ["existq", PENDULUM, "--roles", "x=x,y,lam"],
    ["array", PENDULUM],
    ["modes", PENDULUM],
    ["parse", CLUTCH],
    ["dm", CLUTCH, "--mode", "g=true"],
    ["btf", CLUTCH, "--mode", "g=false"],
    ["offsets", CLUTCH, "--mode", "g=true"],
    ["pantelides", CLUTCH, "--mode", "g=false"],
    ["existq", CLUTCH, "--mode", "g=true", "--roles", "x=w1,w2,t1,t2"],
    ["array", CLUTCH, "--mode", "g=true"],
    ["modechange", CLUTCH, "--from", "g=false", "--to", "g=true"],
    ["modechange", CLUTCH, "--from", "g=true", "--to", "g=false"],
    ["modes", CLUTCH],
    ["dm", RLDC2, "--mode", "g1=true,g2=false"],
    ["offsets", RLDC2, "--mode", "g1=false,g2=false"],
    ["modes", RLDC2],
]


@pytest.mark.parametrize("argv", HAPPY, ids=lambda a: " ".join(a[:1] + a[2:]))
def test_happy_paths_exit_zero(argv):
    code, out, err = run_cli(argv)
    assert code == 0, err
    assert out.strip()


@pytest.mark.parametrize("fmt", ["text", "json"])
def test_repeated_runs_are_byte_identical(fmt):
    for argv in HAPPY:
        full = argv + ["--format", fmt]
        first = run_cli(full)
        second = run_cli(full)
        assert first == second


def test_json_report_envelope():
    code, out, _ = run_cli(["offsets", PENDULUM, "--format", "json"])
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == 1
    assert report["tool"] == "daesa"
    assert report["version"] == daesa.__version__
    assert report["command"] == "offsets"
    assert report["input"]["file"] == "pendulum.dae"
    text = (MODELS_DIR / "pendulum.dae").read_text()
    assert report["input"]["sha256"] == hashlib.sha256(text.encode()).hexdigest()
    result = report["result"]
    assert result["verdict"] == "offsets"
    assert result["index"] == 2
    assert result["latent"] == ["p3''"]
    assert result["consistency"] == ["p3", "p3'"]


def test_dot_outputs_are_well_formed():
    for argv in (
        ["parse", PENDULUM],
        ["dm", PENDULUM],
        ["btf", PENDULUM],
        ["offsets", PENDULUM],
        ["dm", CLUTCH, "--mode", "g=true"],
    ):
        code, out, err = run_cli(argv + ["--format", "dot"])
        assert code == 0, err
        oracles.check_dot(out)
    code, out, _ = run_cli(["offsets", PENDULUM, "--format", "dot"])
    assert code == 0 and "style=bold" in out
    code, out, _ = run_cli(["dm", PENDULUM, "--format", "dot"])
    assert code == 0 and "cluster_0" in out


def test_dot_rejected_where_no_graph_exists():
    code, _, err = run_cli(["pantelides", PENDULUM, "--format", "dot"])
    assert code == 1 and "daesa:" in err
    code, _, err = run_cli(["modes", CLUTCH, "--format", "dot"])
    assert code == 1 and "daesa:" in err


def test_usage_errors_exit_one():
    code, _, err = run_cli(["existq", PENDULUM])
    assert code == 1 and "--roles" in err
    code, _, err = run_cli(["modechange", CLUTCH, "--from", "g=true"])
    assert code == 1 and "--to" in err
    code, _, err = run_cli(["dm", str(MODELS_DIR / "missing.dae")])
    assert code == 1 and "cannot read" in err
    code, _, err = run_cli(["dm", CLUTCH])
    assert code == 1
    code, _, err = run_cli(["dm", CLUTCH, "--mode", "g"])
    assert code == 1 and "bad mode literal" in err
    code, _, err = run_cli(["dm", CLUTCH, "--mode", "g=maybe"])
    assert code == 1 and "bad guard value" in err
    code, _, err = run_cli(["existq", PENDULUM, "--roles", "z=x"])
    assert code == 1 and "unknown role" in err
    code, _, err = run_cli(["dm", CLUTCH, "--mode", "h=true"])
    assert code == 1


def test_parse_errors_report_position(tmp_path):
    bad = tmp_path / "bad.dae"
    bad.write_text("continuous m;\nvar x;\ne1: x +;\n")
    code, out, err = run_cli(["parse", str(bad)])
    assert code == 1
    assert "bad.dae:error:" in err
    assert not out


def test_warnings_go_to_stderr_without_failing(tmp_path):
    source = tmp_path / "warn.dae"
    source.write_text("continuous m;\nvar x;\ne1: x = 1;\ne2: 2 = 2;\n")
    code, out, err = run_cli(["parse", str(source)])
    assert code == 0
    assert "warning" in err
    assert out.strip()


def test_negative_verdicts_still_exit_zero(tmp_path):
    singular = tmp_path / "singular.dae"
    singular.write_text(
        "continuous m;\nvar x, y;\ne1: x = 0;\ne2: x = 1;\n"
    )
    code, out, _ = run_cli(["btf", str(singular), "--format", "json"])
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "structurally-singular"
    code, out, _ = run_cli(["offsets", str(singular), "--format", "json"])
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "structurally-singular"

    over = tmp_path / "over.dae"
    over.write_text("continuous m;\nvar x;\ne1: x = 0;\ne2: x = 1;\n")
    code, out, _ = run_cli(["pantelides", str(over), "--format", "json"])
    assert code == 0
    assert (
        json.loads(out)["result"]["verdict"] == "structurally-overconstrained"
    )

    chain = tmp_path / "chain.dae"
    chain.write_text(
        "continuous m;\nvar x, y, z;\n"
        "e1: der(x, 2) = y;\ne2: der(y, 2) = z;\ne3: x = 0;\n"
    )
    code, out, _ = run_cli(["array", str(chain), "--format", "json"])
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "not-determined"
    code, out, _ = run_cli(["array", str(chain), "--k", "6", "--format", "json"])
    assert code == 0
    result = json.loads(out)["result"]
    assert result["verdict"] == "determined" and result["k"] == 4

    switch = tmp_path / "switch.dae"
    switch.write_text(
        "continuous m;\nvar x;\nguard g;\n"
        "when g then\n  a1: der(x) = x;\nend\n"
        "when not g then\n  b1: x = 0;\nend\n"
    )
    code, out, _ = run_cli(
        ["modechange", str(switch), "--from", "g=true", "--to", "g=false",
         "--format", "json"]
    )
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "causality-violation"


def test_text_output_spot_checks():
    code, out, _ = run_cli(["offsets", CLUTCH, "--mode", "g=true"])
    assert code == 0
    assert "structural index (max equation offset): 1" in out
    assert "latent equations: e3'" in out
    assert "consistency constraints: e3" in out

    code, out, _ = run_cli(
        ["existq", CLUTCH, "--mode", "g=true", "--roles", "x=w1,w2,t1,t2"]
    )
    assert code == 0
    assert "determining blocks:" in out

    code, out, _ = run_cli(["modes", PENDULUM])
    assert code == 0
    assert "(no guards)" in out and "index 2" in out

    code, out, _ = run_cli(
        ["modechange", CLUTCH, "--from", "g=false", "--to", "g=true"]
    )
    assert code == 0
    assert "removed (entering-mode consistency): e3@cur" in out


def test_existq_reports_dialect_disagreement(tmp_path):
    source = tmp_path / "diverge.dae"
    source.write_text(
        "continuous m;\nvar x, w;\nfa: w = 0;\nfb: x + w = 0;\n"
    )
    code, out, _ = run_cli(
        ["existq", str(source), "--roles", "x=x;w=w", "--format", "json"]
    )
    assert code == 0
    report = json.loads(out)
    assert report["result"]["success"]
    assert report["result"]["diagnostics"]
    code, out, _ = run_cli(["existq", str(source), "--roles", "x=x;w=w"])
    assert "dialects disagree" in out
