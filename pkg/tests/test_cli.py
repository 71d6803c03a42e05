import json
import subprocess
import sys

import pytest

from primform.cli import corpus_entries, main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def run_json(argv, capsys):
    code, out, err = run(argv, capsys)
    return code, json.loads(out), err


def test_list(capsys):
    code, out, _ = run(["pipeline", "--list"], capsys)
    assert code == 0
    assert out.split() == corpus_entries()
    assert {"A2", "A3", "trivial", "corrupt_d2"} <= set(out.split())


def test_missing_input(capsys):
    code, _, err = run(["validate"], capsys)
    assert code == 1 and "required" in err


@pytest.mark.parametrize("name", ["trivial", "exterior1", "exterior2", "dgex", "A2", "A2_package"])
def test_validate_passes_on_valid_entries(name, capsys):
    code, rep, _ = run_json(["validate", name], capsys)
    assert code == 0
    assert rep["status"] == "ok"
    assert all(e["pass"] for e in rep["validation"]["identities"])


@pytest.mark.parametrize("name,error", [("corrupt_d2", "NotAComplex"),
                                        ("corrupt_leibniz", "ValidationError"),
                                        ("corrupt_assoc", "ValidationError")])
def test_validate_rejects_corrupt_entries(name, error, capsys):
    code, rep, err = run_json(["validate", f"corpus:{name}"], capsys)
    assert code == 1
    assert rep["status"] == "error" and rep["error"] == error
    assert rep["report"]["[m, m] = 0"] is False
    assert rep["report"]["[m, m] = 0 iff axioms hold"] is True
    assert error in err


def test_leibniz_failure_names_its_anchor(capsys):
    _, rep, _ = run_json(["validate", "corrupt_leibniz"], capsys)
    assert rep["anchor"] == "eq:L"


def test_pipeline_on_the_trivial_algebra(capsys):
    code, rep, _ = run_json(["pipeline", "trivial"], capsys)
    assert code == 0
    assert rep["frobenius"]["potential_text"] == "1/6*t1^3"
    assert rep["t_order"] == 4 and rep["trunc_length"] == 8


def test_pipeline_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["pipeline", "trivial", "--out", str(a)]) == 0
    assert main(["pipeline", "trivial", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert capsys.readouterr().out == ""


@pytest.mark.parametrize("name", ["exterior1", "dgex"])
def test_missing_cy_data_exits_2(name, capsys):
    code, rep, _ = run_json(["exponents", name], capsys)
    assert code == 2 and rep["error"] == "MissingCYData"


def test_degeneration_failure_exits_2(capsys):
    code, rep, _ = run_json(["pipeline", "A2_f0"], capsys)
    assert code == 2
    assert rep["error"] == "DegenerationFails"
    assert rep["anchor"] == "prop:Hodge to de Rham"


def test_small_weight_cap_exits_3(capsys):
    code, rep, _ = run_json(["pipeline", "A2", "--weight-cap", "3"], capsys)
    assert code == 3 and rep["error"] == "WindowTooNarrow"


def test_u_window_must_cover_the_required_range(capsys):
    code, rep, _ = run_json(["pipeline", "A2", "--u-window", "-4", "9"], capsys)
    assert code == 1 and rep["error"] == "CapMismatch"


@pytest.mark.parametrize("argv", [["hochschild", "exterior1", "--trunc-length", "1"],
                                  ["pipeline", "trivial", "--t-order", "0"],
                                  ["pipeline", "A2_package", "--weight-cap", "5"]])
def test_bad_settings_are_rejected(argv, capsys):
    code, rep, _ = run_json(argv, capsys)
    assert code == 1 and rep["error"] == "CapMismatch"


def test_parse_errors(tmp_path, capsys):
    code, rep, _ = run_json(["validate", "no_such_entry"], capsys)
    assert code == 1 and rep["error"] == "ParseError"
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, rep, _ = run_json(["validate", str(bad)], capsys)
    assert code == 1 and rep["witness"]["location"].startswith(str(bad))
    bad.write_text('{"format": "something else"}')
    code, rep, _ = run_json(["validate", str(bad)], capsys)
    assert code == 1 and rep["witness"]["location"] == "format"


def test_exponents_of_a3(capsys):
    code, rep, _ = run_json(["exponents", "A3"], capsys)
    assert code == 0
    assert rep["exponents"] == ["0", "1/4", "1/2"]
    assert rep["w"] == "1/2"


def test_strict_exponents_exit_2(capsys):
    code, rep, _ = run_json(["exponents", "A2", "--strict"], capsys)
    assert code == 2 and rep["error"] == "HodgePropertyViolated"


def test_hochschild_ranks(capsys):
    code, rep, _ = run_json(["hochschild", "exterior1"], capsys)
    assert code == 0
    assert rep["stabilization"]["stable"]
    assert sum(rep["T_ranks"].values()) == rep["T_dim"]


def test_text_format_and_out_file(tmp_path, capsys):
    out = tmp_path / "r.txt"
    assert main(["hochschild", "exterior1", "--format", "text", "--out", str(out)]) == 0
    text = out.read_text()
    assert "status: ok" in text and "T_dim:" in text
    assert capsys.readouterr().out == ""


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "primform.cli", "validate", "corrupt_d2"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["error"] == "NotAComplex"
