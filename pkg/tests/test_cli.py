import json
import subprocess
import sys

import pytest

from svagen.cli import main

from conftest import FIXTURES, ROOT

RV_CONFIG = FIXTURES / "rv_timer" / "rv_timer.replay.run.json"


def test_lint_clean_file_is_silent(capsys):
    assert main(["lint", str(FIXTURES / "reference_listings.sva")]) == 0
    assert capsys.readouterr().out == ""


def test_lint_reports_positions(tmp_path, capsys):
    bad = tmp_path / "bad.sva"
    bad.write_text("property p;\n@(posedge clk) a |-> b\nendproperty\nassert property (p);\n")
    assert main(["lint", str(bad)]) == 1
    out = capsys.readouterr().out
    assert out == f"{bad}: p: line 2, col 23: missing ';' (found 'endproperty', expected ';')\n"


def test_triage_missing_signal(capsys):
    code = main(["triage", str(FIXTURES / "logs" / "missing_signal.log"), "--pack", "generic.pack.json"])
    assert code == 1
    assert capsys.readouterr().out == "SimulationFailure(missing_signal): rst_ni\n"


def test_triage_clean(capsys):
    assert main(["triage", str(FIXTURES / "logs" / "clean_01.log")]) == 0
    assert capsys.readouterr().out == "NoError\n"


def test_generate_and_report(tmp_path, capsys):
    out = tmp_path / "rv"
    assert main(["generate", "--config", str(RV_CONFIG), "--out", str(out)]) == 0
    for name in ("trace.json", "outcome.json", "timing.json", "final.sva"):
        assert (out / name).is_file()
    assert (out / "workspaces" / "iter_00" / "sim.log").is_file()
    capsys.readouterr()
    assert main(["report", str(out), "--format", "json"]) == 0
    (entry,) = json.loads(capsys.readouterr().out)
    assert entry["generated_assertion_count"] == 11 and entry["prompt_count"] == 12


def test_generate_bug_exit_code(tmp_path, capsys):
    cfg = FIXTURES / "full_adder" / "full_adder_buggy.replay.run.json"
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "inspect the design implementation" in capsys.readouterr().err


def test_global_flags_before_subcommand(tmp_path):
    assert main(["--config", str(RV_CONFIG), "--out", str(tmp_path), "generate"]) == 0


def test_format_writes_spec_json(tmp_path, capsys):
    assert main(["format", str(FIXTURES / "rv_timer" / "spec.md"), "--config", str(RV_CONFIG),
                 "--out", str(tmp_path)]) == 0
    written = tmp_path / "spec.spec.json"
    assert capsys.readouterr().out.strip() == str(written)
    data = json.loads(written.read_text())
    assert len(data["functional_requirements"]) == 10


def test_format_to_stdout_round_trips(tmp_path, capsys):
    assert main(["format", str(FIXTURES / "rv_timer" / "spec.md"), "--config", str(RV_CONFIG)]) == 0
    text = capsys.readouterr().out
    path = tmp_path / "x.spec.json"
    path.write_text(text)
    assert main(["format", str(path)]) == 0
    assert capsys.readouterr().out == text


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["lint"],
    ["report", "--format", "xml"],
    ["generate"],
    ["generate", "--config", "/nonexistent.run.json"],
    ["triage", "x.log", "--pack", "/no/such.pack.json"],
])
def test_usage_errors_exit_4(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == 4
    assert capsys.readouterr().err


def test_report_help_documents_columns():
    proc = subprocess.run([sys.executable, "-m", "svagen.cli", "report", "--help"],
                          capture_output=True, text=True, cwd=ROOT)
    assert proc.returncode == 0
    assert "SVA Gen. Time" in proc.stdout and "#Prompts" in proc.stdout


def test_console_script_usage_error():
    proc = subprocess.run([sys.executable, "-m", "svagen.cli", "--bogus"], capture_output=True, text=True)
    assert proc.returncode == 4 and "usage:" in proc.stderr
