"""Acceptance criteria; each test prints one PASS/FAIL line with its runtime."""
import contextlib
import io
import json
import random
import re
import time

import pytest
from hypothesis import given, settings

from mutations import KINDS, mutate
from random_runs import check_run, random_run
from strategies import property_asts
from svagen.cli import main
from svagen.pipeline import RunConfig
from svagen.sva import lint_sva_text, load_sva, parse_assertion, render
from svagen.triage import CATEGORIES, LogMessage, PatternPack, VerdictKind, classify, parse_log

from conftest import FIXTURES

RV_CONFIG = FIXTURES / "rv_timer" / "rv_timer.replay.run.json"
FA = FIXTURES / "full_adder"
TABLE_DESIGNS = ("rv_timer", "pattgen", "gpio", "rom_ctrl", "sram_ctrl", "adc_ctrl")


@pytest.fixture
def criterion(capsys):
    @contextlib.contextmanager
    def run(number, title, limit_s=None):
        start = time.perf_counter()
        ok = False
        try:
            yield
            elapsed = time.perf_counter() - start
            assert limit_s is None or elapsed < limit_s, f"took {elapsed:.2f}s, limit {limit_s}s"
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            with capsys.disabled():
                print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({elapsed:.2f}s)")
    return run


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


def test_listing_corpus_lints_and_mutations_are_caught(criterion, tmp_path):
    with criterion(1, "listing corpus: clean lint, every mutation rejected in region", limit_s=1.0):
        listings = FIXTURES / "reference_listings.sva"
        assert cli("lint", listings) == (0, "", "")
        suite = load_sva(listings)
        assert len(suite) == 6
        checked = 0
        for a in suite:
            text = (f"// {a.comment}\n" if a.comment else "") + a.source_text + "\n"
            for kind in KINDS:
                occurrences = a.source_text.count(";") if kind == "semicolon" else 1
                for occ in range(occurrences):
                    mutated, (lo, hi) = mutate(text, kind, occ)
                    path = tmp_path / f"{a.name}_{kind}_{occ}.sva"
                    path.write_text(mutated)
                    code, out, _ = cli("lint", path)
                    assert code == 1, f"{a.name}: {kind} #{occ} accepted"
                    lines = [int(m.group(1)) for m in re.finditer(r": line (\d+), col \d+: ", out)]
                    assert any(lo <= n <= hi for n in lines), (a.name, kind, occ, out, lo, hi)
                    checked += 1
        assert checked >= 6 * 3


def test_rv_timer_replay_reproduction(criterion, tmp_path):
    with criterion(2, "RV Timer replay: converged, 11 assertions, 12 prompts, 80 ns, 30.0%", limit_s=5.0):
        out = tmp_path / "rv"
        code, _, _ = cli("generate", "--config", RV_CONFIG, "--out", out)
        assert code == 0
        outcome = json.loads((out / "outcome.json").read_text())
        assert outcome["status"] == "converged"
        assert outcome["assertion_count"] == 11
        assert outcome["prompt_count"] == 12
        trace = json.loads((out / "trace.json").read_text())
        assert len(trace["records"][0]["suite"]) == 10
        kinds = [r["verdict"]["kind"] for r in trace["records"]]
        assert kinds == ["SyntaxError"] * 6 + ["SimulationFailure"] * 5 + ["NoError"]
        code, table, _ = cli("report", out)
        assert code == 0
        row = table.splitlines()[2]
        assert re.search(r"\b80 ns\b", row)
        assert table.splitlines()[-1] == "raw assertion errors: 3/10 = 30.0%"


def test_implementation_bug_reproduction(criterion, tmp_path):
    with criterion(3, "full adder: buggy DUT stops with no repair prompt (exit 2), fixed DUT converges",
                   limit_s=2.0):
        listings = load_sva(FIXTURES / "reference_listings.sva")
        code, _, _ = cli("generate", "--config", FA / "full_adder_buggy.replay.run.json", "--out", tmp_path / "b")
        assert code == 2
        outcome = json.loads((tmp_path / "b" / "outcome.json").read_text())
        assert outcome["status"] == "implementation_bug_suspected"
        trace = json.loads((tmp_path / "b" / "trace.json").read_text())
        assert trace["prompt_count"] == 1 and trace["format_retries"] == 0
        assert all(not r["exchanges"] for r in trace["records"])
        generated = load_sva(tmp_path / "b" / "final.sva")
        assert [a.ast for a in generated] == [listings.get("prop_carry_out").ast, listings.get("prop_sum_bits").ast]
        code, _, _ = cli("generate", "--config", FA / "full_adder_fixed.replay.run.json", "--out", tmp_path / "f")
        assert code == 0
        assert json.loads((tmp_path / "f" / "outcome.json").read_text())["status"] == "converged"


def _message(rnd, category):
    severity = rnd.choice(["info", "warning", "error", "fatal"])
    signal = "rst_ni" if category == "missing_signal" else None
    return LogMessage(rnd.choice(["compile", "run"]), severity, category, f"{category} text", signal)


def test_triage_exactness(criterion):
    with criterion(4, "triage: labelled corpus agrees 100%, precedence law holds on 2000 shuffled cases"):
        labels = json.loads((FIXTURES / "logs" / "labels.json").read_text())
        pack = PatternPack.load("generic")
        assert len(labels) >= 24
        for name, want in labels.items():
            raw = (FIXTURES / "logs" / name).read_bytes().decode("utf-8", errors="replace")
            v = classify(parse_log(raw, pack), want["exit_code"])
            assert (v.kind.value, v.sim_kind) == (want["kind"], want["sim_kind"]), name
        per_class = {}
        for name in labels:
            prefix = name.split("_")[0]
            per_class[prefix] = per_class.get(prefix, 0) + 1
        for prefix in ("clean", "syntax", "timing", "missing", "assert", "testcase", "mixed"):
            assert per_class.get(prefix, 0) >= 4, prefix

        rnd = random.Random(20240521)
        cases = 0
        for _ in range(1000):
            ms = [_message(rnd, rnd.choice(CATEGORIES)) for _ in range(rnd.randint(0, 12))]
            code = rnd.randint(0, 3)
            with_syntax = ms + [LogMessage("compile", rnd.choice(["error", "fatal"]), "syntax", "syntax text")]
            rnd.shuffle(with_syntax)
            assert classify(with_syntax, code).kind is VerdictKind.SYNTAX_ERROR
            no_syntax = [m for m in ms if not (m.category == "syntax" and m.is_error)]
            with_timing = no_syntax + [LogMessage("run", "error", "timing", "timing text")]
            rnd.shuffle(with_timing)
            assert classify(with_timing, code).kind is VerdictKind.SIMULATION_FAILURE
            cases += 2
        assert cases >= 1000


def test_budget_and_termination(criterion, tmp_path):
    with criterion(5, "budget: 250 randomized runs, calls <= 1 + 2T, gap-free n", limit_s=30.0):
        base = RunConfig.from_file(FA / "full_adder_fixed.replay.run.json", tmp_path / "out")
        statuses = set()
        for seed in range(250):
            outcome, provider, T = random_run(base, seed, tmp_path / "out")
            check_run(outcome, provider, T)
            statuses.add(outcome.status)
        assert statuses == {"converged", "implementation_bug_suspected", "exhausted"}


def test_determinism(criterion, tmp_path):
    with criterion(6, "determinism: two RV Timer runs give byte-identical trace/final/outcome"):
        out = tmp_path / "rv"
        snapshots = []
        for _ in range(2):
            assert cli("generate", "--config", RV_CONFIG, "--out", out)[0] == 0
            snapshots.append({n: (out / n).read_bytes() for n in ("trace.json", "final.sva", "outcome.json")})
        assert snapshots[0] == snapshots[1]


def test_parser_fixpoint(criterion):
    seen = []

    @settings(max_examples=500, deadline=None, database=None)
    @given(property_asts)
    def fixpoint(ast):
        text = render(ast)
        again = parse_assertion(text)
        assert again == ast
        assert render(again) == text
        seen.append(ast)

    with criterion(7, "parser fixpoint over >= 500 generated ASTs"):
        fixpoint()
        assert len(seen) >= 500


def test_table_rendering(criterion, tmp_path):
    with criterion(8, "report over six fixture runs reproduces LLM Assert. and #Prompts columns"):
        bundles = []
        for design in TABLE_DESIGNS:
            out = tmp_path / design
            assert cli("generate", "--config", FIXTURES / design / f"{design}.replay.run.json", "--out", out)[0] == 0
            bundles.append(out)
        code, first, _ = cli("report", *bundles)
        assert code == 0
        assert cli("report", *bundles)[1] == first
        rows = [line.split() for line in first.splitlines()[2:-1]]
        assert [r[0] for r in rows] == list(TABLE_DESIGNS)
        assert [int(r[2]) for r in rows] == [11, 9, 6, 11, 14, 8]
        assert [int(r[3]) for r in rows] == [12, 9, 8, 14, 8, 9]
        assert lint_sva_text((tmp_path / "rv_timer" / "final.sva").read_text()) == []
