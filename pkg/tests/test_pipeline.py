import dataclasses
import json

import pytest

from svagen.llm import CompletionProvider, ReplayProvider
from svagen.llm.providers import ProviderTimeout
from svagen.pipeline import (BUG_SUSPECTED, CONVERGED, EXHAUSTED, ConfigError, DuplicateName, RunConfig,
                             merge_repair, run_pipeline)
from svagen.sim import SimulationLog, SimulatorAdapter, SimulatorNotFound
from svagen.sva import Assertion, AssertionSuite, load_sva, validate_suite

from conftest import FIXTURES
from random_runs import BUG, CLEAN, TIMING, block, check_run, fence, random_run

FA_CONFIG = FIXTURES / "full_adder" / "full_adder_fixed.replay.run.json"


def a(name, body="a |-> b"):
    return Assertion.from_text(f"property {name}; {body}; endproperty assert property ({name});")


def suite(*items):
    return AssertionSuite("d", tuple(items))


def names(s):
    return s.names


# -- merge -------------------------------------------------------------------

def test_merge_replaces_in_place():
    new = a("A2", "c |-> d")
    merged = merge_repair(suite(a("A1"), a("A2")), suite(new))
    assert names(merged) == ["A1", "A2"] and merged.get("A2") is new


def test_merge_split_without_failing_keeps_old():
    merged = merge_repair(suite(a("A1"), a("A2")), suite(a("A2a"), a("A2b")))
    assert names(merged) == ["A1", "A2", "A2a", "A2b"]


def test_merge_split_retires_failing_original():
    merged = merge_repair(suite(a("A1"), a("A2")), suite(a("A2a"), a("A2b")), failing=["A2"])
    assert names(merged) == ["A1", "A2a", "A2b"]


def test_merge_without_new_names_retires_nothing():
    merged = merge_repair(suite(a("A1"), a("A2")), suite(a("A1")), failing=["A1", "A2"])
    assert names(merged) == ["A1", "A2"]


def test_merge_into_empty():
    assert names(merge_repair(suite(), suite(a("A1")))) == ["A1"]


def test_merge_rejects_duplicates():
    with pytest.raises(DuplicateName):
        merge_repair(suite(a("A1")), suite(a("A2"), a("A2")))


# -- fixtures ------------------------------------------------------------------

def config(tmp_path, **changes):
    cfg = RunConfig.from_file(FA_CONFIG, tmp_path / "out")
    return dataclasses.replace(cfg, **changes)


class Scripted(CompletionProvider):
    provider_id = "scripted"

    def __init__(self, texts):
        self.texts = list(texts)
        self.prompts = []

    def complete(self, prompt):
        self.prompts.append(prompt)
        if not self.texts:
            raise ProviderTimeout("script ran dry")
        return self.texts.pop(0)


class Canned(SimulatorAdapter):
    identity = "canned"

    def __init__(self, logs):
        self.logs = list(logs)
        self.iterations = []

    def run(self, workspace, timeout, iteration=0):
        self.iterations.append(iteration)
        raw, code = self.logs.pop(0) if self.logs else ("$finish at 10 ns\n", 0)
        return SimulationLog(raw, code)


def test_never_fixing_run_exhausts_after_t_repairs(tmp_path):
    broken = fence("property p_a;\n@(posedge C0) A[0] |-> ;\nendproperty\nassert property (p_a);")
    provider = Scripted([broken] * 4)
    outcome = run_pipeline(config(tmp_path, max_iterations=3), provider, Canned([]))
    assert outcome.status == EXHAUSTED and outcome.exit_code == 3
    assert [r.n for r in outcome.trace.records] == [0, 1, 2, 3]
    assert all(r.gate == "local" for r in outcome.trace.records)
    assert outcome.trace.provider_calls == 4
    summary = json.loads((tmp_path / "out" / "outcome.json").read_text())
    assert summary["status"] == "exhausted"
    assert summary["advice"] == "examine design implementation and restart"


def test_bug_stops_without_prompting(tmp_path):
    provider = Scripted([fence(block("p_a"))] + [fence(block("p_a"))] * 5)
    outcome = run_pipeline(config(tmp_path), provider, Canned([BUG]))
    assert outcome.status == BUG_SUSPECTED and outcome.exit_code == 2
    assert len(provider.prompts) == 1
    assert outcome.evidence and "TESTCASE FAILED" in outcome.evidence[0].text


def test_timing_repair_then_converge(tmp_path):
    provider = Scripted([fence(block("p_a")), fence(block("p_a", "A[0] |=> S[0]"))])
    adapter = Canned([TIMING, CLEAN])
    outcome = run_pipeline(config(tmp_path), provider, adapter)
    assert outcome.status == CONVERGED
    assert adapter.iterations == [0, 1]
    first = outcome.trace.records[0]
    assert first.failing == ["p_a"] and first.gate == "simulator"
    assert "|=>" in outcome.suite.get("p_a").source_text
    assert (tmp_path / "out" / "workspaces" / "iter_01" / "generated_assertions.sv").is_file()


def test_format_retry_then_pending_extraction_error(tmp_path):
    provider = Scripted([fence(block("p_a")), "sorry", "still prose", fence(block("p_a"))])
    outcome = run_pipeline(config(tmp_path), provider, Canned([TIMING, CLEAN]))
    records = outcome.trace.records
    assert [e.prompt.format_retry for e in records[0].exchanges] == [False, True]
    assert records[1].gate == "extraction"
    assert outcome.status == CONVERGED
    assert outcome.trace.prompt_count == 3 and outcome.trace.provider_calls == 4


def test_duplicate_names_in_reply_trigger_format_retry(tmp_path):
    provider = Scripted([fence(block("p_a")), fence(block("p_a"), block("p_a")), fence(block("p_a"))])
    outcome = run_pipeline(config(tmp_path), provider, Canned([TIMING, CLEAN]))
    assert [e.prompt.format_retry for e in outcome.trace.records[0].exchanges] == [False, True]
    assert outcome.status == CONVERGED


def test_provider_error_becomes_exhausted(tmp_path):
    outcome = run_pipeline(config(tmp_path), Scripted([fence(block("p_a"))]), Canned([TIMING]))
    assert outcome.status == EXHAUSTED and "script ran dry" in outcome.error
    assert outcome.trace.records[-1].error


def test_generation_failure_becomes_exhausted(tmp_path):
    outcome = run_pipeline(config(tmp_path), Scripted([]), Canned([]))
    assert outcome.status == EXHAUSTED and [r.n for r in outcome.trace.records] == [0]


def test_simulator_error_becomes_exhausted(tmp_path):
    class Broken(SimulatorAdapter):
        def run(self, workspace, timeout, iteration=0):
            raise SimulatorNotFound("vsim")

    outcome = run_pipeline(config(tmp_path), Scripted([fence(block("p_a"))]), Broken())
    assert outcome.status == EXHAUSTED and "vsim" in outcome.error


def test_full_adder_replay_runs(tmp_path):
    fixed = run_pipeline(RunConfig.from_file(FA_CONFIG, tmp_path / "fixed"))
    assert fixed.status == CONVERGED and fixed.trace.prompt_count == 1
    assert validate_suite(load_sva(tmp_path / "fixed" / "final.sva")) == []
    buggy = run_pipeline(RunConfig.from_file(FIXTURES / "full_adder" / "full_adder_buggy.replay.run.json",
                                             tmp_path / "buggy"))
    assert buggy.status == BUG_SUSPECTED and buggy.trace.prompt_count == 1


def test_rerun_clears_old_bundle(tmp_path):
    out = tmp_path / "out"
    run_pipeline(config(tmp_path), Scripted([fence(block("p_a")), fence(block("p_a"))]), Canned([TIMING, CLEAN]))
    assert (out / "workspaces" / "iter_01").exists()
    run_pipeline(config(tmp_path), Scripted([fence(block("p_a"))]), Canned([CLEAN]))
    assert not (out / "workspaces" / "iter_01").exists()


# -- configuration errors ---------------------------------------------------

def write_config(tmp_path, **changes):
    here = FA_CONFIG.parent
    data = json.loads(FA_CONFIG.read_text())
    data["spec"] = str(here / data["spec"])
    design = data["design"]
    design["design_files"] = [str(here / f) for f in design["design_files"]]
    design["testbench_file"] = str(here / design["testbench_file"])
    data["provider"]["transcript"] = str(here / data["provider"]["transcript"])
    data["adapter"]["replay_dir"] = str(here / data["adapter"]["replay_dir"])
    data.update(changes)
    for k in [k for k, v in changes.items() if v is None]:
        del data[k]
    path = tmp_path / "case.run.json"
    path.write_text(json.dumps(data))
    return path


@pytest.mark.parametrize("changes", [
    {"max_iterations": 0},
    {"spec": "missing.md"},
    {"colour": "blue"},
    {"design_name": None},
    {"provider": {"kind": "replay", "transcript": str(FA_CONFIG.parent / "transcript.transcript.json"), "api_key": "x"}},
    {"provider": {"kind": "remote"}},
    {"adapter": {"kind": "external", "compile_cmd": ["sim", "{{nowhere}}"]}},
    {"label_map": {"notes": ["Intro"]}},
])
def test_config_errors(tmp_path, changes):
    with pytest.raises(ConfigError):
        RunConfig.from_file(write_config(tmp_path, **changes), tmp_path / "out")


def test_rewritten_config_is_valid(tmp_path):
    assert RunConfig.from_file(write_config(tmp_path), tmp_path / "out").max_iterations == 3


def test_unknown_template_placeholder_is_config_error(tmp_path):
    bad = tmp_path / "gen.txt"
    bad.write_text("{{spec}} {{mystery}}\n")
    cfg = config(tmp_path, templates={"generate": str(bad)})
    with pytest.raises(ConfigError):
        run_pipeline(cfg)


def test_config_paths_resolve_against_config_dir(tmp_path):
    cfg = RunConfig.from_file(FA_CONFIG, tmp_path)
    assert cfg.spec_path == (FIXTURES / "full_adder" / "spec.md").resolve()
    assert cfg.adapter.replay_dir == (FIXTURES / "full_adder" / "replay_fixed").resolve()


# -- budget and termination --------------------------------------------------

def test_randomized_budget(tmp_path):
    base = config(tmp_path)
    for seed in range(120):
        outcome, provider, T = random_run(base, seed, tmp_path / f"r{seed % 3}")
        check_run(outcome, provider, T)


def test_replay_transcript_never_fixing(tmp_path):
    broken = fence(block("p_a", "A[0] |-> "))
    entries = [{"purpose": "generate", "text": broken}] + [{"purpose": "repair", "text": broken}] * 20
    for T in range(1, 6):
        provider = ReplayProvider(entries)
        outcome = run_pipeline(config(tmp_path, max_iterations=T), provider, Canned([]))
        assert outcome.status == EXHAUSTED
        assert provider.cursor == 1 + T
        assert [r.n for r in outcome.trace.records] == list(range(T + 1))
