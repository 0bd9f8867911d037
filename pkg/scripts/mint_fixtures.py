#!/usr/bin/env python3
"""Regenerate the replay fixtures (transcripts, canned logs, run configs).

Each design is described by scripted assertion *variants*.  A scripted
provider answers every repair prompt with the next variant of each assertion
named in the prompt, and a fault-table adapter turns the faults attached to
variants into generic-pack log lines.  The real pipeline drives both; the
provider replies and adapter logs it saw are then written out as a replay
transcript and ``iter<N>.log`` files, and the design is re-run from those
files to confirm the replay reproduces the scripted outcome.

The full adder is simulated by ``mini_sim.py`` instead of a fault table.
"""
from __future__ import annotations

import argparse
import json
import re
import shutil
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from svagen.llm import GENERATE, ReplayProvider
from svagen.llm.providers import CompletionProvider
from svagen.pipeline import RunConfig, run_pipeline
from svagen.sim import ASSERTION_FILE, LOG_FILE, ExternalAdapter, SimulationLog, SimulatorAdapter
from svagen.sva.suite import parse_sva_text

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
MINI_SIM = Path(__file__).resolve().parent / "mini_sim.py"

LABEL_MAP = {
    "introduction": ["Introduction"],
    "system_overview": ["Theory of Operation", "Overview"],
    "definitions": ["Definitions", "Signals"],
    "parameters": ["Parameters"],
    "functional_requirements": ["Functional Requirements"],
    "timing_requirements": ["Timing Requirements"],
}


@dataclass
class Variant:
    text: str                      # full block without the comment line
    fault: Optional[tuple] = None  # ("syntax", token, msg) | ("missing", signal) | ("timing", msg, time)


@dataclass
class Design:
    name: str
    top: str
    signals: list                  # (name, width, direction)
    comments: dict                 # assertion name -> comment
    variants: dict                 # assertion name -> [Variant]
    initial: list                  # names emitted by the generation reply
    splits: dict = field(default_factory=dict)  # (name, step) -> [(new name, variant idx)]
    sim_time: str = "100 ns"
    baseline: int = 0
    expect_prompts: int = 0
    expect_assertions: int = 0
    expect_status: str = "converged"
    spec_text: Optional[str] = None


def block(name: str, body: str, clock: str = "posedge clk_i", end: str = "endproperty") -> str:
    return f"property {name};\n@({clock})\n{body};\n{end}\nassert property ({name});"


# -- scripted provider and fault adapter --------------------------------------

_FAILING_RE = re.compile(r"(?<!end )\bproperty\s+([A-Za-z_]\w*)")


class ScriptedProvider(CompletionProvider):
    provider_id = "scripted"

    def __init__(self, design: Design):
        self.design = design
        self.step = {n: 0 for n in design.initial}
        self.transcript = []

    def _render(self, refs) -> str:
        chunks = []
        for name, idx in refs:
            chunks.append(f"// {self.design.comments[name]}\n{self.design.variants[name][idx].text}")
        return "```systemverilog\n" + "\n\n".join(chunks) + "\n```\n"

    def complete(self, prompt) -> str:
        if prompt.purpose == GENERATE:
            text = "Here are the assertions for the listed requirements.\n\n" + \
                self._render([(n, 0) for n in self.design.initial])
        else:
            section = prompt.user_message.split("Failing assertions:", 1)[1].split("Feedback:", 1)[0]
            refs = []
            for name in dict.fromkeys(_FAILING_RE.findall(section)):
                if name not in self.step:
                    continue
                self.step[name] += 1
                split = self.design.splits.get((name, self.step[name]))
                if split:
                    for new, idx in split:
                        self.step[new] = idx
                        refs.append((new, idx))
                else:
                    refs.append((name, self.step[name]))
            text = "Corrected assertions:\n\n" + self._render(refs)
        self.transcript.append({"purpose": prompt.purpose, "text": text})
        return text


class FaultTableAdapter(SimulatorAdapter):
    identity = "fault-table"

    def __init__(self, design: Design):
        self.design = design
        self.faults = {v.text.strip(): (name, v.fault) for name, vs in design.variants.items()
                       for v in vs if v.fault}
        self.logs = {}

    def run(self, workspace, timeout, iteration=0) -> SimulationLog:
        text = (workspace.path / ASSERTION_FILE).read_text()
        located, _ = parse_sva_text(text)
        found = []
        for a in located:
            name, fault = self.faults.get(a.source_text.strip(), (a.name, None))
            if fault:
                found.append((a, fault))
        compile_lines = [f"INFO compiling rtl/{self.design.top}.sv tb/tb_{self.design.top}.sv {ASSERTION_FILE}"]
        run_lines = []
        exit_code = 0
        syntax = [(a, f) for a, f in found if f[0] == "syntax"]
        missing = [(a, f) for a, f in found if f[0] == "missing"]
        timing = [(a, f) for a, f in found if f[0] == "timing"]
        if syntax:
            for a, (_, token, msg) in syntax:
                pos = text.find(a.source_text) + a.source_text.find(token)
                compile_lines.append(f"ERROR[SYNTAX] {ASSERTION_FILE}:{text.count(chr(10), 0, pos) + 1}: {msg}")
            compile_lines.append(f"INFO {len(syntax)} error(s), compilation stopped")
            exit_code = 1
        elif missing:
            for a, (_, signal) in missing:
                compile_lines.append(f"ERROR[ELAB] undeclared signal '{signal}' in {a.name}")
            exit_code = 1
        else:
            run_lines.append(f"INFO {len(located)} assertions bound to {self.design.top}")
            for a, (_, msg, at) in timing:
                run_lines.append(f"ERROR[TIMING] {a.name}: {msg} at {at}")
            if not timing:
                run_lines.append("TESTCASE PASSED all directed tests")
            run_lines.append(f"$finish at {self.design.sim_time}")
        raw = "### PHASE: compile\n" + "\n".join(compile_lines) + "\n"
        if run_lines:
            raw += "### PHASE: run\n" + "\n".join(run_lines) + "\n"
        (workspace.path / LOG_FILE).write_text(raw)
        self.logs[iteration] = (raw, exit_code)
        return SimulationLog(raw, exit_code)


class RecordingAdapter(SimulatorAdapter):
    def __init__(self, inner: SimulatorAdapter):
        self.inner = inner
        self.logs = {}

    def run(self, workspace, timeout, iteration=0) -> SimulationLog:
        log = self.inner.run(workspace, timeout, iteration)
        self.logs[iteration] = (log.raw_text, log.exit_code)
        return log


# -- design files ----------------------------------------------------------------

def rtl_stub(design: Design) -> str:
    ports = [s for s in design.signals if s[2] in ("input", "output")]
    internals = [s for s in design.signals if s[2] == "logic"]
    decl = lambda s: f"[{s[1] - 1}:0] " if s[1] > 1 else ""  # noqa: E731
    lines = [f"// Interface-only model of {design.top} for replay fixtures.", f"module {design.top} ("]
    lines += [f"  {s[2]} logic {decl(s)}{s[0]}{',' if i < len(ports) - 1 else ''}" for i, s in enumerate(ports)]
    lines.append(");")
    lines += [f"  logic {decl(s)}{s[0]};" for s in internals]
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def tb_stub(design: Design) -> str:
    return (f"// Directed testbench shell for {design.top}; replay runs use canned logs.\n"
            f"module tb_{design.top};\n  logic clk_i = 0;\n  always #5 clk_i = ~clk_i;\n"
            f"  {design.top} dut (.*);\nendmodule\n")


def spec_doc(design: Design) -> str:
    if design.spec_text:
        return design.spec_text
    reqs = [design.comments[n] for n in design.initial]
    sigs = "\n".join(f"- {n}: {d} signal, {w} bit{'s' if w > 1 else ''}" for n, w, d in design.signals)
    body = "\n".join(f"{i}. {r[0].upper() + r[1:]}." for i, r in enumerate(reqs, 1))
    return (f"# Introduction\n\nBehavioural summary of the {design.name} block used for replay fixtures.\n\n"
            f"# Signals\n\n{sigs}\n\n# Functional Requirements\n\n{body}\n")


def write_design(design: Design, dest: Path, transcript: list, logs: dict) -> Path:
    shutil.rmtree(dest, ignore_errors=True)
    (dest / "rtl").mkdir(parents=True)
    (dest / "tb").mkdir()
    (dest / "replay").mkdir()
    (dest / "spec.md").write_text(spec_doc(design))
    (dest / "rtl" / f"{design.top}.sv").write_text(rtl_stub(design))
    (dest / "tb" / f"tb_{design.top}.sv").write_text(tb_stub(design))
    save_replay(dest, "replay", transcript, logs)
    return write_config(dest, design, "replay", f"rtl/{design.top}.sv", f"tb/tb_{design.top}.sv")


def save_replay(dest: Path, replay: str, transcript: list, logs: dict, name="transcript") -> None:
    (dest / f"{name}.transcript.json").write_text(json.dumps(transcript, indent=2) + "\n")
    rdir = dest / replay
    shutil.rmtree(rdir, ignore_errors=True)
    rdir.mkdir(parents=True)
    for n, (raw, code) in sorted(logs.items()):
        (rdir / f"iter{n}.log").write_text(raw)
        if code:
            (rdir / f"iter{n}.exit").write_text(f"{code}\n")


def write_config(dest: Path, design: Design, replay: str, rtl: str, tb: str, *,
                 transcript: str = "transcript.transcript.json", config_name: Optional[str] = None,
                 max_iterations: int = 15) -> Path:
    config = {
        "design_name": design.name,
        "spec": "spec.md",
        "label_map": LABEL_MAP,
        "design": {"design_files": [rtl], "testbench_file": tb, "top_module": design.top,
                   "testcase_description": f"directed tests for {design.name}"},
        "provider": {"kind": "replay", "transcript": transcript},
        "adapter": {"kind": "replay", "replay_dir": replay},
        "pattern_pack": "generic",
        "max_iterations": max_iterations,
        "feedback_max_lines": 10,
        "output_dir": f"../../out/{config_name or design.name}",
        "baseline_assertion_count": design.baseline,
    }
    path = dest / f"{config_name or design.name}.replay.run.json"
    path.write_text(json.dumps(config, indent=2) + "\n")
    return path


def mint(design: Design, dest: Path, adapter_factory=None) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        scratch = Path(tmp) / design.name
        config_path = write_design(design, scratch, [], {})
        config = RunConfig.from_file(config_path, Path(tmp) / "out")
        provider = ScriptedProvider(design)
        adapter = adapter_factory(design) if adapter_factory else FaultTableAdapter(design)
        run_pipeline(config, provider=provider, adapter=adapter)
        write_design(design, dest, provider.transcript, adapter.logs)
    verify(dest / f"{design.name}.replay.run.json", design)


def verify(config_path: Path, design: Design) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        config = RunConfig.from_file(config_path, Path(tmp))
        outcome = run_pipeline(config)
        got = (outcome.status, len(outcome.suite), outcome.trace.prompt_count)
        want = (design.expect_status, design.expect_assertions, design.expect_prompts)
        status = "ok" if got == want else "MISMATCH"
        print(f"{config_path.relative_to(ROOT)}: {got[0]}, {got[1]} assertions, {got[2]} prompts [{status}]")
        if got != want:
            raise SystemExit(f"expected {want}")


# -- designs -------------------------------------------------------------------

def rv_timer() -> Design:
    S = lambda name, body, **kw: Variant(block(name, body, **kw))  # noqa: E731
    inc, rst = "tick_count_increment", "tick_count_reset_on_reset_deassert"
    hold = "p_mtime_hold_when_inactive"
    variants = {
        "p_reset_tick_count": [Variant(
            "property p_reset_tick_count;\n@(posedge clk_i) (!rst_ni) |-> (tick_count == 12'h0);\n"
            "end property\nassert property (p_reset_tick_count);")],
        "p_tick_count_increment": [Variant(
            "property p_tick_count_increment;\n@(posedge clk_i) (active && (tick_count < prescaler)) |-> "
            "(tick_count == $past(tick_count) + 1);\nend property\nassert property (p_tick_count_increment);",
            ("missing", "rst_ni"))],
        "p_tick_count_wrap": [S("p_tick_count_wrap", "(active && (tick_count == prescaler)) |=> (tick_count == 12'h0)")],
        "p_tick_on_prescaler_match": [S("p_tick_on_prescaler_match", "(active && (tick_count == prescaler)) |-> tick")],
        "p_reset_mtime": [S("p_reset_mtime", "(!rst_ni) |-> (mtime == 64'h0)")],
        "p_mtime_advance_on_tick": [S("p_mtime_advance_on_tick", "(rst_ni && tick) |=> (mtime == $past(mtime) + step)")],
        "p_intr_when_mtime_reaches_cmp": [
            Variant(block("p_intr_when_mtime_reaches_cmp", "(mtime >= mtimecmp) |-> (intr_o == event)"),
                    ("syntax", "event", "token missing: expression expected before reserved word 'event'")),
            S("p_intr_when_mtime_reaches_cmp", "(mtime >= mtimecmp) |-> intr_o"),
        ],
        "p_no_intr_below_cmp": [S("p_no_intr_below_cmp", "(mtime < mtimecmp) |-> !intr_o")],
        hold: [
            Variant(block(hold, "(rst_ni && !active) |=> (time == $past(time))"),
                    ("syntax", "time", "identifier missing: reserved word 'time' cannot name a signal")),
            Variant(f"property {hold};\n@(posedge clk_i)\n(rst_ni && !active) |=> (mtime == $past(mtime))\n"
                    f"endproperty\nassert property ({hold});"),
            S(hold, "(rst_ni && !active) |=> (mtime == $past(mtime,))"),
            Variant(f"property {hold};\n@(posedge clk_i)\n(rst_ni && !active) |=> (mtime == $past(mtime));\n"
                    f"assert property ({hold});"),
            S(hold, "(rst_ni && !active) |=> (mtime[63:64] == $past(mtime[63:64]))"),
            S(hold, "(rst_ni && !active) ##1 (mtime == $past(mtime))"),
            S(hold, "(rst_ni && !active) |=> (mtime == $past(mtime))"),
        ],
        "p_no_tick_when_inactive": [S("p_no_tick_when_inactive", "(!active) |-> !tick")],
        inc: [
            Variant(block(inc, "(rst_ni && active && (tick_count < prescaler)) |-> (tick_count == $past(tick_count) + 1)"),
                    ("timing", "consequent sampled in the antecedent cycle", "25 ns")),
            Variant(block(inc, "(rst_ni && active && (tick_count < prescaler)) |=> (tick_count == $past(tick_count, 2) + 1)"),
                    ("timing", "compared against a value two cycles old", "35 ns")),
            Variant(block(inc, "(active && (tick_count < prescaler)) |=> (tick_count == $past(tick_count) + 1)"),
                    ("timing", "increment expected while reset is asserted", "5 ns")),
            Variant(block(inc, "(rst_ni && active && (tick_count <= prescaler)) |=> (tick_count == $past(tick_count) + 1)"),
                    ("timing", "increment expected on the prescaler match cycle", "45 ns")),
            Variant("property tick_count_increment;\n@(posedge clk_i)\n(rst_ni && active && (tick_count < prescaler)) "
                    "|=> (tick_count == $past(tick_count) + 1);\nendproperty\nassert property (tick_count_increment);"),
        ],
        rst: [
            Variant(block(rst, "(!$past(rst_ni, 1) && rst_ni) |=> (tick_count == 0)"),
                    ("timing", "tick_count checked one cycle after reset release", "15 ns")),
            Variant("property tick_count_reset_on_reset_deassert;\n@(posedge clk_i)\n(!$past(rst_ni, 1) && rst_ni) "
                    "-> (tick_count == 0);\nendproperty\nassert property (tick_count_reset_on_reset_deassert);"),
        ],
    }
    comments = {
        "p_reset_tick_count": "Assertion to check if tick_count resets to 0 on reset",
        "p_tick_count_increment": "Assertion to check if tick_count increments correctly",
        "p_tick_count_wrap": "Assertion to check that tick_count wraps to zero after matching prescaler",
        "p_tick_on_prescaler_match": "Assertion to check that a tick is produced when tick_count matches prescaler",
        "p_reset_mtime": "Assertion to check that mtime clears on reset",
        "p_mtime_advance_on_tick": "Assertion to check that mtime advances by step after a tick",
        "p_intr_when_mtime_reaches_cmp": "Assertion to check that intr_o is raised once mtime reaches mtimecmp",
        "p_no_intr_below_cmp": "Assertion to check that intr_o stays low below mtimecmp",
        hold: "Assertion to check that mtime holds while the timer is inactive",
        "p_no_tick_when_inactive": "Assertion to check that no tick is produced while inactive",
        inc: "Assertion for tick_count increment",
        rst: "Assertion for tick_count reset on reset deassertion",
    }
    signals = [("clk_i", 1, "input"), ("rst_ni", 1, "input"), ("active", 1, "input"),
               ("prescaler", 12, "input"), ("step", 8, "input"), ("mtimecmp", 64, "input"),
               ("intr_o", 1, "output"), ("tick", 1, "logic"), ("tick_count", 12, "logic"),
               ("mtime", 64, "logic")]
    spec = (FIXTURES / "rv_timer" / "spec.md").read_text() if (FIXTURES / "rv_timer" / "spec.md").exists() else None
    return Design(
        name="rv_timer", top="rv_timer", signals=signals, comments=comments, variants=variants,
        initial=[n for n in variants if n not in (inc, rst)],
        splits={("p_tick_count_increment", 1): [(inc, 0), (rst, 0)]},
        sim_time="80 ns", baseline=0, expect_prompts=12, expect_assertions=11, spec_text=spec,
    )


def synthetic(name: str, signals, rows, *, faulty: dict, long_chain: str, repairs: int,
              sim_time: str, baseline: int, prompts: int) -> Design:
    """Design whose faulty rows start with an undeclared signal.

    Every faulty row is fixed by the first repair except ``long_chain``, which
    then fails timing checks until ``repairs`` rounds have been used.
    """
    variants, comments = {}, {}
    for pname, comment, body in rows:
        comments[pname] = comment
        good = Variant(block(pname, body))
        if pname not in faulty:
            variants[pname] = [good]
            continue
        typo, real = faulty[pname]
        chain = [Variant(block(pname, re.sub(rf"\b{real}\b", typo, body)), ("missing", typo))]
        if pname == long_chain:
            for k in range(1, repairs):
                if k == 1:
                    bad = body.replace("|=>", "|->")
                else:
                    bad = re.sub(r"\$past\((\w+)\)", rf"$past(\1, {k})", body)
                chain.append(Variant(block(pname, bad), ("timing", f"check fires {k} cycle(s) off the reference",
                                                          f"{10 * k + 5} ns")))
        chain.append(good)
        variants[pname] = chain
    return Design(name=name, top=name, signals=signals, comments=comments, variants=variants,
                  initial=[r[0] for r in rows], sim_time=sim_time, baseline=baseline,
                  expect_prompts=prompts, expect_assertions=len(rows))


def pattgen() -> Design:
    sig = [("clk_i", 1, "input"), ("rst_ni", 1, "input"), ("enable", 1, "input"), ("polarity", 1, "input"),
           ("prediv", 16, "input"), ("len", 6, "input"), ("reps", 10, "input"), ("pcl_o", 1, "output"),
           ("pda_o", 1, "output"), ("done_o", 1, "output"), ("clk_cnt", 16, "logic"), ("bit_cnt", 6, "logic"),
           ("rep_cnt", 10, "logic")]
    rows = [
        ("p_clk_cnt_reset", "clk_cnt clears on reset", "(!rst_ni) |-> (clk_cnt == 0)"),
        ("p_clk_cnt_count", "clk_cnt counts up to prediv while enabled",
         "(rst_ni && enable && (clk_cnt < prediv)) |=> (clk_cnt == $past(clk_cnt) + 1)"),
        ("p_clk_cnt_wrap", "clk_cnt wraps after reaching prediv", "(enable && (clk_cnt == prediv)) |=> (clk_cnt == 0)"),
        ("p_bit_cnt_hold", "bit_cnt holds between divided clock edges",
         "(rst_ni && enable && (clk_cnt != prediv)) |=> (bit_cnt == $past(bit_cnt))"),
        ("p_bit_cnt_limit", "bit_cnt never exceeds len", "(rst_ni && enable) |-> (bit_cnt <= len)"),
        ("p_rep_cnt_limit", "rep_cnt never exceeds reps", "(rst_ni && enable) |-> (rep_cnt <= reps)"),
        ("p_done_when_finished", "done_o rises after the last repetition",
         "(enable && (rep_cnt == reps) && (bit_cnt == len) && (clk_cnt == prediv)) |=> done_o"),
        ("p_idle_outputs", "pcl_o rests at the idle polarity when disabled", "(rst_ni && !enable) |-> (pcl_o == polarity)"),
        ("p_no_done_in_reset", "done_o stays low during reset", "(!rst_ni) |-> !done_o"),
    ]
    return synthetic("pattgen", sig, rows, faulty={"p_clk_cnt_count": ("pattern_en", "enable"),
                                                   "p_bit_cnt_hold": ("prediv_ch0", "prediv"),
                                                   "p_done_when_finished": ("rep_count", "rep_cnt")},
                     long_chain="p_clk_cnt_count", repairs=8, sim_time="110 ns", baseline=0, prompts=9)


def gpio() -> Design:
    sig = [("clk_i", 1, "input"), ("rst_ni", 1, "input"), ("data_in", 32, "input"), ("out_wr", 1, "input"),
           ("out_wdata", 32, "input"), ("intr_enable", 32, "input"), ("data_out", 32, "output"),
           ("data_oe", 32, "output"), ("intr_o", 32, "output"), ("intr_state", 32, "logic")]
    rows = [
        ("p_out_reset", "data_out clears on reset", "(!rst_ni) |-> (data_out == 0)"),
        ("p_oe_reset", "output enables clear on reset", "(!rst_ni) |-> (data_oe == 0)"),
        ("p_out_write", "a register write updates data_out on the next cycle",
         "(rst_ni && out_wr) |=> (data_out == $past(out_wdata))"),
        ("p_out_hold", "data_out holds without a write", "(rst_ni && !out_wr) |=> (data_out == $past(data_out))"),
        ("p_intr_masked", "interrupts only fire on enabled bits", "(rst_ni && (intr_enable == 0)) |-> (intr_o == 0)"),
        ("p_intr_follows_state", "intr_o equals masked interrupt state", "rst_ni |-> (intr_o == (intr_state & intr_enable))"),
    ]
    return synthetic("gpio", sig, rows, faulty={"p_out_hold": ("direct_out", "data_out"),
                                                "p_intr_follows_state": ("intr_status", "intr_state")},
                     long_chain="p_out_hold", repairs=7, sim_time="190 ns", baseline=0, prompts=8)


def rom_ctrl() -> Design:
    sig = [("clk_i", 1, "input"), ("rst_ni", 1, "input"), ("rom_req", 1, "input"), ("rom_addr", 13, "input"),
           ("kmac_done", 1, "input"), ("digest_match", 1, "input"), ("rom_gnt", 1, "output"),
           ("rom_rvalid", 1, "output"), ("check_done", 1, "output"), ("check_good", 1, "output"),
           ("alert_o", 1, "output"), ("read_cnt", 13, "logic"), ("checker_busy", 1, "logic")]
    rows = [
        ("p_no_grant_in_reset", "rom_gnt stays low in reset", "(!rst_ni) |-> !rom_gnt"),
        ("p_no_grant_while_checking", "bus requests are not granted while the checker runs", "checker_busy |-> !rom_gnt"),
        ("p_rvalid_after_grant", "read data is valid the cycle after a grant", "(rst_ni && rom_req && rom_gnt) |=> rom_rvalid"),
        ("p_no_rvalid_without_grant", "rvalid needs a grant in the previous cycle", "(rst_ni && rom_rvalid) |-> $past(rom_gnt)"),
        ("p_read_cnt_reset", "read_cnt clears on reset", "(!rst_ni) |-> (read_cnt == 0)"),
        ("p_read_cnt_advance", "read_cnt advances while the checker runs",
         "(rst_ni && checker_busy && !kmac_done) |=> (read_cnt == $past(read_cnt) + 1)"),
        ("p_done_after_kmac", "check_done rises after the digest completes", "(rst_ni && checker_busy && kmac_done) |=> check_done"),
        ("p_done_sticky", "check_done stays high once set", "(rst_ni && check_done) |=> check_done"),
        ("p_good_needs_match", "check_good needs a matching digest", "(check_done && check_good) |-> digest_match"),
        ("p_alert_on_mismatch", "a digest mismatch raises an alert", "(check_done && !digest_match) |-> alert_o"),
        ("p_no_good_before_done", "check_good stays low until check_done", "(!check_done) |-> !check_good"),
    ]
    return synthetic("rom_ctrl", sig, rows, faulty={"p_read_cnt_advance": ("kmac_digest_done", "kmac_done"),
                                                    "p_good_needs_match": ("digest_ok", "digest_match"),
                                                    "p_alert_on_mismatch": ("fatal_alert", "alert_o")},
                     long_chain="p_read_cnt_advance", repairs=13, sim_time="250 ns", baseline=6, prompts=14)


def sram_ctrl() -> Design:
    sig = [("clk_i", 1, "input"), ("rst_ni", 1, "input"), ("req", 1, "input"), ("we", 1, "input"),
           ("addr", 10, "input"), ("init_req", 1, "input"), ("key_valid", 1, "input"), ("gnt", 1, "output"),
           ("rvalid", 1, "output"), ("init_done", 1, "output"), ("scr_key_valid", 1, "output"),
           ("alert_o", 1, "output"), ("init_cnt", 10, "logic"), ("init_busy", 1, "logic")]
    rows = [
        ("p_no_gnt_in_reset", "gnt stays low in reset", "(!rst_ni) |-> !gnt"),
        ("p_no_gnt_during_init", "no grants while memory initialisation runs", "init_busy |-> !gnt"),
        ("p_read_rvalid", "reads return data one cycle after the grant", "(rst_ni && req && gnt && !we) |=> rvalid"),
        ("p_write_no_rvalid", "writes never produce rvalid", "(rst_ni && req && gnt && we) |=> !rvalid"),
        ("p_rvalid_needs_gnt", "rvalid needs a grant in the previous cycle", "rvalid |-> $past(gnt)"),
        ("p_init_cnt_reset", "init_cnt clears on reset", "(!rst_ni) |-> (init_cnt == 0)"),
        ("p_init_cnt_advance", "init_cnt advances during initialisation",
         "(rst_ni && init_busy && (init_cnt < 10'h3ff)) |=> (init_cnt == $past(init_cnt) + 1)"),
        ("p_init_starts", "an init request starts initialisation", "(rst_ni && init_req && !init_busy) |=> init_busy"),
        ("p_init_done_at_end", "init_done rises when the last word is written",
         "(init_busy && (init_cnt == 10'h3ff)) |=> init_done"),
        ("p_init_done_clear_on_req", "a new init request clears init_done", "(rst_ni && init_req) |=> !init_done"),
        ("p_key_valid_follows", "scr_key_valid mirrors the key interface", "(rst_ni && key_valid) |=> scr_key_valid"),
        ("p_key_invalid_reset", "scr_key_valid clears on reset", "(!rst_ni) |-> !scr_key_valid"),
        ("p_no_gnt_without_key", "no grants without a valid scrambling key", "(!scr_key_valid) |-> !gnt"),
        ("p_no_alert_in_reset", "alert_o stays low during reset", "(!rst_ni) |-> !alert_o"),
    ]
    return synthetic("sram_ctrl", sig, rows, faulty={"p_init_cnt_advance": ("init_busy_q", "init_busy"),
                                                     "p_read_rvalid": ("sram_rvalid", "rvalid"),
                                                     "p_no_gnt_without_key": ("key_seed_valid", "scr_key_valid")},
                     long_chain="p_init_cnt_advance", repairs=7, sim_time="100 ns", baseline=0, prompts=8)


def adc_ctrl() -> Design:
    sig = [("clk_i", 1, "input"), ("rst_ni", 1, "input"), ("adc_en", 1, "input"), ("adc_data", 10, "input"),
           ("adc_data_valid", 1, "input"), ("thresh_lo", 10, "input"), ("thresh_hi", 10, "input"),
           ("pwrup_time", 4, "input"), ("adc_pd_o", 1, "output"), ("match_o", 1, "output"),
           ("intr_o", 1, "output"), ("pwrup_cnt", 4, "logic"), ("sampled", 10, "logic")]
    rows = [
        ("p_pd_in_reset", "the ADC stays powered down in reset", "(!rst_ni) |-> adc_pd_o"),
        ("p_pd_when_disabled", "the ADC is powered down when disabled", "(rst_ni && !adc_en) |-> adc_pd_o"),
        ("p_pwrup_cnt_reset", "pwrup_cnt clears on reset", "(!rst_ni) |-> (pwrup_cnt == 0)"),
        ("p_pwrup_cnt_advance", "pwrup_cnt counts the power-up delay",
         "(rst_ni && adc_en && (pwrup_cnt < pwrup_time)) |=> (pwrup_cnt == $past(pwrup_cnt) + 1)"),
        ("p_sample_capture", "a valid conversion is captured on the next cycle",
         "(rst_ni && adc_data_valid) |=> (sampled == $past(adc_data))"),
        ("p_match_in_window", "match_o is set for samples inside the window",
         "(rst_ni && (sampled >= thresh_lo) && (sampled <= thresh_hi)) |-> match_o"),
        ("p_no_match_outside", "match_o is clear below the window", "(rst_ni && (sampled < thresh_lo)) |-> !match_o"),
        ("p_intr_on_match", "a window match raises the interrupt", "(rst_ni && match_o) |=> intr_o"),
    ]
    return synthetic("adc_ctrl", sig, rows, faulty={"p_pwrup_cnt_advance": ("adc_enable", "adc_en"),
                                                    "p_sample_capture": ("adc_chn_value", "adc_data")},
                     long_chain="p_pwrup_cnt_advance", repairs=8, sim_time="460 ns", baseline=5, prompts=9)


# -- full adder ------------------------------------------------------------------

FULL_ADDER_SPEC = """\
# Introduction

A 4-bit ripple-carry adder adds two 4-bit operands and a carry-in.

# Signals

- A: first operand, 4 bits
- B: second operand, 4 bits
- C0: carry-in
- C1, C2, C3: internal ripple carries
- S: 4-bit sum
- C4: carry-out

# Functional Requirements

1. The carry-out C4 is the carry generated by bit 3: A[3] and B[3], or C3 with A[3] xor B[3].
2. Each sum bit S[i] is A[i] xor B[i] xor the carry into bit i.

# Timing Requirements

- Outputs are combinational and settle within one input period.
"""


def full_adder() -> Design:
    listing = (FIXTURES / "reference_listings.sva").read_text()
    located, _ = parse_sva_text(listing)
    picked = {a.name: a for a in located if a.name in ("prop_carry_out", "prop_sum_bits")}
    return Design(
        name="full_adder", top="full_adder_4bit",
        signals=[], comments={n: a.comment for n, a in picked.items()},
        variants={n: [Variant(a.source_text)] for n, a in picked.items()},
        initial=list(picked), expect_prompts=1, expect_assertions=2, spec_text=FULL_ADDER_SPEC,
    )


def mint_full_adder(dest: Path) -> None:
    design = full_adder()
    shared_rtl = {v: dest / f"rtl_{v}" / "full_adder_4bit.sv" for v in ("buggy", "fixed")}
    for p in shared_rtl.values():
        if not p.exists():
            raise SystemExit(f"missing {p}")
    (dest / "spec.md").write_text(design.spec_text)
    transcript = None
    for variant, status in (("buggy", "implementation_bug_suspected"), ("fixed", "converged")):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = write_config(dest, design, f"replay_{variant}", f"rtl_{variant}/full_adder_4bit.sv",
                               "tb/tb_full_adder.sv", config_name=f"full_adder_{variant}", max_iterations=3)
            (dest / "transcript.transcript.json").write_text("[]\n")
            (dest / f"replay_{variant}").mkdir(exist_ok=True)
            config = RunConfig.from_file(cfg, Path(tmp) / "out")
            provider = ScriptedProvider(design)
            sim = [sys.executable, str(MINI_SIM)]
            adapter = RecordingAdapter(ExternalAdapter((*sim, "compile", "{{workspace}}"),
                                                       (*sim, "run", "{{workspace}}"), design.top))
            run_pipeline(config, provider=provider, adapter=adapter)
            transcript = provider.transcript
            save_replay(dest, f"replay_{variant}", transcript, adapter.logs)
        design.expect_status = status
        verify(cfg, design)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="Regenerate replay fixtures under fixtures/.")
    ap.add_argument("designs", nargs="*", help="subset of designs to mint (default: all)")
    args = ap.parse_args(argv)
    builders = {"rv_timer": rv_timer, "pattgen": pattgen, "gpio": gpio, "rom_ctrl": rom_ctrl,
                "sram_ctrl": sram_ctrl, "adc_ctrl": adc_ctrl}
    wanted = args.designs or [*builders, "full_adder"]
    for name in wanted:
        if name == "full_adder":
            mint_full_adder(FIXTURES / "full_adder")
        else:
            mint(builders[name](), FIXTURES / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
