"""End-to-end generate / check / triage / repair loop."""
from __future__ import annotations

import json
import logging
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .llm import (ConversationHistory, ExtractionFailure, Prompt, PromptTemplates, ProviderError,
                  ProviderResponse, RemoteProvider, ReplayProvider, build_format_repair_prompt,
                  build_generation_prompt, build_repair_prompt, complete, extract_assertions,
                  failing_names)
from .llm.providers import CompletionProvider, api_key_from_env
from .sim import (ASSERTION_FILE, DesignBundle, ExternalAdapter, ReplayAdapter, SimulationError,
                  SimulationTimeout, SimulatorAdapter, check_recipe, compose_workspace, run_simulation)
from .spec_format import LABELS, FormattedSpec, SpecFormatError, load_formatted
from .sva.parser import render_diagnostic
from .sva.suite import AssertionSuite, Origin, validate_suite
from .triage import (LogMessage, MalformedPack, PatternPack, TriageVerdict, VerdictKind, attribute,
                     classify, parse_log, report_sim_time)

log = logging.getLogger(__name__)

CONVERGED = "converged"
BUG_SUSPECTED = "implementation_bug_suspected"
EXHAUSTED = "exhausted"

EXIT_CODES = {CONVERGED: 0, BUG_SUSPECTED: 2, EXHAUSTED: 3}
EXIT_CONFIG_ERROR = 4

ADVICE = {
    CONVERGED: "assertion suite passed all testcases",
    BUG_SUSPECTED: "manually inspect the design implementation for a bug",
    EXHAUSTED: "examine design implementation and restart",
}

BUNDLE_FILES = ("trace.json", "final.sva", "outcome.json", "timing.json")


class ConfigError(Exception):
    pass


class DuplicateName(ValueError):
    pass


# -- configuration ----------------------------------------------------------

@dataclass
class ProviderConfig:
    kind: str = "replay"
    endpoint: str = ""
    model: str = ""
    timeout_ms: int = 60_000
    max_retries: int = 2
    temperature: Optional[float] = 0.0
    transcript: Optional[Path] = None

    def build(self) -> CompletionProvider:
        if self.kind == "replay":
            return ReplayProvider.from_file(self.transcript)
        return RemoteProvider(self.endpoint, self.model, api_key_from_env(), self.timeout_ms,
                              self.max_retries, self.temperature)


@dataclass
class AdapterConfig:
    kind: str = "replay"
    compile_cmd: tuple = ()
    run_cmd: tuple = ()
    replay_dir: Optional[Path] = None
    timeout_ms: int = 600_000

    def build(self, top: str) -> SimulatorAdapter:
        if self.kind == "replay":
            return ReplayAdapter(self.replay_dir)
        return ExternalAdapter(tuple(self.compile_cmd), tuple(self.run_cmd), top)


@dataclass
class RunConfig:
    design_name: str
    spec_path: Path
    design: DesignBundle
    label_map: dict = field(default_factory=dict)
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    adapter: AdapterConfig = field(default_factory=AdapterConfig)
    pattern_pack: str = "generic"
    templates: dict = field(default_factory=dict)
    max_iterations: int = 10
    feedback_max_lines: int = 10
    output_dir: Path = Path("out")
    baseline_assertion_count: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.feedback_max_lines < 1:
            raise ConfigError("feedback_max_lines must be >= 1")

    @classmethod
    def from_file(cls, path, output_dir: Optional[Path] = None) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(data, path.parent, output_dir)

    @classmethod
    def from_dict(cls, data: dict, base: Path, output_dir: Optional[Path] = None) -> "RunConfig":
        known = {"design_name", "spec", "label_map", "design", "provider", "adapter", "pattern_pack",
                 "templates", "max_iterations", "feedback_max_lines", "output_dir",
                 "baseline_assertion_count"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")

        def resolve(p):
            return None if p is None else (base / p).resolve()

        def existing(p, what):
            r = resolve(p)
            if r is None or not r.exists():
                raise ConfigError(f"{what} not found: {p}")
            return r

        try:
            d = data["design"]
            bundle = DesignBundle(
                design_files=tuple(existing(p, "design file") for p in d["design_files"]),
                testbench_file=existing(d["testbench_file"], "testbench"),
                top_module=d["top_module"],
                testcase_description=d.get("testcase_description", ""),
                bind_template=existing(d["bind_template"], "bind template") if d.get("bind_template") else None,
            )
            p = data.get("provider", {})
            if "api_key" in p:
                raise ConfigError("credentials come from the environment, not the config file")
            provider = ProviderConfig(
                kind=p.get("kind", "replay"), endpoint=p.get("endpoint", ""), model=p.get("model", ""),
                timeout_ms=int(p.get("timeout_ms", 60_000)), max_retries=int(p.get("max_retries", 2)),
                temperature=p.get("temperature", 0.0),
                transcript=existing(p["transcript"], "transcript") if p.get("kind", "replay") == "replay" else None,
            )
            if provider.kind not in ("remote", "replay"):
                raise ConfigError(f"provider.kind must be remote or replay, not {provider.kind!r}")
            if provider.kind == "remote" and not (provider.endpoint and provider.model):
                raise ConfigError("remote provider needs endpoint and model")
            a = data.get("adapter", {})
            adapter = AdapterConfig(
                kind=a.get("kind", "replay"), compile_cmd=tuple(a.get("compile_cmd", ())),
                run_cmd=tuple(a.get("run_cmd", ())),
                replay_dir=existing(a["replay_dir"], "replay directory") if a.get("kind", "replay") == "replay" else None,
                timeout_ms=int(a.get("timeout_ms", 600_000)),
            )
            if adapter.kind not in ("external", "replay"):
                raise ConfigError(f"adapter.kind must be external or replay, not {adapter.kind!r}")
            if adapter.kind == "external":
                if not adapter.compile_cmd:
                    raise ConfigError("external adapter needs compile_cmd")
                check_recipe(adapter.compile_cmd)
                check_recipe(adapter.run_cmd)
            pack = data.get("pattern_pack", "generic")
            pack_path = resolve(pack)
            label_map = data.get("label_map", {})
            for label in label_map:
                if label not in LABELS:
                    raise ConfigError(f"label_map key {label!r} is not a specification label")
            out = output_dir or resolve(data.get("output_dir", f"out/{data['design_name']}"))
            return cls(
                design_name=data["design_name"],
                spec_path=existing(data["spec"], "spec"),
                design=bundle,
                label_map=label_map,
                provider=provider,
                adapter=adapter,
                pattern_pack=str(pack_path) if pack_path.exists() else pack,
                templates={k: str(existing(v, f"{k} template")) for k, v in data.get("templates", {}).items()},
                max_iterations=int(data.get("max_iterations", 10)),
                feedback_max_lines=int(data.get("feedback_max_lines", 10)),
                output_dir=Path(out),
                baseline_assertion_count=int(data.get("baseline_assertion_count", 0)),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


# -- trace -------------------------------------------------------------------

@dataclass
class Exchange:
    prompt: Prompt
    response: ProviderResponse

    def to_json(self) -> dict:
        return {"prompt": self.prompt.to_json(),
                "response": {"text": self.response.text, "provider_id": self.response.provider_id}}


@dataclass
class IterationRecord:
    n: int
    suite: AssertionSuite
    verdict: Optional[TriageVerdict]
    gate: str  # local | simulator | extraction
    failing: list = field(default_factory=list)
    exchanges: list = field(default_factory=list)
    retired: list = field(default_factory=list)
    workspace: Optional[str] = None
    sim_time: Optional[str] = None
    error: Optional[str] = None
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "gate": self.gate,
            "verdict": self.verdict.to_json() if self.verdict else None,
            "failing": list(self.failing),
            "retired": list(self.retired),
            "suite": [a.to_json() for a in self.suite.assertions],
            "workspace": self.workspace,
            "sim_time": self.sim_time,
            "exchanges": [e.to_json() for e in self.exchanges],
            "error": self.error,
        }


@dataclass
class RunTrace:
    design_name: str
    max_iterations: int
    baseline_assertion_count: int = 0
    generation: Optional[Exchange] = None
    records: list = field(default_factory=list)

    @property
    def exchanges(self) -> list:
        out = [self.generation] if self.generation else []
        for r in self.records:
            out.extend(r.exchanges)
        return out

    @property
    def provider_calls(self) -> int:
        return len(self.exchanges)

    @property
    def prompt_count(self) -> int:
        return sum(1 for e in self.exchanges if not e.prompt.format_retry)

    def to_json(self) -> dict:
        return {
            "design_name": self.design_name,
            "max_iterations": self.max_iterations,
            "baseline_assertion_count": self.baseline_assertion_count,
            "prompt_count": self.prompt_count,
            "format_retries": self.provider_calls - self.prompt_count,
            "generation": self.generation.to_json() if self.generation else None,
            "records": [r.to_json() for r in self.records],
        }

    def timing_json(self) -> dict:
        return {
            "sva_generation_time_s": self.generation.response.latency_ms / 1000 if self.generation else None,
            "records": [{"n": r.n, "wall_time_s": r.wall_time,
                         "latencies_ms": [e.response.latency_ms for e in r.exchanges]}
                        for r in self.records],
        }


@dataclass
class PipelineOutcome:
    status: str
    suite: AssertionSuite
    trace: RunTrace
    evidence: tuple = ()
    error: Optional[str] = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> dict:
        last = self.trace.records[-1] if self.trace.records else None
        return {
            "status": self.status,
            "exit_code": self.exit_code,
            "advice": ADVICE[self.status],
            "design_name": self.trace.design_name,
            "assertion_count": len(self.suite),
            "prompt_count": self.trace.prompt_count,
            "iterations": len(self.trace.records),
            "last_verdict": last.verdict.describe() if last and last.verdict else None,
            "evidence": [m.text for m in self.evidence],
            "error": self.error,
        }


# -- merge -------------------------------------------------------------------

def merge_repair(old: AssertionSuite, repaired: AssertionSuite, failing=()) -> AssertionSuite:
    """Replace same-named assertions in place, append new names, retire superseded failures."""
    names = repaired.names
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise DuplicateName(", ".join(dupes))
    merged = list(old.assertions)
    position = {a.name: i for i, a in enumerate(merged)}
    added = False
    for a in repaired.assertions:
        if a.name in position:
            merged[position[a.name]] = a
        else:
            position[a.name] = len(merged)
            merged.append(a)
            added = True
    if added:
        retire = {n for n in failing if n not in names}
        merged = [a for a in merged if a.name not in retire]
    return AssertionSuite(old.design_name, tuple(merged))


# -- loop ----------------------------------------------------------------------

def _local_syntax_verdict(suite: AssertionSuite) -> Optional[TriageVerdict]:
    problems = validate_suite(suite)
    if not problems:
        return None
    messages = [
        LogMessage("compile", "error", "syntax", f"{name}: {render_diagnostic(d)}",
                   assertion_name=name, diagnostic=d)
        for name, diags in problems for d in diags
    ]
    return TriageVerdict(VerdictKind.SYNTAX_ERROR, messages)


def _extraction_verdict(problem: str) -> TriageVerdict:
    return TriageVerdict(VerdictKind.SYNTAX_ERROR, [
        LogMessage("compile", "error", "syntax", f"reply could not be read as assertions: {problem}")])


def _prepare_output(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name in BUNDLE_FILES:
        (out / name).unlink(missing_ok=True)
    shutil.rmtree(out / "workspaces", ignore_errors=True)


class _Run:
    def __init__(self, config: RunConfig, spec: FormattedSpec, provider: CompletionProvider,
                 adapter: SimulatorAdapter, pack: PatternPack, templates: PromptTemplates):
        self.config = config
        self.spec = spec
        self.provider = provider
        self.adapter = adapter
        self.pack = pack
        self.templates = templates
        self.history = ConversationHistory()
        self.trace = RunTrace(config.design_name, config.max_iterations, config.baseline_assertion_count)
        self.out = Path(config.output_dir)

    def ask(self, prompt: Prompt) -> Exchange:
        response = complete(prompt, self.provider)
        self.history.append(prompt, response)
        return Exchange(prompt, response)

    def read_reply(self, exchange: Exchange, origin: Origin) -> Union[AssertionSuite, ExtractionFailure]:
        result = extract_assertions(exchange.response, self.config.design_name, origin)
        if isinstance(result, AssertionSuite):
            names = result.names
            dupes = sorted({n for n in names if names.count(n) > 1})
            if dupes:
                return ExtractionFailure(f"duplicate property names in reply: {', '.join(dupes)}")
        return result

    def check(self, n: int, suite: AssertionSuite, pending: Optional[str]) -> IterationRecord:
        if pending is not None:
            return IterationRecord(n, suite, _extraction_verdict(pending), "extraction")
        local = _local_syntax_verdict(suite)
        if local is not None:
            return IterationRecord(n, suite, local, "local")
        rel = f"workspaces/iter_{n:02d}"
        ws = compose_workspace(self.config.design, suite, self.out / rel)
        sim_log = run_simulation(ws, self.adapter, self.config.adapter.timeout_ms / 1000, n)
        messages = attribute(parse_log(sim_log.raw_text, self.pack), ws.line_map, ASSERTION_FILE)
        verdict = classify(messages, sim_log.exit_code)
        sim_time = report_sim_time(sim_log.raw_text, self.pack)
        return IterationRecord(n, suite, verdict, "simulator", workspace=rel,
                               sim_time=str(sim_time) if sim_time else None)

    def execute(self) -> PipelineOutcome:
        T = self.config.max_iterations
        design = self.config.design_name
        try:
            gen = self.ask(build_generation_prompt(self.spec, design, self.templates))
        except ProviderError as exc:
            record = IterationRecord(0, AssertionSuite(design), None, "extraction", error=str(exc))
            self.trace.records.append(record)
            return PipelineOutcome(EXHAUSTED, record.suite, self.trace, error=str(exc))
        self.trace.generation = gen
        first = self.read_reply(gen, Origin())
        pending = first.describe() if isinstance(first, ExtractionFailure) else None
        suite = first if isinstance(first, AssertionSuite) else AssertionSuite(design)

        n = 0
        while True:
            started = time.monotonic()
            try:
                record = self.check(n, suite, pending)
            except SimulationError as exc:
                detail = str(exc)
                if isinstance(exc, SimulationTimeout):
                    detail += f" (partial log: {len(exc.log.raw_text)} chars)"
                record = IterationRecord(n, suite, None, "simulator", error=detail)
                record.wall_time = time.monotonic() - started
                self.trace.records.append(record)
                return PipelineOutcome(EXHAUSTED, suite, self.trace, error=detail)
            self.trace.records.append(record)
            verdict = record.verdict
            log.info("iteration %d [%s]: %s", n, record.gate, verdict.describe())
            if verdict.kind is VerdictKind.NO_ERROR:
                record.wall_time = time.monotonic() - started
                return PipelineOutcome(CONVERGED, suite, self.trace)
            record.failing = failing_names(suite, verdict) if suite.assertions else []
            if verdict.kind is VerdictKind.TESTCASE_FAILURE:
                record.wall_time = time.monotonic() - started
                return PipelineOutcome(BUG_SUSPECTED, suite, self.trace, verdict.messages)
            if n >= T:
                record.wall_time = time.monotonic() - started
                return PipelineOutcome(EXHAUSTED, suite, self.trace, verdict.messages)

            try:
                ex = self.ask(build_repair_prompt(suite, verdict, self.history, self.templates,
                                                  self.config.feedback_max_lines))
                record.exchanges.append(ex)
                reply = self.read_reply(ex, Origin.repair(n))
                if isinstance(reply, ExtractionFailure):
                    retry = self.ask(build_format_repair_prompt(reply.describe(), design, self.history,
                                                                self.templates))
                    record.exchanges.append(retry)
                    reply = self.read_reply(retry, Origin.repair(n))
            except ProviderError as exc:
                record.error = str(exc)
                record.wall_time = time.monotonic() - started
                return PipelineOutcome(EXHAUSTED, suite, self.trace, verdict.messages, error=str(exc))

            if isinstance(reply, ExtractionFailure):
                pending = reply.describe()
            else:
                pending = None
                before = set(suite.names)
                suite = merge_repair(suite, reply, record.failing)
                record.retired = sorted(before - set(suite.names))
            record.wall_time = time.monotonic() - started
            n += 1


def persist_trace(trace: RunTrace, outcome: PipelineOutcome, output_dir) -> Path:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump = lambda obj: json.dumps(obj, indent=2, ensure_ascii=False) + "\n"  # noqa: E731
    (out / "trace.json").write_text(dump(trace.to_json()), encoding="utf-8")
    (out / "outcome.json").write_text(dump(outcome.to_json()), encoding="utf-8")
    (out / "timing.json").write_text(dump(trace.timing_json()), encoding="utf-8")
    (out / "final.sva").write_text(outcome.suite.to_sva(), encoding="utf-8")
    return out


def run_pipeline(config: RunConfig, provider: Optional[CompletionProvider] = None,
                 adapter: Optional[SimulatorAdapter] = None) -> PipelineOutcome:
    """Run the full loop and write the artifact bundle to ``config.output_dir``.

    Raises :class:`ConfigError` before any provider call when inputs are unusable.
    """
    try:
        spec = load_formatted(config.spec_path, config.label_map, config.design_name)
        pack = PatternPack.load(config.pattern_pack)
        templates = PromptTemplates.load(config.templates)
        provider = provider or config.provider.build()
        adapter = adapter or config.adapter.build(config.design.top_module)
    except (SpecFormatError, MalformedPack, ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    _prepare_output(Path(config.output_dir))
    run = _Run(config, spec, provider, adapter, pack, templates)
    outcome = run.execute()
    persist_trace(run.trace, outcome, config.output_dir)
    return outcome
