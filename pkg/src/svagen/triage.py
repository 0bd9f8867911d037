"""Rule-driven simulation log parsing and four-way outcome classification."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .sva.parser import SyntaxDiagnostic, format_diagnostic

PHASES = ("compile", "run")
SEVERITIES = ("info", "warning", "error", "fatal")
CATEGORIES = ("syntax", "timing", "missing_signal", "assertion_failure",
              "testcase_failure", "tool", "other")
CAPTURE_KEYS = ("signal", "assertion", "file", "line")

PHASE_RE = re.compile(r"^### PHASE: (compile|run)\s*$")
_ERRORISH = ("error", "fatal")


class MalformedPack(ValueError):
    pass


class InvalidVerdict(ValueError):
    pass


@dataclass(frozen=True)
class LogMessage:
    phase: str
    severity: str
    category: str
    text: str
    signal: Optional[str] = None
    assertion_name: Optional[str] = None
    location: Optional[tuple[str, int]] = None
    # 1-based line of ``text`` within the raw log, 0 for messages not read from a log
    log_line: int = 0
    # set for messages raised by the local syntax gate
    diagnostic: Optional[SyntaxDiagnostic] = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("log message text must be non-empty")
        if self.category == "missing_signal" and not self.signal:
            raise ValueError("missing_signal messages must name the signal")

    @property
    def is_error(self) -> bool:
        return self.severity in _ERRORISH

    def to_json(self) -> dict:
        out = {"phase": self.phase, "severity": self.severity, "category": self.category,
               "text": self.text, "signal": self.signal, "assertion_name": self.assertion_name,
               "location": list(self.location) if self.location else None,
               "log_line": self.log_line}
        if self.diagnostic is not None:
            d = self.diagnostic
            out["diagnostic"] = {"line": d.line, "column": d.column, "message": d.message,
                                 "found": d.found, "expected": list(d.expected)}
        return out

    @classmethod
    def from_json(cls, data: dict) -> "LogMessage":
        diag = data.get("diagnostic")
        return cls(
            data["phase"], data["severity"], data["category"], data["text"],
            data.get("signal"), data.get("assertion_name"),
            tuple(data["location"]) if data.get("location") else None,
            data.get("log_line", 0),
            SyntaxDiagnostic(diag["line"], diag["column"], diag["message"], diag["found"],
                             tuple(diag["expected"])) if diag else None,
        )


class VerdictKind(str, Enum):
    NO_ERROR = "NoError"
    SYNTAX_ERROR = "SyntaxError"
    SIMULATION_FAILURE = "SimulationFailure"
    TESTCASE_FAILURE = "TestcaseFailure"


_ALLOWED = {
    VerdictKind.SYNTAX_ERROR: {"syntax"},
    VerdictKind.SIMULATION_FAILURE: {"timing", "missing_signal"},
    VerdictKind.TESTCASE_FAILURE: {"assertion_failure", "testcase_failure", "other", "tool"},
}


@dataclass(frozen=True)
class TriageVerdict:
    kind: VerdictKind
    messages: tuple[LogMessage, ...] = ()
    # timing | missing_signal, only for SimulationFailure
    sim_kind: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if self.kind is VerdictKind.NO_ERROR:
            if self.messages:
                raise ValueError("NoError carries no messages")
            return
        if not self.messages:
            raise ValueError(f"{self.kind.value} needs at least one message")
        bad = [m.category for m in self.messages if m.category not in _ALLOWED[self.kind]]
        if bad:
            raise ValueError(f"{self.kind.value} cannot carry {bad[0]} messages")
        if (self.kind is VerdictKind.SIMULATION_FAILURE) != (self.sim_kind is not None):
            raise ValueError("sim_kind is required for, and only for, SimulationFailure")

    @classmethod
    def no_error(cls) -> "TriageVerdict":
        return cls(VerdictKind.NO_ERROR)

    @property
    def ok(self) -> bool:
        return self.kind is VerdictKind.NO_ERROR

    def describe(self) -> str:
        """One-line summary, e.g. ``SimulationFailure(missing_signal): rst_ni``."""
        if self.kind is VerdictKind.NO_ERROR:
            return "NoError"
        if self.kind is VerdictKind.SIMULATION_FAILURE:
            if self.sim_kind == "missing_signal":
                detail = _unique(m.signal for m in self.messages if m.signal)
            else:
                detail = _unique(m.assertion_name for m in self.messages if m.assertion_name)
            return f"SimulationFailure({self.sim_kind}): {', '.join(detail) or self.messages[0].text}"
        return f"{self.kind.value}: {self.messages[0].text}"

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "sim_kind": self.sim_kind,
                "messages": [m.to_json() for m in self.messages]}

    @classmethod
    def from_json(cls, data: dict) -> "TriageVerdict":
        return cls(VerdictKind(data["kind"]),
                   tuple(LogMessage.from_json(m) for m in data.get("messages", [])),
                   data.get("sim_kind"))


def _unique(items) -> list[str]:
    out: list[str] = []
    for x in items:
        if x not in out:
            out.append(x)
    return out


@dataclass(frozen=True)
class Rule:
    pattern: re.Pattern
    phase: str  # compile | run | any
    severity: str
    category: str
    captures: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PatternPack:
    name: str
    rules: tuple[Rule, ...]
    sim_time_pattern: Optional[re.Pattern] = None

    @classmethod
    def from_dict(cls, data: dict) -> "PatternPack":
        for key in data:
            if key not in ("name", "description", "rules", "sim_time_pattern"):
                raise MalformedPack(f"unknown pack key {key!r}")
        name = data.get("name")
        if not isinstance(name, str) or not name:
            raise MalformedPack("pack needs a name")
        rules = []
        for i, raw in enumerate(data.get("rules", [])):
            where = f"{name}: rule {i}"
            try:
                pattern = re.compile(raw["pattern"])
            except (KeyError, re.error) as exc:
                raise MalformedPack(f"{where}: bad pattern ({exc})") from None
            phase = raw.get("phase", "any")
            severity = raw.get("severity", "error")
            category = raw.get("category")
            if phase not in PHASES + ("any",):
                raise MalformedPack(f"{where}: bad phase {phase!r}")
            if severity not in SEVERITIES:
                raise MalformedPack(f"{where}: bad severity {severity!r}")
            if category not in CATEGORIES:
                raise MalformedPack(f"{where}: bad category {category!r}")
            captures = dict(raw.get("captures", {}))
            for key, group in captures.items():
                if key not in CAPTURE_KEYS:
                    raise MalformedPack(f"{where}: unknown capture key {key!r}")
                if group not in pattern.groupindex:
                    raise MalformedPack(f"{where}: pattern has no group {group!r}")
            if category == "missing_signal" and "signal" not in captures:
                raise MalformedPack(f"{where}: missing_signal rules must capture the signal")
            rules.append(Rule(pattern, phase, severity, category, captures))
        sim_time = data.get("sim_time_pattern")
        sim_re = None
        if sim_time is not None:
            try:
                sim_re = re.compile(sim_time)
            except re.error as exc:
                raise MalformedPack(f"{name}: bad sim_time_pattern ({exc})") from None
            if not {"value", "unit"} <= set(sim_re.groupindex):
                raise MalformedPack(f"{name}: sim_time_pattern needs 'value' and 'unit' groups")
        return cls(name, tuple(rules), sim_re)

    @classmethod
    def load(cls, path_or_name) -> "PatternPack":
        """Load a ``.pack.json`` file, or a built-in pack by name (``generic``)."""
        path = Path(path_or_name)
        if path.is_file():
            text = path.read_text(encoding="utf-8")
        else:
            stem = path.name.removesuffix(".pack.json")
            try:
                text = resources.files("svagen.data.packs").joinpath(f"{stem}.pack.json").read_text("utf-8")
            except FileNotFoundError:
                raise MalformedPack(f"no pattern pack at {path_or_name}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedPack(f"{path_or_name}: {exc}") from None
        return cls.from_dict(data)


def parse_log(raw_text: str, pack: PatternPack) -> list[LogMessage]:
    messages = []
    phase = "compile"
    for lineno, line in enumerate(raw_text.splitlines(), start=1):
        m = PHASE_RE.match(line)
        if m:
            phase = m.group(1)
            continue
        if not line.strip():
            continue
        for rule in pack.rules:
            if rule.phase != "any" and rule.phase != phase:
                continue
            hit = rule.pattern.search(line)
            if hit is None:
                continue
            got = {k: hit.group(g) for k, g in rule.captures.items()}
            location = None
            if got.get("file") and got.get("line") and got["line"].isascii() and got["line"].isdigit():
                location = (got["file"], int(got["line"]))
            if rule.category == "missing_signal" and not got.get("signal"):
                continue
            messages.append(LogMessage(phase, rule.severity, rule.category, line,
                                       got.get("signal") or None, got.get("assertion") or None,
                                       location, lineno))
            break
        else:
            if "error" in line.lower():
                messages.append(LogMessage(phase, "error", "other", line, log_line=lineno))
    return messages


def classify(messages: Sequence[LogMessage], exit_code: int) -> TriageVerdict:
    """Apply the no-error / syntax / simulation / testcase precedence."""
    errors = [m for m in messages if m.is_error]
    syntax = [m for m in errors if m.category == "syntax"]
    if syntax:
        return TriageVerdict(VerdictKind.SYNTAX_ERROR, syntax)
    sim = [m for m in errors if m.category in ("timing", "missing_signal")]
    if sim:
        return TriageVerdict(VerdictKind.SIMULATION_FAILURE, sim, sim[0].category)
    failures = [m for m in errors if m.category in ("assertion_failure", "testcase_failure")]
    if failures:
        return TriageVerdict(VerdictKind.TESTCASE_FAILURE, failures)
    if exit_code != 0:
        others = [m for m in errors if m.category in ("other", "tool")]
        if not others:
            others = [LogMessage("run", "error", "tool", f"simulator exited with status {exit_code}")]
        return TriageVerdict(VerdictKind.TESTCASE_FAILURE, others)
    return TriageVerdict.no_error()


def render_message(m: LogMessage) -> str:
    if m.diagnostic is not None:
        d = m.diagnostic
        message = f"{m.assertion_name}: {d.message}" if m.assertion_name else d.message
        return format_diagnostic(d.line, d.column, message, d.found, d.expected)
    return format_diagnostic(m.log_line, 1, m.text)


def feedback_excerpt(verdict: TriageVerdict, max_lines: int) -> str:
    if verdict.kind is VerdictKind.NO_ERROR:
        raise InvalidVerdict("no feedback for a clean run")
    if max_lines < 1:
        raise ValueError("max_lines must be positive")
    shown = verdict.messages[:max_lines]
    lines = [render_message(m) for m in shown]
    rest = len(verdict.messages) - len(shown)
    if rest > 0:
        lines.append(f"…{rest} more")
    return "\n".join(lines)


def report_sim_time(raw_text: str, pack: PatternPack) -> Optional["SimTime"]:
    """Final simulation time reported in the log (last match wins)."""
    if pack.sim_time_pattern is None:
        return None
    found = None
    for line in raw_text.splitlines():
        m = pack.sim_time_pattern.search(line)
        if m:
            found = m
    if found is None:
        return None
    return SimTime(float(found.group("value")), found.group("unit"))


@dataclass(frozen=True)
class SimTime:
    value: float
    unit: str

    def __str__(self) -> str:
        v = int(self.value) if float(self.value).is_integer() else self.value
        return f"{v} {self.unit}"

    @classmethod
    def parse(cls, text: str) -> "SimTime":
        value, unit = text.split()
        return cls(float(value), unit)


def attribute(messages: Sequence[LogMessage], line_map: dict, file_name: str) -> list[LogMessage]:
    """Fill ``assertion_name`` from ``file:line`` locations inside the assertion file."""
    out = []
    for m in messages:
        if m.assertion_name is None and m.location and Path(m.location[0]).name == file_name:
            for name, (first, last) in line_map.items():
                if first <= m.location[1] <= last:
                    m = replace(m, assertion_name=name)
                    break
        out.append(m)
    return out
