"""Prompt templates and builders for generation and repair turns."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

from ..spec_format import FormattedSpec, serialize_spec
from ..sva.suite import AssertionSuite
from ..triage import TriageVerdict, VerdictKind, feedback_excerpt

GENERATE = "generate"
REPAIR = "repair"

PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")
ALLOWED_PLACEHOLDERS = {
    "system": set(),
    "generate": {"spec", "requirements", "design"},
    "repair": {"failing_assertions", "feedback", "design"},
    "format_repair": {"feedback", "design"},
}


class TemplateError(ValueError):
    pass


class InvalidFeedbackKind(ValueError):
    pass


@dataclass(frozen=True)
class Prompt:
    system_preamble: str
    user_message: str
    purpose: str
    iteration: int
    format_retry: bool = False

    def __post_init__(self):
        if not self.user_message:
            raise ValueError("user_message must be non-empty")
        if self.purpose not in (GENERATE, REPAIR):
            raise ValueError(f"unknown purpose {self.purpose!r}")
        if (self.iteration == 0) != (self.purpose == GENERATE):
            raise ValueError("iteration 0 is reserved for, and required by, generation")

    def to_json(self) -> dict:
        return {"purpose": self.purpose, "iteration": self.iteration, "format_retry": self.format_retry,
                "system_preamble": self.system_preamble, "user_message": self.user_message}


@dataclass(frozen=True)
class ProviderResponse:
    text: str
    provider_id: str
    latency_ms: float = 0.0

    def __post_init__(self):
        if self.latency_ms < 0:
            raise ValueError("latency must be non-negative")


@dataclass
class ConversationHistory:
    turns: list = field(default_factory=list)

    @property
    def next_iteration(self) -> int:
        return len(self.turns)

    def append(self, prompt: Prompt, response: ProviderResponse) -> None:
        if prompt.iteration != self.next_iteration:
            raise ValueError(f"expected iteration {self.next_iteration}, got {prompt.iteration}")
        self.turns.append((prompt, response))


@dataclass(frozen=True)
class PromptTemplates:
    system: str
    generate: str
    repair: str
    format_repair: str

    @classmethod
    def load(cls, paths: Optional[Mapping[str, str]] = None) -> "PromptTemplates":
        """Read templates; entries missing from ``paths`` fall back to the shipped defaults."""
        paths = dict(paths or {})
        for key in paths:
            if key not in ALLOWED_PLACEHOLDERS:
                raise TemplateError(f"unknown template slot {key!r}")
        texts = {}
        for key in ALLOWED_PLACEHOLDERS:
            if key in paths:
                texts[key] = Path(paths[key]).read_text(encoding="utf-8")
            else:
                texts[key] = resources.files("svagen.data.templates").joinpath(f"{key}.txt").read_text("utf-8")
            unknown = set(PLACEHOLDER_RE.findall(texts[key])) - ALLOWED_PLACEHOLDERS[key]
            if unknown:
                raise TemplateError(f"{key} template uses unknown placeholder(s): {', '.join(sorted(unknown))}")
        return cls(**texts)


def _fill(template: str, values: Mapping[str, str]) -> str:
    return PLACEHOLDER_RE.sub(lambda m: values[m.group(1)], template)


def _default_templates() -> PromptTemplates:
    return PromptTemplates.load()


def build_generation_prompt(spec: FormattedSpec, design_name: str = "design",
                            templates: Optional[PromptTemplates] = None) -> Prompt:
    t = templates or _default_templates()
    requirements = "\n".join(f"R{i}. {r}" for i, r in enumerate(spec.functional_requirements, 1))
    user = _fill(t.generate, {"spec": serialize_spec(spec).rstrip("\n"),
                              "requirements": requirements, "design": design_name})
    return Prompt(t.system.rstrip("\n"), user, GENERATE, 0)


def failing_names(suite: AssertionSuite, verdict: TriageVerdict) -> list[str]:
    """Assertions blamed by the verdict; every assertion when nothing is attributable."""
    named = {m.assertion_name for m in verdict.messages if m.assertion_name}
    picked = [n for n in suite.names if n in named]
    return picked or list(dict.fromkeys(suite.names))


def build_repair_prompt(suite: AssertionSuite, feedback: TriageVerdict, history: ConversationHistory,
                        templates: Optional[PromptTemplates] = None, max_lines: int = 10) -> Prompt:
    if feedback.kind not in (VerdictKind.SYNTAX_ERROR, VerdictKind.SIMULATION_FAILURE):
        raise InvalidFeedbackKind(f"repair is not built for {feedback.kind.value}")
    t = templates or _default_templates()
    names = set(failing_names(suite, feedback))
    failing = "\n".join(a.to_sva() for a in suite.assertions if a.name in names) or "(none extracted)\n"
    user = _fill(t.repair, {"failing_assertions": failing.rstrip("\n"),
                            "feedback": feedback_excerpt(feedback, max_lines),
                            "design": suite.design_name})
    return Prompt(t.system.rstrip("\n"), user, REPAIR, history.next_iteration)


def build_format_repair_prompt(problem: str, design_name: str, history: ConversationHistory,
                               templates: Optional[PromptTemplates] = None) -> Prompt:
    t = templates or _default_templates()
    user = _fill(t.format_repair, {"feedback": problem, "design": design_name})
    return Prompt(t.system.rstrip("\n"), user, REPAIR, history.next_iteration, format_retry=True)
