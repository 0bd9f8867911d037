"""Per-run metrics and the fixed-width performance table."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

from .sva.suite import load_sva


class EmptyTrace(ValueError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class RunReport:
    module_name: str
    baseline_assertion_count: int
    generated_assertion_count: int
    prompt_count: int
    sim_time: Optional[str]
    sva_generation_time: float  # seconds, wall clock of the generation call
    raw_error_count: int
    raw_total: int

    def __post_init__(self):
        if not 0 <= self.raw_error_count <= self.raw_total:
            raise ValueError("raw_error_count must lie in [0, raw_total]")
        if min(self.baseline_assertion_count, self.generated_assertion_count, self.prompt_count) < 0:
            raise ValueError("counts must be non-negative")

    def to_json(self) -> dict:
        return asdict(self)


def _raw_errors(records: Sequence[dict]) -> tuple[int, int]:
    initial = [a["name"] for a in records[0]["suite"]]
    blamed = set()
    for r in records:
        verdict = r.get("verdict")
        if verdict and verdict["kind"] != "NoError":
            blamed.update(m["assertion_name"] for m in verdict["messages"] if m.get("assertion_name"))
        blamed.update(r.get("retired", ()))
    return sum(1 for n in set(initial) if n in blamed), len(initial)


def summarize_json(trace: dict, generated_count: int, generation_time: Optional[float],
                   baseline_count: Optional[int] = None) -> RunReport:
    records = trace.get("records") or []
    if not records:
        raise EmptyTrace(f"trace for {trace.get('design_name')!r} has no iterations")
    errors, total = _raw_errors(records)
    simulated = [r["sim_time"] for r in records if r.get("sim_time")]
    if baseline_count is None:
        baseline_count = trace.get("baseline_assertion_count", 0)
    return RunReport(
        module_name=trace["design_name"],
        baseline_assertion_count=baseline_count,
        generated_assertion_count=generated_count,
        prompt_count=trace["prompt_count"],
        sim_time=simulated[-1] if simulated else None,
        sva_generation_time=generation_time or 0.0,
        raw_error_count=errors,
        raw_total=total,
    )


def summarize(trace, outcome, baseline_count: Optional[int] = None) -> RunReport:
    """Metrics for one in-memory run (a ``RunTrace`` and its ``PipelineOutcome``)."""
    timing = trace.timing_json()
    return summarize_json(trace.to_json(), len(outcome.suite), timing["sva_generation_time_s"],
                          baseline_count)


def load_bundle(bundle_dir) -> RunReport:
    """Metrics for a persisted run directory."""
    root = Path(bundle_dir)
    trace = json.loads((root / "trace.json").read_text(encoding="utf-8"))
    timing_path = root / "timing.json"
    timing = json.loads(timing_path.read_text(encoding="utf-8")) if timing_path.is_file() else {}
    final = load_sva(root / "final.sva", trace["design_name"])
    return summarize_json(trace, len(final), timing.get("sva_generation_time_s"))


def raw_error_rate(reports: Sequence[RunReport]) -> float:
    """Fraction of initial assertions that needed repair, pooled over runs."""
    if not reports:
        raise EmptyInput("no reports")
    total = sum(r.raw_total for r in reports)
    if total == 0:
        raise EmptyInput("no initial assertions in any report")
    return sum(r.raw_error_count for r in reports) / total


def format_rate(rate: float) -> str:
    return f"{rate * 100:.1f}%"


COLUMNS = ("Module", "OT Assert.", "LLM Assert.", "#Prompts", "Sim. Time", "SVA Gen. Time")


def _row(r: RunReport) -> tuple[str, ...]:
    return (r.module_name, str(r.baseline_assertion_count), str(r.generated_assertion_count),
            str(r.prompt_count), r.sim_time or "-", f"{r.sva_generation_time:.2f} s")


def render_table(reports: Sequence[RunReport]) -> str:
    rows = [COLUMNS] + [_row(r) for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(len(COLUMNS))]

    def line(cells):
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return "  ".join([first, *rest]).rstrip()

    out = [line(COLUMNS), "  ".join("-" * w for w in widths)]
    out.extend(line(row) for row in rows[1:])
    if reports:
        errors = sum(r.raw_error_count for r in reports)
        total = sum(r.raw_total for r in reports)
        rate = format_rate(raw_error_rate(reports)) if total else "n/a"
        out.append(f"raw assertion errors: {errors}/{total} = {rate}")
    else:
        out.append("no runs")
    return "\n".join(out) + "\n"


def render_json(reports: Sequence[RunReport]) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2) + "\n"
