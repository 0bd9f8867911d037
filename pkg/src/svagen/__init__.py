"""Specification-driven SystemVerilog assertion generation with a simulate-and-repair loop."""
from .pipeline import (ConfigError, PipelineOutcome, RunConfig, RunTrace, merge_repair,
                       persist_trace, run_pipeline)
from .report import RunReport, raw_error_rate, render_table, summarize
from .spec_format import FormattedSpec, extract, serialize_spec, deserialize_spec, to_formatted
from .sva import AssertionSuite, parse_assertion, render, validate_suite
from .triage import PatternPack, TriageVerdict, classify, parse_log

__version__ = "0.1.0"
