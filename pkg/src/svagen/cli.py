"""Command-line entry point: format, generate, triage, lint, report."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import pipeline
from .pipeline import ConfigError, RunConfig, run_pipeline
from .report import load_bundle, render_json, render_table
from .spec_format import LABELS, SpecFormatError, load_formatted, serialize_spec
from .sva.parser import render_diagnostic
from .sva.suite import lint_sva_text
from .triage import MalformedPack, PatternPack, classify, parse_log

EXIT_USAGE = 4

REPORT_HELP = """\
Columns: OT Assert. is the baseline count declared in the run config;
LLM Assert. is the size of final.sva; #Prompts counts provider calls including
the initial generation but not format-repair retries; Sim. Time is the final
simulated time reported in the last simulated log; SVA Gen. Time is the wall
clock of the initial generation call only.  The footer pools raw errors: an
initial assertion counts as erroneous if any failing verdict blamed it or a
repair retired it."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    default = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, default=default, help="run configuration (.run.json)")
    p.add_argument("--out", type=Path, default=default, help="output directory")
    p.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="svagen", parents=[_global_flags(False)],
                     description="Generate and repair SystemVerilog assertions from a specification.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = [_global_flags(True)]

    p = sub.add_parser("format", parents=common, help="convert a specification document to .spec.json")
    p.add_argument("spec", type=Path)
    p.add_argument("--label-map", type=Path, help="JSON object mapping labels to heading lists")
    p.add_argument("--design-name")

    sub.add_parser("generate", parents=common, help="run the full generate/repair loop")

    p = sub.add_parser("triage", parents=common, help="classify a simulator log")
    p.add_argument("log", type=Path)
    p.add_argument("--pack", default="generic", help="pattern pack file or builtin name")
    p.add_argument("--exit-code", type=int, default=0, help="simulator exit status")

    p = sub.add_parser("lint", parents=common, help="check .sva files against the assertion grammar")
    p.add_argument("files", nargs="+", type=Path)

    p = sub.add_parser("report", parents=common, help="tabulate completed runs",
                       description=REPORT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("bundles", nargs="*", type=Path, help="run output directories")
    p.add_argument("--format", choices=("table", "json"), default="table")
    return parser


def _label_map(args) -> dict:
    if args.label_map:
        data = json.loads(args.label_map.read_text(encoding="utf-8"))
    elif args.config:
        data = json.loads(args.config.read_text(encoding="utf-8")).get("label_map", {})
    else:
        data = {}
    bad = [k for k in data if k not in LABELS]
    if bad:
        raise ConfigError(f"unknown label(s) in label map: {', '.join(bad)}")
    return data


def cmd_format(args) -> int:
    spec = load_formatted(args.spec, _label_map(args), args.design_name)
    text = serialize_spec(spec)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        dest = args.out / (args.spec.name.split(".")[0] + ".spec.json")
        dest.write_text(text, encoding="utf-8")
        print(dest)
    else:
        sys.stdout.write(text)
    return 0


def cmd_generate(args) -> int:
    if not args.config:
        raise ConfigError("generate needs --config")
    config = RunConfig.from_file(args.config, args.out)
    outcome = run_pipeline(config)
    summary = outcome.to_json()
    print(f"{config.design_name}: {summary['status']} after {summary['prompt_count']} prompt(s), "
          f"{summary['assertion_count']} assertion(s) -> {config.output_dir}")
    if outcome.status != pipeline.CONVERGED:
        print(summary["advice"], file=sys.stderr)
        if outcome.error:
            print(f"error: {outcome.error}", file=sys.stderr)
    return outcome.exit_code


def cmd_triage(args) -> int:
    pack = PatternPack.load(args.pack)
    raw = args.log.read_bytes().decode("utf-8", errors="replace")
    verdict = classify(parse_log(raw, pack), args.exit_code)
    print(verdict.describe())
    return 0 if verdict.ok else 1


def cmd_lint(args) -> int:
    status = 0
    for path in args.files:
        for name, diags in lint_sva_text(path.read_text(encoding="utf-8")):
            status = 1
            for d in diags:
                print(f"{path}: {name}: {render_diagnostic(d)}")
    return status


def cmd_report(args) -> int:
    bundles = list(args.bundles)
    if not bundles and args.config:
        bundles = [RunConfig.from_file(args.config, args.out).output_dir]
    reports = [load_bundle(b) for b in bundles]
    sys.stdout.write(render_json(reports) if args.format == "json" else render_table(reports))
    return 0


COMMANDS = {"format": cmd_format, "generate": cmd_generate, "triage": cmd_triage,
            "lint": cmd_lint, "report": cmd_report}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, SpecFormatError, MalformedPack, OSError, ValueError) as exc:
        print(f"svagen {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
