#!/usr/bin/env python3
"""Tiny stand-in simulator for combinational fixture designs.

Understands modules made of port/wire declarations and ``assign`` statements,
plus testbench directives in comments:

    // mini_sim inputs A[3:0] B[3:0] C0
    // mini_sim expect S = (A + B + C0) & 0xF
    // mini_sim period 10

``compile WS`` checks the generated assertions and signal names, ``run WS``
drives every input combination (last input toggles fastest), samples the
assertions on their clock edge and checks the expectations.  Output uses the
generic pattern-pack line formats.
"""
from __future__ import annotations

import argparse
import itertools
import re
import sys
from pathlib import Path

from svagen.sva.ast import Binary, Ident, Implication, Literal, Past, Unary, extract_signals
from svagen.sva.parser import parse_assertion, parse_expression
from svagen.sva.suite import parse_sva_text

ASSERTIONS = "generated_assertions.sv"
_DECL_RE = re.compile(r"^\s*(input|output|wire)\s+(?:wire\s+|logic\s+|reg\s+)?(?:\[(\d+):(\d+)\]\s*)?([\w\s,]+?)\s*[,;)]?\s*$")
_ASSIGN_RE = re.compile(r"^\s*assign\s+(\w+)(?:\[(\d+)\])?\s*=\s*(.+?)\s*;")
_DIRECTIVE_RE = re.compile(r"//\s*mini_sim\s+(inputs|expect|period)\s+(.+)$")
MAX_REPORTS = 5


def load_module(rtl_dir: Path):
    widths, assigns, problems = {}, [], []
    for path in sorted(rtl_dir.glob("*.sv")) + sorted(rtl_dir.glob("*.v")):
        for lineno, line in enumerate(path.read_text().splitlines(), 1):
            code = line.split("//", 1)[0]
            m = _ASSIGN_RE.match(code)
            if m:
                expr = parse_expression(m.group(3))
                if isinstance(expr, list):
                    problems.append(f"ERROR[SYNTAX] {path.name}:{lineno}: {expr[0].message}")
                else:
                    bit = int(m.group(2)) if m.group(2) else None
                    assigns.append((m.group(1), bit, expr))
                continue
            m = _DECL_RE.match(code)
            if m:
                width = int(m.group(2)) - int(m.group(3)) + 1 if m.group(2) else 1
                for name in re.split(r"[\s,]+", m.group(4).strip()):
                    if name:
                        widths[name] = width
    return widths, assigns, problems


def load_directives(tb_dir: Path):
    inputs, expects, period = [], [], 10
    for path in sorted(tb_dir.iterdir()):
        for line in path.read_text().splitlines():
            m = _DIRECTIVE_RE.search(line)
            if not m:
                continue
            kind, rest = m.groups()
            if kind == "inputs":
                for item in rest.split():
                    im = re.match(r"(\w+)(?:\[(\d+):(\d+)\])?$", item)
                    inputs.append((im.group(1), int(im.group(2)) - int(im.group(3)) + 1 if im.group(2) else 1))
            elif kind == "expect":
                name, expr = rest.split("=", 1)
                expects.append((name.strip(), expr.strip()))
            else:
                period = int(rest)
    return inputs, expects, period


def width_of(expr, widths) -> int:
    if isinstance(expr, Ident):
        if expr.index is None:
            return widths.get(expr.name, 1)
        high, low = expr.index
        return 1 if low is None else high - low + 1
    if isinstance(expr, Literal):
        return expr.width or 32
    if isinstance(expr, Past):
        return width_of(expr.expr, widths)
    if isinstance(expr, Unary):
        return width_of(expr.operand, widths)
    if isinstance(expr, Binary):
        if expr.op in ("&&", "||", "==", "!=", "<", "<=", ">", ">="):
            return 1
        return max(width_of(expr.lhs, widths), width_of(expr.rhs, widths))
    return 1


def evaluate(expr, samples, k, widths) -> int:
    """Value of a boolean/arithmetic expression at sample ``k``."""
    env = samples[k] if 0 <= k < len(samples) else {}
    if isinstance(expr, Ident):
        value = env.get(expr.name, 0)
        if expr.index is None:
            return value
        high, low = expr.index
        if low is None:
            return (value >> high) & 1
        return (value >> low) & ((1 << (high - low + 1)) - 1)
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Past):
        return evaluate(expr.expr, samples, k - (expr.depth or 1), widths)
    if isinstance(expr, Unary):
        v = evaluate(expr.operand, samples, k, widths)
        mask = (1 << width_of(expr.operand, widths)) - 1
        return {"!": int(not v), "~": ~v & mask, "-": -v & mask}[expr.op]
    if isinstance(expr, Binary):
        a = evaluate(expr.lhs, samples, k, widths)
        b = evaluate(expr.rhs, samples, k, widths)
        return int({
            "&&": bool(a) and bool(b), "||": bool(a) or bool(b), "&": a & b, "|": a | b, "^": a ^ b,
            "==": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
            "+": a + b, "-": a - b,
        }[expr.op])
    raise TypeError(f"not a boolean expression: {expr!r}")


def holds(prop, samples, k, widths) -> bool:
    if isinstance(prop, Implication):
        if not evaluate_any(prop.antecedent, samples, k, widths):
            return True
        nxt = k + 1 if prop.kind == "|=>" else k
        if nxt >= len(samples):
            return True
        return holds(prop.consequent, samples, nxt, widths)
    return bool(evaluate(prop, samples, k, widths))


def evaluate_any(expr, samples, k, widths) -> bool:
    if isinstance(expr, Implication):
        return holds(expr, samples, k, widths)
    return bool(evaluate(expr, samples, k, widths))


def settle(env: dict, assigns, widths) -> dict:
    env = dict(env)
    for _ in range(len(assigns) + 1):
        changed = False
        for target, bit, expr in assigns:
            v = evaluate(expr, [env], 0, widths)
            old = env.get(target, 0)
            new = (old & ~(1 << bit)) | ((v & 1) << bit) if bit is not None else v & ((1 << widths.get(target, 1)) - 1)
            if new != old:
                env[target] = new
                changed = True
        if not changed:
            break
    return env


def compile_step(ws: Path) -> int:
    widths, _, problems = load_module(ws / "rtl")
    print("INFO mini_sim compiling", ", ".join(sorted(p.name for p in (ws / "rtl").iterdir())))
    text = (ws / ASSERTIONS).read_text()
    located, leftovers = parse_sva_text(text)
    for a in located:
        if a.ast is None:
            diags = parse_assertion(a.padded, first_line=a.first_line)
            for d in diags if isinstance(diags, list) else []:
                problems.append(f"ERROR[SYNTAX] {ASSERTIONS}:{d.line}: {d.message}")
    for label, diags in leftovers:
        for d in diags:
            problems.append(f"ERROR[SYNTAX] {ASSERTIONS}:{d.line}: {d.message}")
    if not problems:
        for a in located:
            for sig in sorted(extract_signals(a.ast)):
                if sig not in widths:
                    problems.append(f"ERROR[ELAB] undeclared signal '{sig}' in {a.name}")
    for p in problems:
        print(p)
    return 1 if problems else 0


def run_step(ws: Path) -> int:
    widths, assigns, _ = load_module(ws / "rtl")
    inputs, expects, period = load_directives(ws / "tb")
    located, _ = parse_sva_text((ws / ASSERTIONS).read_text())
    ranges = [range(1 << w) for _, w in inputs]
    trace = []
    failures = 0
    for values in itertools.product(*ranges):
        env = settle(dict(zip((n for n, _ in inputs), values)), assigns, widths)
        t = len(trace) * period
        trace.append((t, env))
        for name, expr in expects:
            want = eval(expr, {"__builtins__": {}}, dict(env))  # directive from our own testbench
            if env.get(name, 0) != want:
                failures += 1
                if failures <= MAX_REPORTS:
                    label = "_".join(f"{n}={env[n]}" for n, _ in inputs)
                    print(f"TESTCASE FAILED {label}: expected {want:#x} got {env.get(name, 0):#x}")
    for a in located:
        clock = a.ast.clocking
        samples, times = [], []
        prev = None
        for t, env in trace:
            level = env.get(clock.signal, 0) & 1 if clock else 1
            edge = clock is None or (prev == 0 and level == 1 if clock.edge == "posedge" else prev == 1 and level == 0)
            if edge:
                samples.append(env)
                times.append(t)
            prev = level
        bad = [times[k] for k in range(len(samples)) if not holds(a.ast.body, samples, k, widths)]
        for t in bad[:MAX_REPORTS]:
            print(f"ASSERT FAILED {a.name} at {t} ns")
    if failures == 0:
        print(f"TESTCASE PASSED {len(trace)} vectors")
    print(f"$finish at {len(trace) * period} ns")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("step", choices=("compile", "run"))
    ap.add_argument("workspace", type=Path)
    args = ap.parse_args(argv)
    return compile_step(args.workspace) if args.step == "compile" else run_step(args.workspace)


if __name__ == "__main__":
    sys.exit(main())
