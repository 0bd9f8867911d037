"""Assertions, suites, ``.sva`` files and the local syntax gate."""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .ast import PropertyAst
from .parser import SyntaxDiagnostic, parse_assertion

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# terminator of one block; the trailing ';' is optional so a missing one is
# diagnosed by the parser instead of silently merging blocks
_TERMINATOR_RE = re.compile(r"\bassert\s+property\s*\(\s*[A-Za-z_0-9$]*\s*\)\s*;?")
_PROPERTY_RE = re.compile(r"\bproperty\b")
_PREV_WORD_RE = re.compile(r"(\w+)\s*\Z")
_NAME_AFTER_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)")


@dataclass(frozen=True)
class Origin:
    kind: str = "initial"  # initial | repair
    iteration: Optional[int] = None

    @classmethod
    def repair(cls, iteration: int) -> "Origin":
        return cls("repair", iteration)

    def to_json(self):
        return {"kind": self.kind, "iteration": self.iteration}


@dataclass(frozen=True)
class Assertion:
    name: str
    source_text: str
    comment: Optional[str] = None
    ast: Optional[PropertyAst] = field(default=None, compare=False)
    origin: Origin = Origin()

    def __post_init__(self):
        if not IDENT_RE.match(self.name):
            raise ValueError(f"invalid assertion name {self.name!r}")

    @classmethod
    def from_text(cls, source_text: str, comment: Optional[str] = None,
                  origin: Origin = Origin(), name: Optional[str] = None) -> "Assertion":
        parsed = parse_assertion(source_text)
        ast = parsed if isinstance(parsed, PropertyAst) else None
        if name is None:
            name = ast.name if ast is not None else declared_name(source_text)
        if name is None:
            raise ValueError("cannot determine property name")
        return cls(name, source_text, comment, ast, origin)

    def to_sva(self) -> str:
        head = f"// {self.comment}\n" if self.comment else ""
        return head + self.source_text.strip() + "\n"

    def to_json(self):
        return {"name": self.name, "comment": self.comment,
                "origin": self.origin.to_json(), "source_text": self.source_text}


@dataclass(frozen=True)
class AssertionSuite:
    design_name: str
    assertions: tuple[Assertion, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "assertions", tuple(self.assertions))

    def __len__(self):
        return len(self.assertions)

    def __iter__(self):
        return iter(self.assertions)

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.assertions]

    def get(self, name: str) -> Optional[Assertion]:
        for a in self.assertions:
            if a.name == name:
                return a
        return None

    def to_sva(self) -> str:
        return "\n".join(a.to_sva() for a in self.assertions)


def declared_name(text: str) -> Optional[str]:
    names = _declarations(_blank_comments(text))
    return names[0] if names else None


def _declaration_matches(text: str):
    # bare "property NAME" occurrences, skipping "assert property" and "end property"
    for m in _PROPERTY_RE.finditer(text):
        prev = _PREV_WORD_RE.search(text, max(0, m.start() - 40), m.start())
        if prev and prev.group(1) in ("assert", "end"):
            continue
        name = _NAME_AFTER_RE.match(text, m.end())
        yield m.start(), name.group(1) if name else ""


def _declarations(text: str) -> list[str]:
    return [name for _, name in _declaration_matches(text)]


@dataclass(frozen=True)
class Block:
    """A slice of a larger text holding one property + assert pair."""
    start: int  # offset of the property keyword
    end: int
    comment: Optional[str]
    first_line: int
    line_start: int  # offset of the first character of the line holding ``start``

    def source(self, text: str) -> str:
        return text[self.start:self.end]


@dataclass(frozen=True)
class SplitResult:
    blocks: list[Block]
    # (offset, text) of regions that could not be split into blocks
    leftovers: list[tuple[int, str]]


def _blank_comments(text: str) -> str:
    """Replace comment characters with spaces, keeping offsets and newlines."""
    def blank(m):
        return re.sub(r"[^\n]", " ", m.group(0))
    return re.sub(r"/\*.*?(\*/|\Z)|//[^\n]*", blank, text, flags=re.S)


def split_blocks(text: str, base_offset: int = 0) -> SplitResult:
    blocks: list[Block] = []
    leftovers: list[tuple[int, str]] = []
    masked = _blank_comments(text)
    pos = 0
    for m in _TERMINATOR_RE.finditer(masked):
        segment = text[pos:m.end()]
        masked_segment = masked[pos:m.end()]
        if len(_declarations(masked_segment)) != 1:
            leftovers.append((base_offset + pos, segment))
            pos = m.end()
            continue
        prelude_end = _first_decl_offset(masked_segment)
        prelude = segment[:prelude_end]
        comment = None
        for line in prelude.splitlines():
            s = line.strip()
            if s.startswith("//"):
                comment = s[2:].strip() or None
                break
        start = pos + prelude_end
        line_start = text.rfind("\n", 0, start) + 1
        first_line = text.count("\n", 0, start) + 1
        blocks.append(Block(base_offset + start, base_offset + m.end(), comment, first_line, base_offset + line_start))
        pos = m.end()
    tail = text[pos:]
    if masked[pos:].strip():
        leftovers.append((base_offset + pos, tail))
    return SplitResult(blocks, leftovers)


def _first_decl_offset(segment: str) -> int:
    for start, _ in _declaration_matches(segment):
        return start
    raise ValueError("segment has no property declaration")


def parse_sva_text(text: str, design_name: str = "design"):
    """Split ``.sva`` text into a suite plus diagnostics for unsplittable regions.

    Returns ``(suite, problems)`` where ``problems`` is a list of
    ``(label, [SyntaxDiagnostic])`` for regions that did not form a block.
    Diagnostic positions are relative to the whole file.
    """
    split = split_blocks(text)
    assertions = []
    for b in split.blocks:
        source = b.source(text)
        name = declared_name(source) or "unnamed"
        if not IDENT_RE.match(name):
            name = "unnamed"
        # pad with spaces so columns stay file-relative
        padded = " " * (b.start - b.line_start) + source
        parsed = parse_assertion(padded, first_line=b.first_line)
        ast = parsed if isinstance(parsed, PropertyAst) else None
        assertions.append(_LocatedAssertion(
            name=ast.name if ast else name, source_text=source, comment=b.comment,
            ast=ast, first_line=b.first_line, padded=padded))
    problems = []
    for offset, seg in split.leftovers:
        line_start = text.rfind("\n", 0, offset) + 1
        first_line = text.count("\n", 0, offset) + 1
        parsed = parse_assertion(" " * (offset - line_start) + seg, first_line=first_line)
        diags = parsed if isinstance(parsed, list) else [SyntaxDiagnostic(
            first_line, 1, "text does not form a property/assert block", seg.strip()[:20])]
        problems.append((declared_name(seg) or f"<line {first_line}>", diags))
    return assertions, problems


@dataclass(frozen=True)
class _LocatedAssertion:
    name: str
    source_text: str
    comment: Optional[str]
    ast: Optional[PropertyAst]
    first_line: int
    padded: str


def load_sva(path, design_name: str = "design") -> AssertionSuite:
    text = Path(path).read_text(encoding="utf-8")
    located, problems = parse_sva_text(text, design_name)
    if problems:
        raise ValueError(f"{path}: unsplittable text near {problems[0][0]}")
    return AssertionSuite(design_name, tuple(
        Assertion(a.name, a.source_text, a.comment, a.ast) for a in located))


def lint_sva_text(text: str) -> list[tuple[str, list[SyntaxDiagnostic]]]:
    """Diagnostics for a whole ``.sva`` file with file-relative positions."""
    located, problems = parse_sva_text(text)
    out = []
    seen = set()
    for a in located:
        diags = []
        if a.ast is None:
            parsed = parse_assertion(a.padded, first_line=a.first_line)
            diags.extend(parsed if isinstance(parsed, list) else [])
        if a.name in seen:
            diags.append(_duplicate_diag(a.padded, a.name, a.first_line))
        seen.add(a.name)
        if diags:
            out.append((a.name, diags))
    out.extend(problems)
    out.sort(key=lambda entry: (entry[1][0].line, entry[1][0].column) if entry[1] else (0, 0))
    return out


def _duplicate_diag(source: str, name: str, first_line: int = 1) -> SyntaxDiagnostic:
    m = re.search(r"\bproperty\s+(" + re.escape(name) + r")\b", source)
    line, col = first_line, 1
    if m:
        before = source[:m.start(1)]
        line = first_line + before.count("\n")
        col = m.start(1) - (before.rfind("\n") + 1) + 1
    return SyntaxDiagnostic(line, col, f"duplicate property name '{name}'", name, ("unique property name",))


def validate_suite(suite: AssertionSuite) -> list[tuple[str, list[SyntaxDiagnostic]]]:
    """Local syntax gate: parse every assertion, flag duplicates and name drift."""
    out = []
    seen: set[str] = set()
    for a in suite.assertions:
        parsed = parse_assertion(a.source_text)
        diags = list(parsed) if isinstance(parsed, list) else []
        if isinstance(parsed, PropertyAst) and parsed.name != a.name:
            diags.append(SyntaxDiagnostic(1, 1, f"property is named '{parsed.name}' but recorded as '{a.name}'",
                                          parsed.name, (f"'{a.name}'",)))
        if a.name in seen:
            diags.append(_duplicate_diag(a.source_text, a.name))
        seen.add(a.name)
        if diags:
            out.append((a.name, diags))
    return out


def reparse(a: Assertion) -> Assertion:
    parsed = parse_assertion(a.source_text)
    return replace(a, ast=parsed if isinstance(parsed, PropertyAst) else None)
