"""Turn a free-form design specification into the seven-label structured form.

Extraction is a deterministic heading split; labelling is driven by an
explicit ``label_map`` from the run configuration.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

log = logging.getLogger(__name__)

LABELS = (
    "introduction",
    "system_overview",
    "definitions",
    "parameters",
    "functional_requirements",
    "timing_requirements",
    "extra_info",
)

DESIGN_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
DEFAULT_HEADING_RE = re.compile(r"^\s{0,3}(#{1,6})\s*(.*?)\s*#*\s*$")
_UNDERLINE_RE = re.compile(r"^\s*(=+|-+)\s*$")


class SpecFormatError(Exception):
    pass


class EmptyDocument(SpecFormatError):
    pass


class MissingFunctionalRequirements(SpecFormatError):
    pass


class SpecParseError(SpecFormatError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


class SchemaError(SpecFormatError):
    def __init__(self, key: str, reason: str = ""):
        super().__init__(f"{key}: {reason}" if reason else key)
        self.key = key


@dataclass(frozen=True)
class SpecDocument:
    source_path: str
    body: str
    design_name: str

    def __post_init__(self):
        if not DESIGN_NAME_RE.match(self.design_name):
            raise ValueError(f"invalid design name {self.design_name!r}")

    @classmethod
    def from_file(cls, path, design_name: Optional[str] = None) -> "SpecDocument":
        path = Path(path)
        name = design_name or re.sub(r"\W", "_", path.name.split(".")[0])
        return cls(str(path), path.read_text(encoding="utf-8"), name)


@dataclass(frozen=True)
class Section:
    heading: str
    content: str
    # verbatim heading line(s); marker + content reproduces the source slice
    marker: str = ""


@dataclass(frozen=True)
class UnformattedExtract:
    sections: tuple[Section, ...]

    def headings(self) -> list[str]:
        return [s.heading for s in self.sections]


def normalize_heading(heading: str) -> str:
    return re.sub(r"\s+", "_", heading.strip().lower())


def extract(doc: SpecDocument, heading_pattern: Optional[re.Pattern] = None) -> UnformattedExtract:
    """Split the document body at heading lines.

    ``heading_pattern`` must expose the heading text as its last group.  Setext
    style (a title line underlined with ``===`` or ``---``) is recognised in
    addition to the pattern.
    """
    if not doc.body.strip():
        raise EmptyDocument(doc.source_path)
    pattern = heading_pattern or DEFAULT_HEADING_RE
    lines = doc.body.splitlines(keepends=True)

    sections: list[tuple[str, str, list[str]]] = []  # heading, marker, content lines
    current_heading, current_marker, current = "preamble", "", []
    i = 0
    while i < len(lines):
        line = lines[i]
        m = pattern.match(line.rstrip("\r\n"))
        heading = None
        marker = line
        if m and m.groups() and m.group(m.lastindex or 0).strip():
            heading = m.group(m.lastindex or 0).strip()
        elif (line.strip() and i + 1 < len(lines) and _UNDERLINE_RE.match(lines[i + 1])
              and not pattern.match(line.rstrip("\r\n"))):
            heading = line.strip()
            marker = line + lines[i + 1]
            i += 1
        if heading is not None:
            if current_marker or "".join(current).strip():
                sections.append((current_heading, current_marker, current))
            else:
                # whitespace-only preamble rides along with the first heading
                marker = "".join(current) + marker
            current_heading, current_marker, current = heading, marker, []
        else:
            current.append(line)
        i += 1
    sections.append((current_heading, current_marker, current))

    if len(sections) == 1 and sections[0][0] == "preamble":
        log.warning("%s: no heading markers found; whole body is one 'preamble' section", doc.source_path)

    seen: dict[str, int] = {}
    out = []
    for heading, marker, content in sections:
        norm = normalize_heading(heading)
        if norm in seen:
            seen[norm] += 1
            heading = f"{heading} {seen[norm]}"
            norm = normalize_heading(heading)
        seen.setdefault(norm, 1)
        out.append(Section(norm, "".join(content), marker))
    return UnformattedExtract(tuple(out))


@dataclass(frozen=True)
class Definition:
    term: str
    meaning: str


@dataclass(frozen=True)
class Parameter:
    name: str
    description: str
    width_or_value: Optional[str] = None


def _clean_list(items) -> tuple[str, ...]:
    return tuple(str(x).strip() for x in items)


@dataclass(frozen=True)
class FormattedSpec:
    functional_requirements: tuple[str, ...]
    introduction: str = ""
    system_overview: str = ""
    definitions: tuple[Definition, ...] = ()
    parameters: tuple[Parameter, ...] = ()
    timing_requirements: tuple[str, ...] = ()
    extra_info: Optional[str] = None

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("functional_requirements", _clean_list(self.functional_requirements))
        set_("timing_requirements", _clean_list(self.timing_requirements))
        set_("introduction", self.introduction.strip())
        set_("system_overview", self.system_overview.strip())
        set_("definitions", tuple(Definition(d.term.strip(), d.meaning.strip()) for d in self.definitions))
        set_("parameters", tuple(
            Parameter(p.name.strip(), p.description.strip(),
                      p.width_or_value.strip() if p.width_or_value is not None else None)
            for p in self.parameters))
        if self.extra_info is not None:
            set_("extra_info", self.extra_info.strip())
        if not self.functional_requirements:
            raise MissingFunctionalRequirements("functional_requirements is empty")
        for label in ("functional_requirements", "timing_requirements"):
            if any(not entry for entry in getattr(self, label)):
                raise SchemaError(label, "requirement entries must be non-empty")


_BULLET_RE = re.compile(r"^\s*(?:[-*+•]|\d+[.)]|[a-z][.)])\s+")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+(?=[A-Z0-9(\"'`])")


def split_entries(text: str) -> list[str]:
    """Split requirement prose into entries at bullets, blank lines and sentence ends."""
    entries: list[str] = []
    paragraph: list[str] = []
    bullet: Optional[list[str]] = None

    def flush_paragraph():
        if paragraph:
            joined = " ".join(s.strip() for s in paragraph)
            entries.extend(s.strip() for s in _SENTENCE_SPLIT_RE.split(joined) if s.strip())
            paragraph.clear()

    for line in text.splitlines():
        if not line.strip():
            if bullet is not None:
                entries.append(" ".join(bullet))
                bullet = None
            flush_paragraph()
            continue
        m = _BULLET_RE.match(line)
        if m:
            flush_paragraph()
            if bullet is not None:
                entries.append(" ".join(bullet))
            bullet = [line[m.end():].strip()]
        elif bullet is not None and line[:1].isspace():
            bullet.append(line.strip())
        else:
            if bullet is not None:
                entries.append(" ".join(bullet))
                bullet = None
            paragraph.append(line)
    if bullet is not None:
        entries.append(" ".join(bullet))
    flush_paragraph()
    return [e for e in (e.strip() for e in entries) if e]


_PAIR_RE = re.compile(r"^(?P<key>[^:|]+?)\s*(?::|\s[-–—]\s)\s*(?P<rest>.+)$")
_PARAM_KEY_RE = re.compile(r"^(?P<name>[^\s(\[]+)\s*(?:[(\[](?P<value>[^)\]]*)[)\]])?$")


def _table_rows(text: str) -> list[list[str]]:
    rows = []
    for line in text.splitlines():
        s = line.strip()
        if not (s.startswith("|") and s.endswith("|")):
            continue
        cells = [c.strip() for c in s.strip("|").split("|")]
        if all(re.fullmatch(r":?-{2,}:?", c) for c in cells if c):
            continue
        rows.append(cells)
    return rows[1:] if rows else rows  # first row is the header


def _pair_lines(text: str) -> list[tuple[str, str]]:
    pairs = []
    for line in split_entries_by_line(text):
        m = _PAIR_RE.match(line)
        if m:
            pairs.append((m.group("key").strip("`* "), m.group("rest").strip()))
        elif pairs:
            key, meaning = pairs[-1]
            pairs[-1] = (key, f"{meaning} {line}".strip())
        else:
            pairs.append((line, ""))
    return pairs


def split_entries_by_line(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        s = line.strip()
        if not s or (s.startswith("|") and s.endswith("|")):
            continue
        m = _BULLET_RE.match(line)
        out.append(line[m.end():].strip() if m else s)
    return out


def parse_definitions(text: str) -> list[Definition]:
    rows = _table_rows(text)
    if rows:
        return [Definition(r[0], " ".join(r[1:])) for r in rows if r and r[0]]
    return [Definition(k, v) for k, v in _pair_lines(text)]


def parse_parameters(text: str) -> list[Parameter]:
    rows = _table_rows(text)
    if rows:
        return [Parameter(r[0], r[1] if len(r) > 1 else "", (r[2] or None) if len(r) > 2 else None)
                for r in rows if r and r[0]]
    out = []
    for key, desc in _pair_lines(text):
        m = _PARAM_KEY_RE.match(key)
        if m:
            out.append(Parameter(m.group("name"), desc, m.group("value")))
        else:
            out.append(Parameter(key, desc))
    return out


def _invert(label_map: Mapping[str, Sequence[str]]) -> dict[str, str]:
    inverse = {}
    for label, headings in label_map.items():
        if label not in LABELS:
            raise SchemaError(label, "not one of the seven specification labels")
        if isinstance(headings, str):
            headings = [headings]
        for h in headings:
            inverse[normalize_heading(h)] = label
    return inverse


def to_formatted(extract_: UnformattedExtract, label_map: Mapping[str, Sequence[str]]) -> FormattedSpec:
    inverse = _invert(label_map)
    buckets: dict[str, list[str]] = {label: [] for label in LABELS}
    unmapped: list[str] = []
    for section in extract_.sections:
        label = inverse.get(section.heading)
        content = section.content.strip()
        if label is None:
            if content:
                unmapped.append(f"{section.heading}: {content}")
            continue
        buckets[label].append(content)

    functional = [e for c in buckets["functional_requirements"] for e in split_entries(c)]
    if not functional:
        raise MissingFunctionalRequirements("no section maps to functional_requirements, or it is empty")
    extra_parts = [c for c in buckets["extra_info"] if c] + unmapped
    return FormattedSpec(
        introduction="\n\n".join(c for c in buckets["introduction"] if c),
        system_overview="\n\n".join(c for c in buckets["system_overview"] if c),
        definitions=tuple(d for c in buckets["definitions"] for d in parse_definitions(c)),
        parameters=tuple(p for c in buckets["parameters"] for p in parse_parameters(c)),
        functional_requirements=tuple(functional),
        timing_requirements=tuple(e for c in buckets["timing_requirements"] for e in split_entries(c)),
        extra_info="\n\n".join(extra_parts) if extra_parts else None,
    )


def spec_to_dict(spec: FormattedSpec) -> dict:
    out = {
        "introduction": spec.introduction,
        "system_overview": spec.system_overview,
        "definitions": [{"term": d.term, "meaning": d.meaning} for d in spec.definitions],
        "parameters": [
            {"name": p.name, "description": p.description,
             **({"width_or_value": p.width_or_value} if p.width_or_value is not None else {})}
            for p in spec.parameters
        ],
        "functional_requirements": list(spec.functional_requirements),
        "timing_requirements": list(spec.timing_requirements),
    }
    if spec.extra_info is not None:
        out["extra_info"] = spec.extra_info
    return out


def serialize_spec(spec: FormattedSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2, ensure_ascii=False) + "\n"


def _expect(value, kind, key):
    if not isinstance(value, kind):
        raise SchemaError(key, f"expected {kind.__name__}")
    return value


def _object_entries(items, key, required, optional=()):
    entries = []
    for i, item in enumerate(_expect(items, list, key)):
        where = f"{key}[{i}]"
        _expect(item, dict, where)
        for k in item:
            if k not in required and k not in optional:
                raise SchemaError(f"{where}.{k}", "unknown key")
        for k in required:
            if k not in item:
                raise SchemaError(f"{where}.{k}", "missing")
            _expect(item[k], str, f"{where}.{k}")
        for k in optional:
            if k in item and item[k] is not None:
                _expect(item[k], str, f"{where}.{k}")
        entries.append(item)
    return entries


def deserialize_spec(text: str) -> FormattedSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise SchemaError("<root>", "expected an object")
    for key in data:
        if key not in LABELS:
            raise SchemaError(key, "unknown key")
    if "functional_requirements" not in data:
        raise SchemaError("functional_requirements", "missing")
    functional = _expect(data["functional_requirements"], list, "functional_requirements")
    timing = _expect(data.get("timing_requirements", []), list, "timing_requirements")
    for key, entries in (("functional_requirements", functional), ("timing_requirements", timing)):
        for i, e in enumerate(entries):
            if not isinstance(e, str) or not e.strip():
                raise SchemaError(f"{key}[{i}]", "expected non-empty text")
    if not functional:
        raise SchemaError("functional_requirements", "must not be empty")
    extra = data.get("extra_info")
    if extra is not None:
        _expect(extra, str, "extra_info")
    return FormattedSpec(
        introduction=_expect(data.get("introduction", ""), str, "introduction"),
        system_overview=_expect(data.get("system_overview", ""), str, "system_overview"),
        definitions=tuple(Definition(d["term"], d["meaning"])
                          for d in _object_entries(data.get("definitions", []), "definitions", ("term", "meaning"))),
        parameters=tuple(Parameter(p["name"], p["description"], p.get("width_or_value"))
                         for p in _object_entries(data.get("parameters", []), "parameters",
                                                  ("name", "description"), ("width_or_value",))),
        functional_requirements=tuple(functional),
        timing_requirements=tuple(timing),
        extra_info=extra,
    )


def load_formatted(path, label_map: Optional[Mapping[str, Sequence[str]]] = None,
                   design_name: Optional[str] = None) -> FormattedSpec:
    """Read either a ``.spec.json`` file or a raw document plus label map."""
    path = Path(path)
    if path.name.endswith(".spec.json"):
        return deserialize_spec(path.read_text(encoding="utf-8"))
    doc = SpecDocument.from_file(path, design_name)
    return to_formatted(extract(doc), label_map or {})
