"""Systematic single-edit mutations of assertion listings."""
import re

_IMPLICATION_RE = re.compile(r"\|->|\|=>|(?<![|=<>!-])->")
_END_RE = re.compile(r"\bendproperty\b|\bend\s+property\b")


def _span_lines(text: str, start: int, end: int) -> tuple[int, int]:
    """Lines of the nearest non-blank characters around ``text[start:end]``."""
    before = start - 1
    while before > 0 and text[before].isspace():
        before -= 1
    after = end
    while after < len(text) and text[after].isspace():
        after += 1
    after = min(after, len(text) - 1) if text else 0
    return text.count("\n", 0, max(before, 0)) + 1, text.count("\n", 0, after) + 1


def mutate(text: str, kind: str, occurrence: int = 0):
    """Return ``(mutated_text, (first_line, last_line))`` or None when not applicable."""
    if kind == "semicolon":
        spots = [m.start() for m in re.finditer(";", text)]
        if occurrence >= len(spots):
            return None
        s = spots[occurrence]
        mutated = text[:s] + text[s + 1:]
        return mutated, _span_lines(mutated, s, s)
    if kind == "endproperty":
        hits = list(_END_RE.finditer(text))
        if not hits:
            return None
        m = hits[-1]
        mutated = text[:m.start()] + text[m.end():]
        return mutated, _span_lines(mutated, m.start(), m.start())
    if kind == "implication":
        m = _IMPLICATION_RE.search(text)
        if not m:
            return None
        mutated = text[:m.start()] + "|>" + text[m.end():]
        return mutated, _span_lines(mutated, m.start(), m.start() + 2)
    raise ValueError(kind)


KINDS = ("semicolon", "endproperty", "implication")
