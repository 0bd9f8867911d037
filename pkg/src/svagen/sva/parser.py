"""Lexer and recursive-descent parser for property/assert blocks.

Accepted shape::

    property NAME ;
      [@( posedge|negedge SIGNAL )]
      EXPR ;
    endproperty            (or "end property")
    assert property ( NAME ) ;

Expression precedence, loosest first: ``|-> |=> ->`` (right assoc),
``||``, ``&&``, ``|``, ``^``, ``&``, ``== !=``, ``< <= > >=``, ``+ -``,
unary ``! ~ -``, primaries.

Errors never raise out of :func:`parse_assertion`; they come back as a
list of :class:`SyntaxDiagnostic`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .ast import (
    BASES,
    Binary,
    Clocking,
    Ident,
    Implication,
    IMPLICATION_OPS,
    Literal,
    Past,
    PropertyAst,
    PropExpr,
    Unary,
)

MAX_DIAGNOSTICS = 20

KEYWORDS = frozenset({"property", "endproperty", "end", "assert", "posedge", "negedge"})

# Real SVA constructs outside the supported subset; named explicitly in diagnostics.
UNSUPPORTED_WORDS = frozenset({
    "throughout", "within", "intersect", "and", "or", "not", "until", "s_until",
    "until_with", "s_until_with", "eventually", "s_eventually", "nexttime",
    "s_nexttime", "always", "s_always", "first_match", "disable", "iff", "if",
    "else", "sequence", "endsequence", "cover", "assume", "implies", "strong",
    "weak", "accept_on", "reject_on",
})

_OPERATORS = sorted(
    ["|->", "|=>", "->", "||", "&&", "==", "!=", "<=", ">=", "##",
     "|", "&", "^", "<", ">", "+", "-", "!", "~", "(", ")", "[", "]",
     ":", ";", ",", "@"],
    key=len, reverse=True,
)
_UNSUPPORTED_OPS = {"##"}

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_SYS_RE = re.compile(r"\$[A-Za-z_][A-Za-z0-9_$]*")
_DIGITS = {"b": "01", "o": "01234567", "d": "0123456789", "h": "0123456789abcdef"}
_RADIX = {"b": 2, "o": 8, "d": 10, "h": 16}
_BASE_NAME = {v: k for k, v in BASES.items() if v}


@dataclass(frozen=True)
class SyntaxDiagnostic:
    line: int
    column: int
    message: str
    found: str
    expected: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.message or "\n" in self.message:
            raise ValueError("diagnostic message must be one non-empty line")


def format_diagnostic(line: int, column: int, message: str,
                      found: Optional[str] = None,
                      expected: tuple[str, ...] = ()) -> str:
    """Single-line rendering shared by lint output and repair prompts."""
    out = f"line {line}, col {column}: {message}"
    if found is not None:
        if expected:
            out += f" (found '{found}', expected {', '.join(expected)})"
        else:
            out += f" (found '{found}')"
    return out


def render_diagnostic(d: SyntaxDiagnostic) -> str:
    return format_diagnostic(d.line, d.column, d.message, d.found, d.expected)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | sys | number | op | eof
    text: str
    line: int
    col: int
    end_line: int
    end_col: int
    literal: Optional[Literal] = None


class _Lexer:
    def __init__(self, text: str, first_line: int = 1):
        self.text = text
        self.pos = 0
        self.line = first_line
        self.col = 1
        self.tokens: list[Token] = []
        self.diagnostics: list[SyntaxDiagnostic] = []

    def _advance(self, n: int) -> None:
        for ch in self.text[self.pos:self.pos + n]:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n

    def _emit(self, kind: str, length: int, literal: Optional[Literal] = None) -> None:
        line, col = self.line, self.col
        text = self.text[self.pos:self.pos + length]
        self._advance(length)
        self.tokens.append(Token(kind, text, line, col, self.line, self.col, literal))

    def _error(self, line: int, col: int, message: str, found: str,
               expected: tuple[str, ...] = ()) -> None:
        self.diagnostics.append(SyntaxDiagnostic(line, col, message, found, expected))

    def run(self) -> list[Token]:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch.isspace():
                self._advance(1)
                continue
            if text.startswith("//", self.pos):
                end = text.find("\n", self.pos)
                self._advance((len(text) if end < 0 else end) - self.pos)
                continue
            if text.startswith("/*", self.pos):
                end = text.find("*/", self.pos + 2)
                if end < 0:
                    self._error(self.line, self.col, "unterminated block comment", "/*")
                    self._advance(len(text) - self.pos)
                else:
                    self._advance(end + 2 - self.pos)
                continue
            if ch in "0123456789" or ch == "'":
                self._number()
                continue
            m = _IDENT_RE.match(text, self.pos)
            if m:
                self._emit("ident", m.end() - self.pos)
                continue
            m = _SYS_RE.match(text, self.pos)
            if m:
                self._emit("sys", m.end() - self.pos)
                continue
            for op in _OPERATORS:
                if text.startswith(op, self.pos):
                    self._emit("op", len(op))
                    break
            else:
                self._error(self.line, self.col, "unsupported character", ch)
                self._advance(1)
        if self.tokens:
            last = self.tokens[-1]
            self.tokens.append(Token("eof", "", last.end_line, last.end_col, last.end_line, last.end_col))
        else:
            self.tokens.append(Token("eof", "", 1, 1, 1, 1))
        return self.tokens

    def _number(self) -> None:
        text = self.text
        start = self.pos
        m = re.compile(r"[0-9][0-9_]*").match(text, start)
        width_text = m.group(0) if m else ""
        end = m.end() if m else start
        if end >= len(text) or text[end] != "'":
            value = int(width_text.replace("_", ""))
            self._emit("number", end - start, Literal(value))
            return
        # based literal: [width] ' base digits
        base_pos = end + 1
        base_ch = text[base_pos].lower() if base_pos < len(text) else ""
        digits_m = re.compile(r"[0-9a-zA-Z_?]*").match(text, base_pos + 1)
        stop = digits_m.end() if base_ch and base_ch.isalnum() else base_pos
        raw = text[start:stop]
        literal = None
        problem = None
        if base_ch not in _DIGITS:
            problem = "malformed literal: unknown base"
            stop = max(stop, base_pos + (1 if base_ch else 0))
            raw = text[start:stop]
        else:
            digits = digits_m.group(0).replace("_", "").lower()
            if not digits:
                problem = "malformed literal: missing digits"
            elif any(c in "xz?" for c in digits):
                problem = "malformed literal: x/z digits are not supported"
            elif any(c not in _DIGITS[base_ch] for c in digits):
                problem = "malformed literal: digit not valid for base"
            else:
                value = int(digits, _RADIX[base_ch])
                width = int(width_text.replace("_", "")) if width_text else None
                if width is not None and width == 0:
                    problem = "malformed literal: zero width"
                elif width is not None and value >= 1 << width:
                    problem = f"malformed literal: value does not fit in {width} bits"
                else:
                    literal = Literal(value, _BASE_NAME[base_ch], width)
        if problem:
            self._error(self.line, self.col, problem, raw, ())
        self._emit("number", stop - start, literal)


class _Abort(Exception):
    pass


@dataclass
class _Parser:
    tokens: list[Token]
    diagnostics: list[SyntaxDiagnostic] = field(default_factory=list)
    i: int = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at_op(self, *ops: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def at_word(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == word

    @staticmethod
    def found(t: Token) -> str:
        return t.text if t.kind != "eof" else "end of input"

    def fail(self, message: str, expected: tuple[str, ...] = (), at: Optional[Token] = None):
        t = at or self.tok
        if t.kind == "ident" and t.text in UNSUPPORTED_WORDS:
            message = f"unsupported construct '{t.text}'"
        elif t.kind == "op" and t.text in _UNSUPPORTED_OPS:
            message = f"unsupported token '{t.text}'"
        elif t.kind == "sys" and t.text != "$past":
            message = f"unsupported system function '{t.text}'"
        self.diagnostics.append(SyntaxDiagnostic(t.line, t.col, message, self.found(t), expected))
        raise _Abort

    @staticmethod
    def _unsupported(t: Token) -> bool:
        return (t.kind == "ident" and t.text in UNSUPPORTED_WORDS) or \
            (t.kind == "op" and t.text in _UNSUPPORTED_OPS) or (t.kind == "sys" and t.text != "$past")

    def fail_after_previous(self, message: str, expected: tuple[str, ...]):
        """Report a missing token right after the previous token, not at the next one."""
        prev = self.tokens[self.i - 1] if self.i > 0 else self.tok
        self.diagnostics.append(
            SyntaxDiagnostic(prev.end_line, prev.end_col, message, self.found(self.tok), expected))
        raise _Abort

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            if op == ";" and not self._unsupported(self.tok):
                self.fail_after_previous("missing ';'", ("';'",))
            self.fail(f"expected '{op}'", (f"'{op}'",))
        return self.next()

    def expect_word(self, word: str) -> Token:
        if not self.at_word(word):
            self.fail(f"expected '{word}'", (f"'{word}'",))
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS or t.text in UNSUPPORTED_WORDS:
            self.fail(f"expected {what}", (what,))
        return self.next()

    # -- top level
    def assertion(self) -> PropertyAst:
        self.expect_word("property")
        name_tok = self.expect_ident("property name")
        self.expect_op(";")
        clocking = None
        if self.at_op("@"):
            clocking = self.clocking()
        if self.at_word("endproperty") or self.at_word("end") or self.at_op(";") or self.tok.kind == "eof":
            self.fail("property body is empty", ("expression",))
        body = self.implication()
        self.expect_op(";")
        if self.at_word("endproperty"):
            self.next()
        elif self.at_word("end") and self.peek().kind == "ident" and self.peek().text == "property":
            self.next()
            self.next()
        elif self.tok.kind == "eof":
            self.fail("unterminated property", ("'endproperty'",))
        else:
            self.fail("expected 'endproperty'", ("'endproperty'",))
        self.expect_word("assert")
        self.expect_word("property")
        self.expect_op("(")
        assert_tok = self.expect_ident("property name")
        self.expect_op(")")
        self.expect_op(";")
        if self.tok.kind != "eof":
            self.fail("unexpected text after assert statement", ("end of input",))
        if assert_tok.text != name_tok.text:
            self.diagnostics.append(SyntaxDiagnostic(
                assert_tok.line, assert_tok.col,
                f"assert names '{assert_tok.text}' but property is '{name_tok.text}'",
                assert_tok.text, (f"'{name_tok.text}'",)))
        return PropertyAst(name_tok.text, body, clocking)

    def clocking(self) -> Clocking:
        self.expect_op("@")
        self.expect_op("(")
        if not (self.at_word("posedge") or self.at_word("negedge")):
            self.fail("expected clock edge", ("'posedge'", "'negedge'"))
        edge = self.next().text
        signal = self.expect_ident("clock signal").text
        self.expect_op(")")
        return Clocking(edge, signal)

    # -- expressions
    def implication(self) -> PropExpr:
        lhs = self.binary(0)
        if self.at_op(*IMPLICATION_OPS):
            kind = self.next().text
            rhs = self.implication()
            return Implication(kind, lhs, rhs)
        return lhs

    _LEVELS = (("||",), ("&&",), ("|",), ("^",), ("&",), ("==", "!="),
               ("<", "<=", ">", ">="), ("+", "-"))

    def binary(self, level: int) -> PropExpr:
        if level == len(self._LEVELS):
            return self.unary()
        ops = self._LEVELS[level]
        lhs = self.binary(level + 1)
        while self.at_op(*ops):
            op = self.next().text
            rhs = self.binary(level + 1)
            lhs = Binary(op, lhs, rhs)
        return lhs

    def unary(self) -> PropExpr:
        if self.at_op("!", "~", "-"):
            op = self.next().text
            return Unary(op, self.unary())
        return self.primary()

    def primary(self) -> PropExpr:
        t = self.tok
        if self.at_op("("):
            self.next()
            inner = self.implication()
            self.expect_op(")")
            return inner
        if t.kind == "sys" and t.text == "$past":
            return self.past()
        if t.kind == "number":
            self.next()
            return t.literal if t.literal is not None else Literal(0)
        if t.kind == "ident" and t.text not in KEYWORDS and t.text not in UNSUPPORTED_WORDS:
            self.next()
            index = self.index() if self.at_op("[") else None
            return Ident(t.text, index)
        self.fail("expected expression", ("expression",))

    def past(self) -> Past:
        self.next()
        self.expect_op("(")
        expr = self.implication()
        depth = None
        if self.at_op(","):
            self.next()
            t = self.tok
            if t.kind != "number" or t.literal is None or t.literal.base != "unsized-decimal" or t.literal.value < 1:
                self.fail("$past depth must be a positive integer", ("positive integer",))
            depth = self.next().literal.value
        self.expect_op(")")
        return Past(expr, depth)

    def _index_number(self) -> int:
        t = self.tok
        if t.kind != "number" or t.literal is None or t.literal.base != "unsized-decimal":
            self.fail("malformed slice", ("integer",))
        self.next()
        return t.literal.value

    def index(self) -> tuple[int, Optional[int]]:
        open_tok = self.next()
        high = self._index_number()
        low = None
        if self.at_op(":"):
            self.next()
            low = self._index_number()
        if not self.at_op("]"):
            self.fail("malformed slice", ("']'",))
        self.next()
        if low is not None and high < low:
            self.diagnostics.append(SyntaxDiagnostic(
                open_tok.line, open_tok.col, "malformed slice: high index below low index",
                f"[{high}:{low}]", ()))
            raise _Abort
        return (high, low)


def _finish(diags: list[SyntaxDiagnostic]) -> list[SyntaxDiagnostic]:
    unique = sorted(set(diags), key=lambda d: (d.line, d.column, d.message))
    return unique[:MAX_DIAGNOSTICS]


def parse_assertion(source_text: str, *, first_line: int = 1) -> Union[PropertyAst, list[SyntaxDiagnostic]]:
    """Parse one property declaration plus its assert statement."""
    if not source_text.strip():
        return [SyntaxDiagnostic(first_line, 1, "empty assertion text", "end of input", ("'property'",))]
    lexer = _Lexer(source_text, first_line)
    tokens = lexer.run()
    parser = _Parser(tokens)
    ast = None
    try:
        ast = parser.assertion()
    except _Abort:
        pass
    diags = lexer.diagnostics + parser.diagnostics
    if diags or ast is None:
        return _finish(diags)
    return ast


def parse_expression(text: str) -> Union[PropExpr, list[SyntaxDiagnostic]]:
    lexer = _Lexer(text)
    parser = _Parser(lexer.run())
    expr = None
    try:
        expr = parser.implication()
        if parser.tok.kind != "eof":
            parser.fail("unexpected text after expression", ("end of input",))
    except _Abort:
        pass
    diags = lexer.diagnostics + parser.diagnostics
    if diags or expr is None:
        return _finish(diags)
    return expr
