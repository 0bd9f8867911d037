"""Canonical pretty-printer; parse(render(ast)) == ast for every valid AST."""
from __future__ import annotations

from .ast import BASES, Binary, Ident, Implication, Literal, Past, PropertyAst, PropExpr, Unary

_PREC = {
    "||": 2, "&&": 3, "|": 4, "^": 5, "&": 6,
    "==": 7, "!=": 7, "<": 8, "<=": 8, ">": 8, ">=": 8, "+": 9, "-": 9,
}
_IMPLICATION_PREC = 1
_UNARY_PREC = 10
_ATOM_PREC = 11


def _prec(e: PropExpr) -> int:
    if isinstance(e, Implication):
        return _IMPLICATION_PREC
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return _UNARY_PREC
    return _ATOM_PREC


def _wrap(e: PropExpr, parens: bool) -> str:
    text = render_expr(e)
    return f"({text})" if parens else text


def render_literal(lit: Literal) -> str:
    if lit.base == "unsized-decimal":
        return str(lit.value)
    letter = BASES[lit.base]
    digits = {"b": "b", "o": "o", "d": "d", "h": "x"}[letter]
    width = "" if lit.width is None else str(lit.width)
    return f"{width}'{letter}{format(lit.value, digits)}"


def render_expr(e: PropExpr) -> str:
    if isinstance(e, Implication):
        # antecedent needs parens only when it is itself an implication; binary
        # operands get them anyway for readability
        lhs = _wrap(e.antecedent, isinstance(e.antecedent, (Implication, Binary)))
        rhs = _wrap(e.consequent, isinstance(e.consequent, Binary))
        return f"{lhs} {e.kind} {rhs}"
    if isinstance(e, Binary):
        p = _PREC[e.op]
        lhs = _wrap(e.lhs, _prec(e.lhs) < p)
        rhs = _wrap(e.rhs, _prec(e.rhs) <= p)
        return f"{lhs} {e.op} {rhs}"
    if isinstance(e, Unary):
        operand = _wrap(e.operand, _prec(e.operand) < _UNARY_PREC)
        # keep "- -x" from reading as a single token in other tools
        sep = " " if e.op == "-" and operand.startswith("-") else ""
        return f"{e.op}{sep}{operand}"
    if isinstance(e, Past):
        inner = render_expr(e.expr)
        return f"$past({inner})" if e.depth is None else f"$past({inner}, {e.depth})"
    if isinstance(e, Ident):
        if e.index is None:
            return e.name
        high, low = e.index
        return f"{e.name}[{high}]" if low is None else f"{e.name}[{high}:{low}]"
    if isinstance(e, Literal):
        return render_literal(e)
    raise TypeError(f"not an expression node: {e!r}")


def render(ast: PropertyAst) -> str:
    lines = [f"property {ast.name};"]
    if ast.clocking is not None:
        lines.append(f"  @({ast.clocking.edge} {ast.clocking.signal})")
    lines.append(f"  {render_expr(ast.body)};")
    lines.append("endproperty")
    lines.append(f"assert property ({ast.name});")
    return "\n".join(lines) + "\n"
