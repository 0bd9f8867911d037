"""AST node types for the supported SVA subset."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

OVERLAPPING = "|->"
NON_OVERLAPPING = "|=>"
BOOLEAN = "->"
IMPLICATION_OPS = (OVERLAPPING, NON_OVERLAPPING, BOOLEAN)

BINARY_OPS = ("&&", "||", "&", "|", "^", "==", "!=", "<", "<=", ">", ">=", "+", "-")
UNARY_OPS = ("!", "~", "-")

# base name -> SystemVerilog base letter
BASES = {"binary": "b", "octal": "o", "decimal": "d", "hex": "h", "unsized-decimal": ""}


@dataclass(frozen=True)
class Ident:
    name: str
    # (high, low); low is None for a single-bit select
    index: Optional[tuple[int, Optional[int]]] = None


@dataclass(frozen=True)
class Literal:
    value: int
    base: str = "unsized-decimal"
    width: Optional[int] = None

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"unknown literal base {self.base!r}")
        if self.value < 0:
            raise ValueError("literal value must be non-negative")
        if self.width is not None:
            if self.width <= 0:
                raise ValueError("literal width must be positive")
            if self.value >= 1 << self.width:
                raise ValueError(f"value {self.value} does not fit in {self.width} bits")
        if self.base == "unsized-decimal" and self.width is not None:
            raise ValueError("unsized-decimal literal cannot carry a width")


@dataclass(frozen=True)
class Past:
    expr: "PropExpr"
    depth: Optional[int] = None


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "PropExpr"


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "PropExpr"
    rhs: "PropExpr"


@dataclass(frozen=True)
class Implication:
    kind: str
    antecedent: "PropExpr"
    consequent: "PropExpr"


PropExpr = Union[Implication, Binary, Unary, Past, Ident, Literal]


@dataclass(frozen=True)
class Clocking:
    edge: str
    signal: str


@dataclass(frozen=True)
class PropertyAst:
    name: str
    body: PropExpr
    clocking: Optional[Clocking] = None


def walk(expr: PropExpr):
    """Yield every node of an expression tree, parents before children."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Implication):
            stack.extend((node.consequent, node.antecedent))
        elif isinstance(node, Binary):
            stack.extend((node.rhs, node.lhs))
        elif isinstance(node, Unary):
            stack.append(node.operand)
        elif isinstance(node, Past):
            stack.append(node.expr)


def extract_signals(ast: PropertyAst) -> set[str]:
    signals = {n.name for n in walk(ast.body) if isinstance(n, Ident)}
    if ast.clocking is not None:
        signals.add(ast.clocking.signal)
    return signals
