"""SystemVerilog assertion subset: parsing, rendering, suites."""
from .ast import (Binary, Clocking, Ident, Implication, Literal, Past, PropertyAst,
                  Unary, extract_signals)
from .parser import (SyntaxDiagnostic, format_diagnostic, parse_assertion,
                     parse_expression, render_diagnostic)
from .render import render, render_expr
from .suite import (Assertion, AssertionSuite, Origin, lint_sva_text, load_sva,
                    split_blocks, validate_suite)

__all__ = [
    "Assertion", "AssertionSuite", "Binary", "Clocking", "Ident", "Implication",
    "Literal", "Origin", "Past", "PropertyAst", "SyntaxDiagnostic", "Unary",
    "extract_signals", "format_diagnostic", "lint_sva_text", "load_sva",
    "parse_assertion", "parse_expression", "render", "render_diagnostic",
    "render_expr", "split_blocks", "validate_suite",
]
