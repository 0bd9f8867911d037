"""Pull assertion blocks out of fenced code in a model reply."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from ..sva.ast import PropertyAst
from ..sva.parser import parse_assertion
from ..sva.suite import IDENT_RE, Assertion, AssertionSuite, Origin, declared_name, split_blocks
from .prompts import ProviderResponse

_FENCE_RE = re.compile(r"```[^\n`]*\n(.*?)```", re.S)


@dataclass(frozen=True)
class ExtractionFailure:
    reason: str
    offending_text: str = ""

    def describe(self) -> str:
        if not self.offending_text:
            return self.reason
        excerpt = self.offending_text.strip().splitlines()
        return f"{self.reason}: {excerpt[0][:80] if excerpt else ''}"


def extract_assertions(response: Union[ProviderResponse, str], design_name: str,
                       origin: Origin = Origin()) -> Union[AssertionSuite, ExtractionFailure]:
    text = response.text if isinstance(response, ProviderResponse) else response
    fences = list(_FENCE_RE.finditer(text))
    if not fences:
        return ExtractionFailure("no code fence found")
    assertions = []
    for fence in fences:
        split = split_blocks(fence.group(1), base_offset=fence.start(1))
        if split.leftovers:
            _, bad = split.leftovers[0]
            return ExtractionFailure("unsplittable block", bad)
        for block in split.blocks:
            source = block.source(text)
            parsed = parse_assertion(source)
            ast = parsed if isinstance(parsed, PropertyAst) else None
            name = ast.name if ast is not None else declared_name(source)
            if not name or not IDENT_RE.match(name):
                return ExtractionFailure("unsplittable block", source)
            assertions.append(Assertion(name, source, block.comment, ast, origin))
    if not assertions:
        return ExtractionFailure("code fence holds no assertions", fences[0].group(1))
    return AssertionSuite(design_name, tuple(assertions))
