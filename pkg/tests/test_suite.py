from hypothesis import given, settings, strategies as st

from strategies import property_asts
from svagen.llm import ExtractionFailure, extract_assertions
from svagen.sva import Assertion, AssertionSuite, lint_sva_text, load_sva, render, validate_suite
from svagen.sva.suite import split_blocks

from conftest import FIXTURES

LISTING_NAMES = [
    "p_reset_tick_count", "p_tick_count_increment", "tick_count_increment",
    "tick_count_reset_on_reset_deassert", "prop_carry_out", "prop_sum_bits",
]


def test_listings_file_loads_in_order_with_comments():
    suite = load_sva(FIXTURES / "reference_listings.sva")
    assert suite.names == LISTING_NAMES
    assert suite.get("p_reset_tick_count").comment.startswith("Assertion to check if tick_count resets")
    assert all(a.ast is not None for a in suite)


def test_listings_validate_clean():
    suite = load_sva(FIXTURES / "reference_listings.sva")
    assert validate_suite(suite) == []
    assert lint_sva_text((FIXTURES / "reference_listings.sva").read_text()) == []


def test_name_mismatch_reported_once():
    text = "property p_a;\na |-> b;\nendproperty\nassert property (p_b);\n"
    suite = AssertionSuite("d", (Assertion.from_text("property p_c; a; endproperty assert property (p_c);"),
                                 Assertion("p_a", text)))
    problems = validate_suite(suite)
    assert [name for name, _ in problems] == ["p_a"]
    (d,) = problems[0][1]
    assert d.found == "p_b"


def test_duplicate_name_flagged_on_second():
    a = Assertion.from_text("property p_reset; a |-> b; endproperty assert property (p_reset);")
    b = Assertion.from_text("property p_reset; c |-> d; endproperty assert property (p_reset);")
    problems = validate_suite(AssertionSuite("d", (a, b)))
    assert len(problems) == 1
    name, (d,) = problems[0]
    assert name == "p_reset" and "duplicate" in d.message


def test_lint_duplicate_positions_point_at_second_block():
    text = ("property p; a; endproperty assert property (p);\n\n"
            "property p; b; endproperty assert property (p);\n")
    ((name, (d,)),) = lint_sva_text(text)
    assert (d.line, d.column) == (3, 10)


def test_leading_comment_and_block_comment_handling():
    text = "/* property ghost; */\n// first\nproperty p; a; endproperty\nassert property (p);\n"
    split = split_blocks(text)
    assert not split.leftovers
    (block,) = split.blocks
    assert block.comment == "first"
    assert block.source(text).startswith("property p;")


def test_trailing_garbage_is_a_leftover():
    split = split_blocks("property p; a; endproperty assert property (p);\nstray text\n")
    assert len(split.blocks) == 1
    assert split.leftovers and "stray" in split.leftovers[0][1]


def test_empty_suite_serializes_to_empty_text():
    assert AssertionSuite("d").to_sva() == ""


def _fence(blocks):
    return "Here you go:\n```systemverilog\n" + "\n\n".join(blocks) + "\n```\nDone.\n"


@settings(max_examples=100, deadline=None)
@given(st.lists(property_asts, min_size=1, max_size=6, unique_by=lambda a: a.name),
       st.lists(st.sampled_from(["", "// note\n", "\n\n"]), min_size=6, max_size=6))
def test_extracted_sources_are_contiguous_substrings(asts, prefixes):
    blocks = [p + render(a) for a, p in zip(asts, prefixes)]
    response = _fence(blocks)
    suite = extract_assertions(response, "d")
    assert isinstance(suite, AssertionSuite)
    assert suite.names == [a.name for a in asts]
    for a, ast in zip(suite, asts):
        assert a.source_text in response
        assert a.ast == ast


def test_prose_only_reply_fails_extraction():
    assert isinstance(extract_assertions("I cannot help with that.", "d"), ExtractionFailure)
