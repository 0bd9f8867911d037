import json
import logging

import pytest
from hypothesis import given, settings, strategies as st

from svagen.spec_format import (LABELS, Definition, EmptyDocument, FormattedSpec,
                                MissingFunctionalRequirements, Parameter, SchemaError, SpecDocument,
                                SpecParseError, deserialize_spec, extract, serialize_spec,
                                split_entries, to_formatted)

from conftest import FIXTURES

RV_LABELS = json.loads((FIXTURES / "rv_timer" / "rv_timer.replay.run.json").read_text())["label_map"]


def doc(body, name="d"):
    return SpecDocument("mem.md", body, name)


def test_three_headings_in_order():
    ex = extract(doc("# Introduction\nhi\n# Theory of Operation\nhow\n## Registers\nregs\n"))
    assert ex.headings() == ["introduction", "theory_of_operation", "registers"]
    assert [s.content for s in ex.sections] == ["hi\n", "how\n", "regs\n"]


def test_no_headings_is_one_preamble_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        ex = extract(doc("just some text\nmore text\n"))
    assert ex.headings() == ["preamble"]
    assert ex.sections[0].content == "just some text\nmore text\n"
    assert "no heading" in caplog.text


def test_underlined_titles_and_preamble():
    ex = extract(doc("lead in\n\nOverview\n========\nbody\nDetails\n-------\nmore\n"))
    assert ex.headings() == ["preamble", "overview", "details"]


def test_blank_document_rejected():
    with pytest.raises(EmptyDocument):
        extract(doc("  \n\n"))


def test_invalid_design_name_rejected():
    with pytest.raises(ValueError):
        doc("x", name="9lives")


def test_rv_timer_headings():
    ex = extract(SpecDocument.from_file(FIXTURES / "rv_timer" / "spec.md"))
    # counted by hand from the fixture's '#' lines
    assert ex.headings() == ["introduction", "theory_of_operation", "definitions", "parameters",
                             "functional_requirements", "timing_requirements", "revision_history"]


def rv_timer_spec():
    return to_formatted(extract(SpecDocument.from_file(FIXTURES / "rv_timer" / "spec.md")), RV_LABELS)


def test_rv_timer_formatted_fields():
    spec = rv_timer_spec()
    assert len(spec.functional_requirements) == 10
    assert spec.functional_requirements[0] == "tick_count shall be cleared to zero while rst_ni is low."
    assert len(spec.timing_requirements) == 2
    assert spec.definitions and spec.parameters
    assert spec.extra_info.startswith("revision_history:")


def test_rv_timer_serialized_key_order():
    keys = list(json.loads(serialize_spec(rv_timer_spec())))
    assert keys[:6] == ["introduction", "system_overview", "definitions", "parameters",
                        "functional_requirements", "timing_requirements"]


def test_every_label_populated():
    body = ("# Intro\nAbout.\n# Overview\nBlocks.\n# Terms\n- clk: the clock\n"
            "# Params\n- WIDTH (8): data width\n# Functions\n- Do a.\n- Do b.\n"
            "# Timing\nOne cycle. Two cycles.\n# Notes\nextra\n")
    spec = to_formatted(extract(doc(body)), {
        "introduction": ["Intro"], "system_overview": ["Overview"], "definitions": ["Terms"],
        "parameters": ["Params"], "functional_requirements": ["Functions"],
        "timing_requirements": ["Timing"], "extra_info": ["Notes"]})
    assert spec.introduction == "About." and spec.system_overview == "Blocks."
    assert spec.definitions == (Definition("clk", "the clock"),)
    assert spec.parameters == (Parameter("WIDTH", "data width", "8"),)
    assert spec.functional_requirements == ("Do a.", "Do b.")
    assert spec.timing_requirements == ("One cycle.", "Two cycles.")
    assert spec.extra_info == "extra"


def test_unmapped_section_lands_in_extra_info():
    body = "# Requirements\n- Do a.\n# Revision History\nv1 first cut\n"
    spec = to_formatted(extract(doc(body)), {"functional_requirements": ["Requirements"]})
    assert spec.extra_info == "revision_history: v1 first cut"


def test_missing_functional_requirements():
    with pytest.raises(MissingFunctionalRequirements):
        to_formatted(extract(doc("# Intro\nhello\n")), {"introduction": ["Intro"]})


def test_unknown_label_in_map():
    with pytest.raises(SchemaError):
        to_formatted(extract(doc("# A\nx\n")), {"notes": ["A"]})


def test_extra_info_absent_is_omitted():
    text = serialize_spec(FormattedSpec(("Do a.",)))
    assert "extra_info" not in json.loads(text)


def test_unknown_key_rejected():
    with pytest.raises(SchemaError) as exc:
        deserialize_spec('{"functional_requirements": ["a"], "notes": "x"}')
    assert exc.value.key == "notes"


@pytest.mark.parametrize("text", [
    '{"functional_requirements": []}',
    '{"introduction": "x"}',
    '{"functional_requirements": ["  "]}',
    '{"functional_requirements": ["a"], "definitions": [{"term": "t"}]}',
    '{"functional_requirements": ["a"], "parameters": [{"name": "n", "description": "d", "size": 1}]}',
])
def test_schema_violations(text):
    with pytest.raises(SchemaError):
        deserialize_spec(text)


def test_parse_error_has_position():
    with pytest.raises(SpecParseError) as exc:
        deserialize_spec('{\n  "functional_requirements": [\n')
    assert exc.value.line >= 2


def test_split_entries_bullets_and_sentences():
    assert split_entries("- first\n  continued\n- second\n\nThird. Fourth one.") == [
        "first continued", "second", "Third.", "Fourth one."]


texts = st.text(st.characters(blacklist_categories=("Cs",)), max_size=30)
entries = texts.map(str.strip).filter(bool)


@st.composite
def formatted_specs(draw):
    return FormattedSpec(
        functional_requirements=tuple(draw(st.lists(entries, min_size=1, max_size=4))),
        introduction=draw(texts),
        system_overview=draw(texts),
        definitions=tuple(Definition(draw(texts), draw(texts)) for _ in range(draw(st.integers(0, 3)))),
        parameters=tuple(Parameter(draw(texts), draw(texts), draw(st.none() | texts))
                         for _ in range(draw(st.integers(0, 3)))),
        timing_requirements=tuple(draw(st.lists(entries, max_size=3))),
        extra_info=draw(st.none() | texts),
    )


@settings(max_examples=200)
@given(formatted_specs())
def test_round_trip(spec):
    assert deserialize_spec(serialize_spec(spec)) == spec


@settings(max_examples=200)
@given(formatted_specs())
def test_emitted_keys_are_labels(spec):
    keys = list(json.loads(serialize_spec(spec)))
    assert "functional_requirements" in keys
    assert keys == [k for k in LABELS if k in keys]


lines = st.one_of(
    st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\r\n\x0b\x0c\x1c\x1d\x1e\x85  "),
            max_size=20),
    st.builds(lambda h, t: "#" * h + " " + t, st.integers(1, 3), st.sampled_from(["Intro", "Regs", "a b", ""])),
    st.sampled_from(["====", "----", "", "   "]),
)


@settings(max_examples=300)
@given(st.lists(lines, min_size=1, max_size=15), st.booleans())
def test_extract_accounts_for_every_character(body_lines, trailing_newline):
    body = "\n".join(body_lines) + ("\n" if trailing_newline else "")
    if not body.strip():
        return
    ex = extract(doc(body))
    assert "".join(s.marker + s.content for s in ex.sections) == body
    normalized = ex.headings()
    assert len(normalized) == len(set(normalized))
