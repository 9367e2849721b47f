from __future__ import annotations

import json

import pytest

from laca.codebook import (
    Codebook,
    CodeDefinition,
    CodeExample,
    codebook_from_dict,
    codebook_to_dict,
    load_codebook,
    save_codebook,
    validate,
)
from laca.errors import ParseError, ValidationError

from conftest import CODEBOOK_NAMES, FIXTURES


def _binary_book(codes) -> Codebook:
    return Codebook(
        id="t", version="1", exclusivity="independent_binary",
        role_context="things", document_noun="Text", codes=tuple(codes),
    )


def _code(code_id: str, **kwargs) -> CodeDefinition:
    defaults = dict(
        name=code_id, description_original="orig?", description_revised="revised?"
    )
    defaults.update(kwargs)
    return CodeDefinition(id=code_id, **defaults)


def test_trump_fixture_loads_with_13_binary_codes(trump):
    assert trump.exclusivity == "independent_binary"
    assert len(trump.codes) == 13
    assert trump.label_set == ("Yes", "No")
    assert trump.code_ids()[0] == "HSTG"


def test_contrarian_fixture_loads_with_28_exclusive_codes(contrarian):
    assert contrarian.exclusivity == "mutually_exclusive"
    assert len(contrarian.codes) == 28
    assert contrarian.label_set[0] == "1.1"
    assert contrarian.label_set[-1] == "0.0"


def test_bbc_fixture_has_expected_label_set(bbc):
    assert bbc.label_set == ("business", "entertainment", "politics", "sport", "tech")


@pytest.mark.parametrize("name", CODEBOOK_NAMES)
def test_every_shipped_fixture_is_valid(codebooks, name):
    assert validate(codebooks[name]) == []


@pytest.mark.parametrize("name", CODEBOOK_NAMES)
def test_round_trip_is_identity(tmp_path, codebooks, name):
    book = codebooks[name]
    out = tmp_path / "book.json"
    save_codebook(book, out)
    assert load_codebook(out) == book


def test_zero_codes_is_a_validation_error(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text(json.dumps({
        "id": "x", "version": "1", "exclusivity": "independent_binary",
        "role_context": "r", "document_noun": "Text", "codes": [],
    }))
    with pytest.raises(ValidationError):
        load_codebook(path)


def test_malformed_json_is_a_parse_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_codebook(path)


def test_missing_keys_is_a_parse_error(tmp_path):
    path = tmp_path / "short.json"
    path.write_text(json.dumps({"id": "x"}))
    with pytest.raises(ParseError):
        load_codebook(path)


def test_duplicate_ids_are_reported_with_the_offending_id():
    book = _binary_book([_code("CRIT"), _code("CRIT")])
    violations = validate(book)
    assert any(v.rule == "duplicate_id" and v.code_id == "CRIT" for v in violations)


def test_load_error_names_the_offending_code(tmp_path):
    book = _binary_book([_code("CRIT"), _code("CRIT")])
    path = tmp_path / "dup.json"
    path.write_text(json.dumps(codebook_to_dict(book)))
    with pytest.raises(ValidationError, match="CRIT"):
        load_codebook(path)


def test_illegal_example_label_on_binary_code_is_flagged():
    code = _code("B1", examples=(CodeExample(text="t", label="Maybe"),))
    violations = validate(_binary_book([code]))
    assert any(v.rule == "illegal_label_set" and v.code_id == "B1" for v in violations)


def test_binary_example_labels_yes_no_are_fine():
    code = _code("B1", examples=(CodeExample("t", "Yes"), CodeExample("u", "no")))
    assert validate(_binary_book([code])) == []


def test_whitespace_in_id_is_flagged():
    violations = validate(_binary_book([_code("A B")]))
    assert any(v.rule == "whitespace_id" for v in violations)


def test_empty_revised_description_is_flagged():
    violations = validate(_binary_book([_code("A", description_revised="  ")]))
    assert any(v.rule == "empty_description" and v.code_id == "A" for v in violations)


def test_mutually_exclusive_needs_two_codes():
    book = Codebook(
        id="m", version="1", exclusivity="mutually_exclusive",
        role_context="r", document_noun="Text", codes=(_code("only"),),
    )
    assert any(v.rule == "too_few_codes" for v in validate(book))


def test_unknown_exclusivity_is_flagged():
    book = Codebook(
        id="m", version="1", exclusivity="sometimes",
        role_context="r", document_noun="Text", codes=(_code("a"),),
    )
    assert any(v.rule == "exclusivity" for v in validate(book))


def test_unknown_document_noun_is_flagged():
    book = Codebook(
        id="m", version="1", exclusivity="independent_binary",
        role_context="r", document_noun="Poem", codes=(_code("a"),),
    )
    assert any(v.rule == "document_noun" for v in validate(book))


def test_schema_keys_match_the_documented_format():
    raw = json.loads((FIXTURES / "codebooks" / "trump_tweets.json").read_text())
    assert set(raw) == {"id", "version", "exclusivity", "role_context", "document_noun", "codes"}
    assert set(raw["codes"][0]) == {
        "id", "name", "description_original", "description_revised", "examples"
    }
    assert codebook_to_dict(codebook_from_dict(raw)) == raw
