from __future__ import annotations

import pytest

from laca.codebook import Codebook, CodeDefinition, CodeExample
from laca.corpus import Document
from laca.prompt import build_prompts, render_golden

from conftest import CODEBOOK_NAMES, GOLDENS


@pytest.mark.parametrize("name", CODEBOOK_NAMES)
def test_rendered_template_matches_golden_bytes(codebooks, name):
    golden = (GOLDENS / f"{name}.prompt.txt").read_bytes()
    assert render_golden(codebooks[name]).encode("utf-8") == golden


def test_rendering_is_pure(trump):
    assert render_golden(trump) == render_golden(trump)
    doc = Document(id="d", text="Some tweet.")
    first = [p.text for p in build_prompts(trump, doc)]
    second = [p.text for p in build_prompts(trump, doc)]
    assert first == second


def test_binary_codebook_yields_one_prompt_per_code(trump):
    doc = Document(id="t1", text="MAKE AMERICA GREAT AGAIN!")
    prompts = build_prompts(trump, doc)
    assert len(prompts) == 13
    assert [p.code_id for p in prompts] == list(trump.code_ids())
    for p in prompts:
        assert p.text.startswith(
            "You are a qualitative coder who is annotating tweets from "
            "Donald Trump's Twitter feed."
        )
        assert "Code:\n---\nYes or No\n---" in p.text
        assert p.document_id == "t1"
        assert doc.text in p.text


def test_exclusive_codebook_yields_single_prompt(bbc):
    doc = Document(id="a1", text="The match ended in a draw.")
    prompts = build_prompts(bbc, doc)
    assert len(prompts) == 1
    assert prompts[0].code_id is None
    assert "business, entertainment, politics, sport, or tech" in prompts[0].text
    for code in bbc.codes:
        assert code.description_revised in prompts[0].text


def test_contrarian_label_line_ends_with_none_of_the_above(contrarian):
    text = render_golden(contrarian)
    assert ", or 0.0\n" in text


def test_no_placeholders_survive_rendering(trump, bbc):
    for book in (trump, bbc):
        for p in build_prompts(book, Document(id="d", text="hello world")):
            assert "{code}" not in p.text
            assert "{text}" not in p.text


def test_per_code_prompts_differ_only_in_the_code_block(ukraine):
    doc = Document(id="d", text="The river basin report.")
    prompts = build_prompts(ukraine, doc)
    stripped = [
        p.text.replace(ukraine.get_code(p.code_id).description_revised, "@BLOCK@")
        for p in prompts
    ]
    assert len(set(stripped)) == 1
    assert stripped[0].count("@BLOCK@") == 1


def test_document_text_containing_braces_is_left_alone(trump):
    doc = Document(id="d", text="literal {code} and {text} inside")
    prompts = build_prompts(trump, doc)
    assert "literal {code} and {text} inside" in prompts[0].text


def test_codebook_examples_are_rendered():
    book = Codebook(
        id="x", version="1", exclusivity="independent_binary",
        role_context="notes", document_noun="Text",
        codes=(
            CodeDefinition(
                id="A", name="A", description_original="o", description_revised="Is it A?",
                examples=(CodeExample(text="very a", label="Yes"),),
            ),
        ),
    )
    prompts = build_prompts(book, Document(id="d", text="body"))
    assert 'Ex. "very a" should be coded "Yes".' in prompts[0].text


def test_two_category_exclusive_label_line_reads_naturally():
    book = Codebook(
        id="x", version="1", exclusivity="mutually_exclusive",
        role_context="notes", document_noun="Text",
        codes=(
            CodeDefinition(id="hot", name="hot", description_original="h", description_revised="Hot?"),
            CodeDefinition(id="cold", name="cold", description_original="c", description_revised="Cold?"),
        ),
    )
    assert "Code:\n---\nhot or cold\n---" in render_golden(book)
