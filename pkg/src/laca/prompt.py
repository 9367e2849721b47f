"""Prompt rendering for deductive coding.

Two strategies, chosen by the codebook's exclusivity:

* mutually exclusive: one prompt per document; the codebook block lists
  every code as ``id: revised description`` and the output line enumerates
  all code ids ("a, b, ..., or z").
* independent binary: one prompt per (document, code), in codebook order;
  the codebook block is the single code's revised description and the
  output line is "Yes or No".

The instruction header opens with a role sentence completed by the
codebook's ``role_context``, walks through the coding steps, and then
demonstrates the expected wire format with a skeleton block using
"codebook here" / "tweet here" stand-ins before the real slots. Templates
use "\\n" line endings, fences of ``---`` on their own lines, and a single
blank line between blocks. :func:`render_golden` leaves the literal
``{code}`` and ``{text}`` slots in place; :func:`build_prompts` fills them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .codebook import MUTUALLY_EXCLUSIVE, Codebook, CodeDefinition
from .corpus import Document


@dataclass(frozen=True)
class PromptText:
    """A fully rendered prompt; code_id is set only for per-code prompts."""

    text: str
    codebook_id: str
    document_id: str
    code_id: str | None = None


def _label_line(codebook: Codebook) -> str:
    labels = codebook.label_set
    if len(labels) == 2:
        return f"{labels[0]} or {labels[1]}"
    return ", ".join(labels[:-1]) + f", or {labels[-1]}"


def _code_block(code: CodeDefinition) -> str:
    lines = [code.description_revised]
    for example in code.examples:
        lines.append(f'Ex. "{example.text}" should be coded "{example.label}".')
    return "\n".join(lines)


def _codebook_block(codebook: Codebook) -> str:
    return "\n".join(f"{code.id}: {_code_block(code)}" for code in codebook.codes)


def render_golden(codebook: Codebook) -> str:
    """Render the instruction template with literal {code} and {text} slots."""
    noun = codebook.document_noun
    noun_lower = noun.lower()
    blocks = [
        f"You are a qualitative coder who is annotating {codebook.role_context}.",
        f"To code this {noun_lower}, do the following:\n"
        f"- First, read the codebook and the {noun_lower}.\n"
        "- Next, decide which code is most applicable and explain your reasoning for the coding decision.\n"
        "- Finally, print the most applicable code and your reason for the coding decision.",
        "Use the following format:",
        "Codebook:\n---\ncodebook here\n---",
        f"{noun}:\n---\n{noun_lower} here\n---",
        f"Code:\n---\n{_label_line(codebook)}\n---",
        "Codebook:\n---\n{code}\n---",
        f"{noun}:\n---\n{{text}}\n---",
        "Code:",
    ]
    return "\n\n".join(blocks) + "\n"


def _fill(template: str, code_block: str, text: str) -> str:
    # Single pass over the template so substituted content is never
    # rescanned for placeholders.
    out: list[str] = []
    i = 0
    while i < len(template):
        if template.startswith("{code}", i):
            out.append(code_block)
            i += len("{code}")
        elif template.startswith("{text}", i):
            out.append(text)
            i += len("{text}")
        else:
            out.append(template[i])
            i += 1
    return "".join(out)


def build_prompts(codebook: Codebook, document: Document) -> list[PromptText]:
    """Render every prompt needed to code one document, in codebook order."""
    template = render_golden(codebook)
    if codebook.exclusivity == MUTUALLY_EXCLUSIVE:
        text = _fill(template, _codebook_block(codebook), document.text)
        return [PromptText(text=text, codebook_id=codebook.id, document_id=document.id)]
    return [
        PromptText(
            text=_fill(template, _code_block(code), document.text),
            codebook_id=codebook.id,
            document_id=document.id,
            code_id=code.id,
        )
        for code in codebook.codes
    ]
