"""Codebook data model and its JSON file format.

A codebook is the list of code definitions a coder (human or model) works
from. Two exclusivity modes exist:

* ``mutually_exclusive``: every document gets exactly one code; the legal
  labels are the code ids themselves.
* ``independent_binary``: every code is a separate Yes/No question; the
  legal labels for each code are exactly "Yes" and "No".

File format (JSON, exact keys)::

    {"id": ..., "version": ..., "exclusivity": ..., "role_context": ...,
     "document_noun": ..., "codes": [{"id", "name", "description_original",
     "description_revised", "examples": [{"text", "label"}]}]}

Both the original and the revised description are stored; prompts always
use the revised text. The ``role_context`` completes the prompt's role
sentence, and ``document_noun`` selects the noun ("Tweet" or "Text") used
throughout the prompt.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ValidationError

MUTUALLY_EXCLUSIVE = "mutually_exclusive"
INDEPENDENT_BINARY = "independent_binary"

BINARY_LABELS = ("Yes", "No")

_EXCLUSIVITIES = (MUTUALLY_EXCLUSIVE, INDEPENDENT_BINARY)
_DOCUMENT_NOUNS = ("Tweet", "Text")


@dataclass(frozen=True)
class CodeExample:
    """A coded example carried inside a code definition."""

    text: str
    label: str


@dataclass(frozen=True)
class CodeDefinition:
    """One measurement category."""

    id: str
    name: str
    description_original: str
    description_revised: str
    examples: tuple[CodeExample, ...] = ()


@dataclass(frozen=True)
class Violation:
    """A broken codebook invariant; data, not an exception."""

    code_id: str
    rule: str
    message: str


@dataclass(frozen=True)
class Codebook:
    """An ordered set of code definitions plus prompt configuration."""

    id: str
    version: str
    exclusivity: str
    role_context: str
    document_noun: str
    codes: tuple[CodeDefinition, ...] = field(default=())

    @property
    def label_set(self) -> tuple[str, ...]:
        """Legal labels: code ids when mutually exclusive, else Yes/No."""
        if self.exclusivity == MUTUALLY_EXCLUSIVE:
            return tuple(code.id for code in self.codes)
        return BINARY_LABELS

    def code_ids(self) -> tuple[str, ...]:
        return tuple(code.id for code in self.codes)

    def get_code(self, code_id: str) -> CodeDefinition:
        for code in self.codes:
            if code.id == code_id:
                return code
        raise KeyError(code_id)


def validate(codebook: Codebook) -> list[Violation]:
    """Return every invariant violation; empty means the codebook is valid."""
    violations: list[Violation] = []

    if codebook.exclusivity not in _EXCLUSIVITIES:
        violations.append(
            Violation("", "exclusivity", f"unknown exclusivity {codebook.exclusivity!r}")
        )
        return violations
    if codebook.document_noun not in _DOCUMENT_NOUNS:
        violations.append(
            Violation(
                "",
                "document_noun",
                f"document_noun must be one of {_DOCUMENT_NOUNS}, got {codebook.document_noun!r}",
            )
        )

    if not codebook.codes:
        violations.append(Violation("", "empty_codebook", "codebook has no codes"))
        return violations
    if codebook.exclusivity == MUTUALLY_EXCLUSIVE and len(codebook.codes) < 2:
        violations.append(
            Violation("", "too_few_codes", "mutually exclusive codebooks need at least 2 codes")
        )

    seen: set[str] = set()
    for code in codebook.codes:
        if not code.id:
            violations.append(Violation(code.id, "empty_id", "code id is empty"))
        elif any(ch.isspace() for ch in code.id):
            violations.append(
                Violation(code.id, "whitespace_id", f"code id {code.id!r} contains whitespace")
            )
        if code.id in seen:
            violations.append(
                Violation(code.id, "duplicate_id", f"duplicate code id {code.id!r}")
            )
        seen.add(code.id)
        if not code.description_revised.strip():
            violations.append(
                Violation(code.id, "empty_description", f"code {code.id!r} has an empty revised description")
            )

    legal = set(codebook.label_set)
    for code in codebook.codes:
        for example in code.examples:
            if _canonical_label(example.label, codebook.label_set) is None:
                violations.append(
                    Violation(
                        code.id,
                        "illegal_label_set",
                        f"example label {example.label!r} on code {code.id!r} "
                        f"is outside the legal labels {sorted(legal)}",
                    )
                )
    return violations


def _canonical_label(value: str, labels: tuple[str, ...]) -> str | None:
    """Case-insensitive match of ``value`` against ``labels``; None if no match."""
    lowered = value.strip().lower()
    for label in labels:
        if label.lower() == lowered:
            return label
    return None


def canonical_label(value: str, labels: tuple[str, ...]) -> str | None:
    """Public wrapper used by rating loaders and the decision parser."""
    return _canonical_label(value, labels)


def codebook_from_dict(raw: dict) -> Codebook:
    """Build a Codebook from parsed JSON, without validating invariants."""
    try:
        codes = tuple(
            CodeDefinition(
                id=str(c["id"]),
                name=str(c["name"]),
                description_original=str(c["description_original"]),
                description_revised=str(c["description_revised"]),
                examples=tuple(
                    CodeExample(text=str(e["text"]), label=str(e["label"]))
                    for e in c.get("examples", [])
                ),
            )
            for c in raw["codes"]
        )
        return Codebook(
            id=str(raw["id"]),
            version=str(raw["version"]),
            exclusivity=str(raw["exclusivity"]),
            role_context=str(raw["role_context"]),
            document_noun=str(raw["document_noun"]),
            codes=codes,
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"codebook is missing required structure: {exc!r}") from exc


def codebook_to_dict(codebook: Codebook) -> dict:
    """Inverse of :func:`codebook_from_dict`; round-trips exactly."""
    return {
        "id": codebook.id,
        "version": codebook.version,
        "exclusivity": codebook.exclusivity,
        "role_context": codebook.role_context,
        "document_noun": codebook.document_noun,
        "codes": [
            {
                "id": code.id,
                "name": code.name,
                "description_original": code.description_original,
                "description_revised": code.description_revised,
                "examples": [{"text": e.text, "label": e.label} for e in code.examples],
            }
            for code in codebook.codes
        ],
    }


def load_codebook(path: str | Path) -> Codebook:
    """Load and validate a codebook file.

    Raises ParseError on malformed JSON and ValidationError (naming the
    offending code ids) when invariants are broken.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read codebook: {exc}", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"codebook is not valid JSON: {exc}", path=str(path)) from exc
    if not isinstance(raw, dict):
        raise ParseError("codebook file must contain a JSON object", path=str(path))

    codebook = codebook_from_dict(raw)
    violations = validate(codebook)
    if violations:
        detail = "; ".join(f"[{v.rule}] {v.message}" for v in violations)
        raise ValidationError(f"invalid codebook {path}: {detail}")
    return codebook


def save_codebook(codebook: Codebook, path: str | Path) -> None:
    """Write the codebook in the documented JSON format."""
    Path(path).write_text(
        json.dumps(codebook_to_dict(codebook), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
