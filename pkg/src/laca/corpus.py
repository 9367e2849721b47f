"""Document corpora, reproducible samples, and human rating files.

Corpora are JSONL (one ``{"id", "text", "meta"}`` object per line). Human
ratings are CSV with header ``document_id,code_id,label``; for mutually
exclusive codebooks the ``code_id`` column is left empty because the label
applies to the whole document.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .codebook import (
    INDEPENDENT_BINARY,
    Codebook,
    canonical_label,
)
from .errors import (
    DuplicateId,
    IllegalLabel,
    InvalidInput,
    MissingColumn,
    ParseError,
    SampleTooLarge,
    ValidationError,
)
from .rng import GENERATOR_NAME, sample_without_replacement

# key: (document_id, code_id); code_id is None for mutually exclusive labels
RatingKey = tuple[str, str | None]


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    meta: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Corpus:
    """Immutable document collection; id is the sha256 of the source file."""

    corpus_id: str
    source: str
    documents: tuple[Document, ...]

    def __len__(self) -> int:
        return len(self.documents)

    def __getitem__(self, document_id: str) -> Document:
        try:
            return self._by_id()[document_id]
        except KeyError:
            raise KeyError(f"no document {document_id!r} in corpus") from None

    def __contains__(self, document_id: str) -> bool:
        return document_id in self._by_id()

    def _by_id(self) -> dict[str, Document]:
        cache = getattr(self, "_index", None)
        if cache is None:
            cache = {doc.id: doc for doc in self.documents}
            object.__setattr__(self, "_index", cache)
        return cache


@dataclass(frozen=True)
class Sample:
    """Ordered draw of document ids; order is the draw order."""

    corpus_id: str
    seed: int
    document_ids: tuple[str, ...]
    generator: str = GENERATOR_NAME


@dataclass(frozen=True)
class HumanRatings:
    """One human coder's labels, keyed by (document_id, code_id)."""

    rater_id: str
    labels: dict[RatingKey, str]


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSONL corpus, enforcing unique ids and non-empty text."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read corpus: {exc}", path=str(path)) from exc

    documents: list[Document] = []
    seen: set[str] = set()
    for lineno, line in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", path=str(path), line=lineno) from exc
        if not isinstance(raw, dict) or "id" not in raw or "text" not in raw:
            raise ParseError(
                'each line must be an object with "id" and "text"', path=str(path), line=lineno
            )
        doc_id = str(raw["id"])
        text = str(raw["text"])
        if doc_id in seen:
            raise DuplicateId(doc_id, line=lineno)
        if not text.strip():
            raise ValidationError(f"document {doc_id!r} has empty text (line {lineno})")
        seen.add(doc_id)
        meta_raw = raw.get("meta", {})
        meta = {str(k): str(v) for k, v in meta_raw.items()} if isinstance(meta_raw, dict) else {}
        documents.append(Document(id=doc_id, text=text, meta=meta))

    return Corpus(
        corpus_id=hashlib.sha256(data).hexdigest(),
        source=str(path),
        documents=tuple(documents),
    )


def draw_sample(corpus: Corpus, n: int, seed: int) -> Sample:
    """Uniform sample without replacement, deterministic in (corpus, n, seed)."""
    if n < 1:
        raise InvalidInput(f"sample size must be at least 1, got {n}")
    if n > len(corpus):
        raise SampleTooLarge(f"requested {n} documents from a corpus of {len(corpus)}")
    ids = [doc.id for doc in corpus.documents]
    drawn = sample_without_replacement(ids, n, seed)
    return Sample(corpus_id=corpus.corpus_id, seed=seed, document_ids=tuple(drawn))


def save_sample(sample: Sample, path: str | Path) -> None:
    payload = {
        "corpus_id": sample.corpus_id,
        "seed": sample.seed,
        "generator": sample.generator,
        "document_ids": list(sample.document_ids),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_sample(path: str | Path) -> Sample:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        return Sample(
            corpus_id=str(raw["corpus_id"]),
            seed=int(raw["seed"]),
            document_ids=tuple(str(d) for d in raw["document_ids"]),
            generator=str(raw.get("generator", GENERATOR_NAME)),
        )
    except OSError as exc:
        raise ParseError(f"cannot read sample: {exc}", path=str(path)) from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad sample file: {exc!r}", path=str(path)) from exc


def load_human_ratings(
    path: str | Path, codebook: Codebook, rater_id: str | None = None
) -> HumanRatings:
    """Load a rater's CSV, validating every label against the codebook.

    Labels are matched case-insensitively and stored in canonical form.
    Missing documents are permitted; agreement computations later drop
    documents a rater did not cover.
    """
    path = Path(path)
    if rater_id is None:
        rater_id = f"human:{path.stem}"
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read ratings: {exc}", path=str(path)) from exc

    reader = csv.DictReader(text.splitlines())
    header = reader.fieldnames or []
    for column in ("document_id", "code_id", "label"):
        if column not in header:
            raise MissingColumn(f"ratings CSV lacks column {column!r}", path=str(path))

    code_ids = set(codebook.code_ids())
    binary = codebook.exclusivity == INDEPENDENT_BINARY
    labels: dict[RatingKey, str] = {}
    for lineno, row in enumerate(reader, start=2):
        document_id = (row["document_id"] or "").strip()
        code_raw = (row["code_id"] or "").strip()
        value = (row["label"] or "").strip()
        if not document_id:
            raise ParseError("empty document_id", path=str(path), line=lineno)
        code_id: str | None
        if binary:
            if code_raw not in code_ids:
                raise IllegalLabel(document_id, code_raw, value)
            code_id = code_raw
        else:
            if code_raw:
                raise ParseError(
                    "code_id must be empty for mutually exclusive codebooks",
                    path=str(path),
                    line=lineno,
                )
            code_id = None
        canonical = canonical_label(value, codebook.label_set)
        if canonical is None:
            raise IllegalLabel(document_id, code_id, value)
        key = (document_id, code_id)
        if key in labels:
            raise DuplicateId(f"{document_id}/{code_id}", line=lineno)
        labels[key] = canonical

    return HumanRatings(rater_id=rater_id, labels=labels)
