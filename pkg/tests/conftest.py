from __future__ import annotations

import json
from pathlib import Path

import pytest

from laca.codebook import Codebook, load_codebook
from laca.corpus import Corpus, load_corpus

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDENS = ROOT / "goldens"
TEST_FIXTURES = Path(__file__).resolve().parent / "fixtures"

CODEBOOK_NAMES = ("trump_tweets", "bbc_news", "ukraine_water", "contrarian_claims")


@pytest.fixture(scope="session")
def codebooks() -> dict[str, Codebook]:
    return {name: load_codebook(FIXTURES / "codebooks" / f"{name}.json") for name in CODEBOOK_NAMES}


@pytest.fixture(scope="session")
def trump(codebooks) -> Codebook:
    return codebooks["trump_tweets"]


@pytest.fixture(scope="session")
def bbc(codebooks) -> Codebook:
    return codebooks["bbc_news"]


@pytest.fixture(scope="session")
def ukraine(codebooks) -> Codebook:
    return codebooks["ukraine_water"]


@pytest.fixture(scope="session")
def contrarian(codebooks) -> Codebook:
    return codebooks["contrarian_claims"]


@pytest.fixture(scope="session")
def dev100_corpus() -> Corpus:
    return load_corpus(FIXTURES / "dev100" / "corpus.jsonl")


def write_corpus(path: Path, docs: list[dict]) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")
    return path


def make_corpus(tmp_path: Path, n: int, prefix: str = "d") -> Corpus:
    path = write_corpus(
        tmp_path / "corpus.jsonl",
        [{"id": f"{prefix}{i:03d}", "text": f"document {i} body", "meta": {}} for i in range(n)],
    )
    return load_corpus(path)
