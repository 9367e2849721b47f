"""Turn raw completion text into coding decisions.

Models mostly follow the prompted format (label line, fence, explanation),
but not always, so parsing is a fixed precedence ladder:

1. drop ``---`` fence lines and an optional leading "Code:" header;
2. the first line that, trimmed, case-insensitively equals a legal label
   (or alias) decides the label; the remaining lines are the reason;
3. otherwise the first legal label appearing as a standalone token within
   the first three non-empty lines decides the label, and the cleaned text
   is kept verbatim as the reason;
4. otherwise a recognized abstention phrase ("not applicable", "i don't
   know", "cannot determine", "not enough information") yields Abstain;
5. otherwise the outcome is Unparseable and the reason is the raw text.

Every string maps to exactly one outcome; nothing raises. For mutually
exclusive codebooks the code ids double as labels and the display names
are accepted as aliases, since models echo names as often as ids.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

from .codebook import INDEPENDENT_BINARY, MUTUALLY_EXCLUSIVE, Codebook
from .corpus import RatingKey
from .errors import DuplicateDecision, InvalidInput, ParseError

LABEL = "label"
ABSTAIN = "abstain"
UNPARSEABLE = "unparseable"

ABSTAIN_POLICY_EXCLUDE = "exclude"
ABSTAIN_POLICY_COERCE_NO = "coerce_no"

ABSTENTION_PHRASES = (
    "not applicable",
    "i don't know",
    "cannot determine",
    "not enough information",
)


class ParsedDecision(NamedTuple):
    outcome: str
    label: str | None
    reason: str


@dataclass(frozen=True)
class CodingDecision:
    """One rater's decision for one (document, code).

    ``code_id`` is None for mutually exclusive codebooks, where a single
    decision assigns the document's category.
    """

    document_id: str
    code_id: str | None
    rater_id: str
    outcome: str
    label: str | None
    reason: str
    latency_seconds: float
    raw_text: str


@dataclass(frozen=True)
class RaterColumn:
    """One rater's resolved labels plus the keys excluded by policy."""

    rater_id: str
    labels: dict[RatingKey, str]
    excluded: dict[RatingKey, str]


def aliases_for(codebook: Codebook) -> dict[str, str]:
    """Alternative spellings accepted for labels (display name -> code id)."""
    if codebook.exclusivity != MUTUALLY_EXCLUSIVE:
        return {}
    return {
        code.name: code.id
        for code in codebook.codes
        if code.name.lower() != code.id.lower()
    }


def _clean_lines(raw: str) -> list[str]:
    lines = [line for line in raw.splitlines() if line.strip() != "---"]
    for i, line in enumerate(lines):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.lower().startswith("code:"):
            rest = stripped[len("code:"):].strip()
            if rest:
                lines[i] = rest
            else:
                del lines[i]
        break
    return lines


def _standalone_pattern(label: str) -> re.Pattern[str]:
    # Boundaries tolerate punctuation and quotes but reject word characters
    # and dotted-number continuations, so "1.1" never matches inside "21.1"
    # or "1.12".
    return re.compile(
        r"(?<![A-Za-z0-9_.])" + re.escape(label) + r"(?![A-Za-z0-9_])(?!\.[0-9])",
        re.IGNORECASE,
    )


def _normalize_for_phrases(text: str) -> str:
    text = text.replace("’", "'").replace("‘", "'")
    return re.sub(r"\s+", " ", text).lower()


def parse_decision(
    raw: str,
    legal_labels: Iterable[str],
    aliases: dict[str, str] | None = None,
) -> ParsedDecision:
    """Deterministically map raw completion text to an outcome.

    Total and pure: never raises, every input lands in exactly one of
    Label / Abstain / Unparseable.
    """
    labels = list(legal_labels)
    if not labels:
        raise InvalidInput("legal_labels must be non-empty")
    lookup: dict[str, str] = {label.lower(): label for label in labels}
    for alias, target in (aliases or {}).items():
        lookup.setdefault(alias.lower(), target)

    lines = _clean_lines(raw)
    cleaned_text = "\n".join(lines).strip()

    for i, line in enumerate(lines):
        candidate = line.strip().lower()
        if candidate in lookup:
            remainder = [l for j, l in enumerate(lines) if j != i]
            return ParsedDecision(LABEL, lookup[candidate], "\n".join(remainder).strip())

    nonempty = [line for line in lines if line.strip()][:3]
    for line in nonempty:
        best: tuple[int, str] | None = None
        for spelled, canonical in lookup.items():
            match = _standalone_pattern(spelled).search(line)
            if match and (best is None or match.start() < best[0]):
                best = (match.start(), canonical)
        if best is not None:
            return ParsedDecision(LABEL, best[1], cleaned_text)

    normalized = _normalize_for_phrases(cleaned_text)
    if any(phrase in normalized for phrase in ABSTENTION_PHRASES):
        return ParsedDecision(ABSTAIN, None, cleaned_text)

    return ParsedDecision(UNPARSEABLE, None, raw)


def decisions_to_ratings(
    decisions: Iterable[CodingDecision],
    codebook: Codebook,
    policy: str = ABSTAIN_POLICY_EXCLUDE,
) -> RaterColumn:
    """Resolve one rater's decisions into a ratings column.

    Under ``exclude`` (the default) abstentions and unparseable outputs
    drop the (document, code) from downstream statistics and are counted.
    Under ``coerce_no`` (binary codebooks only) abstentions become "No",
    reproducing a forced choice; unparseable output is still excluded
    because there is no decision to coerce.
    """
    if policy not in (ABSTAIN_POLICY_EXCLUDE, ABSTAIN_POLICY_COERCE_NO):
        raise InvalidInput(f"unknown abstain policy {policy!r}")
    binary = codebook.exclusivity == INDEPENDENT_BINARY
    if policy == ABSTAIN_POLICY_COERCE_NO and not binary:
        raise InvalidInput("coerce_no applies only to independent binary codebooks")

    rater_ids = set()
    labels: dict[RatingKey, str] = {}
    excluded: dict[RatingKey, str] = {}
    seen: set[RatingKey] = set()
    code_ids = set(codebook.code_ids())
    legal = set(codebook.label_set)

    for decision in decisions:
        rater_ids.add(decision.rater_id)
        if len(rater_ids) > 1:
            raise InvalidInput(f"decisions span multiple raters: {sorted(rater_ids)}")
        if binary:
            if decision.code_id not in code_ids:
                raise InvalidInput(f"unknown code id {decision.code_id!r}")
        elif decision.code_id is not None:
            raise InvalidInput("mutually exclusive decisions must not carry a code id")
        key: RatingKey = (decision.document_id, decision.code_id)
        if key in seen:
            raise DuplicateDecision(
                f"duplicate decision for document {decision.document_id!r}, "
                f"code {decision.code_id!r}"
            )
        seen.add(key)
        if decision.outcome == LABEL:
            if decision.label not in legal:
                raise InvalidInput(f"label {decision.label!r} is not legal for this codebook")
            labels[key] = decision.label
        elif decision.outcome == ABSTAIN and policy == ABSTAIN_POLICY_COERCE_NO:
            labels[key] = "No"
        else:
            excluded[key] = decision.outcome

    rater_id = rater_ids.pop() if rater_ids else ""
    return RaterColumn(rater_id=rater_id, labels=labels, excluded=excluded)


def write_decisions(path: str | Path, decisions: Iterable[CodingDecision]) -> None:
    """Persist decisions as JSONL, one object per decision."""
    with open(path, "w", encoding="utf-8") as fh:
        for decision in decisions:
            fh.write(
                json.dumps(
                    {
                        "document_id": decision.document_id,
                        "code_id": decision.code_id,
                        "rater_id": decision.rater_id,
                        "outcome": decision.outcome,
                        "label": decision.label,
                        "reason": decision.reason,
                        "latency_seconds": decision.latency_seconds,
                        "raw_text": decision.raw_text,
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_decisions(path: str | Path) -> list[CodingDecision]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read decisions: {exc}", path=str(path)) from exc
    decisions = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            decisions.append(
                CodingDecision(
                    document_id=str(raw["document_id"]),
                    code_id=raw["code_id"],
                    rater_id=str(raw["rater_id"]),
                    outcome=str(raw["outcome"]),
                    label=raw["label"],
                    reason=str(raw["reason"]),
                    latency_seconds=float(raw["latency_seconds"]),
                    raw_text=str(raw["raw_text"]),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad decision record: {exc!r}", path=str(path), line=lineno) from exc
    return decisions
