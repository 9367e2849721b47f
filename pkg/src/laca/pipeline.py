"""Batch phases over a corpus sample: development, calibration, final coding.

* development: code an uncoded sample, keep every decision and reason,
  and test each code's label frequencies against random guessing.
* calibration: code the same sample that one or more humans coded and
  compute chance-corrected agreement for every rater pair, with a listing
  of the documents where raters disagree.
* final: code a sample (or the whole corpus) and report per-code
  prevalence with Wilson confidence intervals plus coding-time summaries.

Requests fan out to the provider up to the configured concurrency limit,
but results are always aggregated in (document order, code order), so a
replayed run is byte-identical at any concurrency. Rendered reports embed
their manifest minus the timestamp and concurrency limit (both live only
in manifest.json), keeping the report bytes reproducible.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .codebook import BINARY_LABELS, INDEPENDENT_BINARY, Codebook
from .corpus import Corpus, HumanRatings, Sample
from .decode import (
    ABSTAIN,
    ABSTAIN_POLICY_EXCLUDE,
    LABEL,
    UNPARSEABLE,
    CodingDecision,
    aliases_for,
    decisions_to_ratings,
    parse_decision,
    write_decisions,
)
from .errors import DegenerateTable, MissingHumanRatings, NoDecisions, ProviderError
from .provider import Provider, user_request
from .prompt import build_prompts
from .stats import (
    CHI_SQUARED_UNIFORM,
    AgreementResult,
    RatingsTable,
    TestResult,
    coding_time_summary,
    gwet_ac1,
    proportion_ci,
    randomness_test,
)

ALL_CODES = "All"


@dataclass(frozen=True)
class RunConfig:
    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    max_tokens: int | None = None
    concurrency: int = 4
    alpha: float = 0.05
    ci_level: float = 0.95
    abstain_policy: str = ABSTAIN_POLICY_EXCLUDE
    provider_mode: str = "replay"
    cassette_hash: str | None = None
    rater_id: str | None = None

    def llm_rater_id(self) -> str:
        return self.rater_id if self.rater_id is not None else f"llm:{self.model}"


@dataclass(frozen=True)
class RunManifest:
    phase: str
    codebook_id: str
    codebook_version: str
    corpus_path: str
    corpus_hash: str
    sample_n: int | None
    sample_seed: int | None
    sample_generator: str | None
    provider_mode: str
    model: str
    temperature: float
    concurrency: int
    abstain_policy: str
    alpha: float
    cassette_hash: str | None
    timestamp: str

    def stable_dict(self) -> dict:
        """The manifest fields embedded in rendered reports.

        Excludes the timestamp and the concurrency limit: neither affects
        any result, and replayed reports must be byte-identical across
        reruns and concurrency settings. Both stay in manifest.json.
        """
        out = self.to_dict()
        del out["timestamp"]
        del out["concurrency"]
        return out

    def to_dict(self) -> dict:
        return {
            "phase": self.phase,
            "codebook_id": self.codebook_id,
            "codebook_version": self.codebook_version,
            "corpus_path": self.corpus_path,
            "corpus_hash": self.corpus_hash,
            "sample_n": self.sample_n,
            "sample_seed": self.sample_seed,
            "sample_generator": self.sample_generator,
            "provider_mode": self.provider_mode,
            "model": self.model,
            "temperature": self.temperature,
            "concurrency": self.concurrency,
            "abstain_policy": self.abstain_policy,
            "alpha": self.alpha,
            "cassette_hash": self.cassette_hash,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class DocumentFailure:
    document_id: str
    error: str


@dataclass(frozen=True)
class DevelopmentReport:
    manifest: RunManifest
    codebook: Codebook
    decisions: list[CodingDecision]
    tests: dict[str, TestResult]
    proportions: dict[str, tuple[int, int]]
    abstain_counts: dict[str, int]
    unparseable_counts: dict[str, int]
    flagged: list[str]
    failures: list[DocumentFailure] = field(default_factory=list)


@dataclass(frozen=True)
class CalibrationReport:
    manifest: RunManifest
    codebook: Codebook
    decisions: list[CodingDecision]
    raters: list[str]
    agreements: dict[str, dict[str, AgreementResult]]
    disagreements: list[dict]
    abstain_counts: dict[str, int]
    unparseable_counts: dict[str, int]
    failures: list[DocumentFailure] = field(default_factory=list)


@dataclass(frozen=True)
class FinalReport:
    manifest: RunManifest
    codebook: Codebook
    decisions: list[CodingDecision]
    prevalence: dict[str, tuple[int, int, float, float]]
    timing: dict[str, float]
    abstain_counts: dict[str, int]
    unparseable_counts: dict[str, int]
    failures: list[DocumentFailure] = field(default_factory=list)


def _manifest(
    phase: str, corpus: Corpus, codebook: Codebook, sample: Sample | None, config: RunConfig
) -> RunManifest:
    return RunManifest(
        phase=phase,
        codebook_id=codebook.id,
        codebook_version=codebook.version,
        corpus_path=corpus.source,
        corpus_hash=corpus.corpus_id,
        sample_n=len(sample.document_ids) if sample is not None else None,
        sample_seed=sample.seed if sample is not None else None,
        sample_generator=sample.generator if sample is not None else None,
        provider_mode=config.provider_mode,
        model=config.model,
        temperature=config.temperature,
        concurrency=config.concurrency,
        abstain_policy=config.abstain_policy,
        alpha=config.alpha,
        cassette_hash=config.cassette_hash,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def collect_decisions(
    corpus: Corpus,
    codebook: Codebook,
    document_ids: list[str],
    provider: Provider,
    config: RunConfig,
) -> tuple[list[CodingDecision], list[DocumentFailure]]:
    """Code every document, documents-major and codes-minor.

    Provider calls may run concurrently up to the configured limit, but
    decisions come back in request order. A document whose requests fail
    (after the provider's own retries) is dropped whole and reported; the
    run continues.
    """
    rater_id = config.llm_rater_id()
    legal = codebook.label_set
    aliases = aliases_for(codebook)

    jobs = []
    for document_id in document_ids:
        document = corpus[document_id]
        for prompt in build_prompts(codebook, document):
            request = user_request(
                config.model, prompt.text, config.temperature, config.max_tokens
            )
            jobs.append((document_id, prompt.code_id, request))

    workers = max(1, config.concurrency)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(provider.complete, request) for _, _, request in jobs]
        outcomes = []
        for future in futures:
            try:
                outcomes.append(future.result())
            except ProviderError as exc:
                outcomes.append(exc)

    failed: dict[str, str] = {}
    for (document_id, _, _), outcome in zip(jobs, outcomes):
        if isinstance(outcome, ProviderError) and document_id not in failed:
            failed[document_id] = str(outcome)

    decisions: list[CodingDecision] = []
    for (document_id, code_id, _), outcome in zip(jobs, outcomes):
        if document_id in failed or isinstance(outcome, ProviderError):
            continue
        parsed = parse_decision(outcome.text, legal, aliases)
        decisions.append(
            CodingDecision(
                document_id=document_id,
                code_id=code_id,
                rater_id=rater_id,
                outcome=parsed.outcome,
                label=parsed.label,
                reason=parsed.reason,
                latency_seconds=outcome.latency_seconds,
                raw_text=outcome.text,
            )
        )
    failures = [DocumentFailure(doc, error) for doc, error in failed.items()]
    return decisions, failures


def _group_keys(codebook: Codebook) -> list[str | None]:
    if codebook.exclusivity == INDEPENDENT_BINARY:
        return list(codebook.code_ids())
    return [None]


def outcome_counts(
    decisions: list[CodingDecision], codebook: Codebook
) -> tuple[dict[str, int], dict[str, int]]:
    abstains: dict[str, int] = {}
    unparseables: dict[str, int] = {}
    for decision in decisions:
        key = decision.code_id if decision.code_id is not None else ALL_CODES
        if decision.outcome == ABSTAIN:
            abstains[key] = abstains.get(key, 0) + 1
        elif decision.outcome == UNPARSEABLE:
            unparseables[key] = unparseables.get(key, 0) + 1
    return abstains, unparseables


def development_stats(
    decisions: list[CodingDecision], codebook: Codebook, alpha: float
) -> tuple[dict[str, TestResult], dict[str, tuple[int, int]], list[str]]:
    """Randomness tests and label proportions; shared with offline re-analysis."""
    tests: dict[str, TestResult] = {}
    proportions: dict[str, tuple[int, int]] = {}
    if codebook.exclusivity == INDEPENDENT_BINARY:
        for code_id in codebook.code_ids():
            subset = [d for d in decisions if d.code_id == code_id]
            labeled = [d for d in subset if d.outcome == LABEL]
            if labeled:
                k = sum(1 for d in labeled if d.label == BINARY_LABELS[0])
                proportions[code_id] = (k, len(labeled))
                tests[code_id] = randomness_test(subset, codebook, alpha)
    else:
        labeled = [d for d in decisions if d.outcome == LABEL]
        if labeled:
            for category in codebook.label_set:
                k = sum(1 for d in labeled if d.label == category)
                proportions[category] = (k, len(labeled))
            tests[ALL_CODES] = randomness_test(decisions, codebook, alpha)
    flagged = [key for key, result in tests.items() if result.p_value >= alpha]
    return tests, proportions, flagged


def run_development(
    corpus: Corpus,
    codebook: Codebook,
    sample: Sample,
    provider: Provider,
    config: RunConfig,
) -> DevelopmentReport:
    """Code the sample and test each code's labels against random guessing."""
    decisions, failures = collect_decisions(
        corpus, codebook, list(sample.document_ids), provider, config
    )
    tests, proportions, flagged = development_stats(decisions, codebook, config.alpha)
    abstains, unparseables = outcome_counts(decisions, codebook)
    return DevelopmentReport(
        manifest=_manifest("development", corpus, codebook, sample, config),
        codebook=codebook,
        decisions=decisions,
        tests=tests,
        proportions=proportions,
        abstain_counts=abstains,
        unparseable_counts=unparseables,
        flagged=flagged,
        failures=failures,
    )


def _human_column(ratings: HumanRatings, code_id: str | None, document_ids: list[str]) -> dict[str, str]:
    return {
        doc: ratings.labels[(doc, code_id)]
        for doc in document_ids
        if (doc, code_id) in ratings.labels
    }


def _pair_key(first: str, second: str) -> str:
    return f"{first}|{second}"


RaterColumns = tuple[str, dict[str | None, dict[str, str]]]


def llm_rater_columns(
    decisions: list[CodingDecision], codebook: Codebook, policy: str
) -> RaterColumns:
    """Resolve model decisions into per-code {document: label} columns."""
    column = decisions_to_ratings(decisions, codebook, policy)
    document_order: list[str] = []
    seen: set[str] = set()
    for decision in decisions:
        if decision.document_id not in seen:
            seen.add(decision.document_id)
            document_order.append(decision.document_id)
    per_code = {
        key: {
            doc: column.labels[(doc, key)]
            for doc in document_order
            if (doc, key) in column.labels
        }
        for key in _group_keys(codebook)
    }
    return column.rater_id, per_code


def human_rater_columns(
    ratings: HumanRatings, codebook: Codebook, document_ids: list[str]
) -> RaterColumns:
    per_code = {key: _human_column(ratings, key, document_ids) for key in _group_keys(codebook)}
    return ratings.rater_id, per_code


def pair_agreements(
    rater_columns: list[RaterColumns],
    codebook: Codebook,
    document_order: list[str],
) -> dict[str, dict[str, AgreementResult]]:
    """AC1 (plus companions) for every rater pair, per code."""
    categories = BINARY_LABELS if codebook.exclusivity == INDEPENDENT_BINARY else codebook.label_set
    agreements: dict[str, dict[str, AgreementResult]] = {}
    for key in _group_keys(codebook):
        code_label = key if key is not None else ALL_CODES
        per_pair: dict[str, AgreementResult] = {}
        for i in range(len(rater_columns)):
            for j in range(i + 1, len(rater_columns)):
                first, first_cols = rater_columns[i]
                second, second_cols = rater_columns[j]
                try:
                    table = RatingsTable.from_columns(
                        {first: first_cols[key], second: second_cols[key]},
                        categories=categories,
                        document_order=document_order,
                    )
                except DegenerateTable as exc:
                    raise MissingHumanRatings(
                        f"raters {first!r} and {second!r} share no rated "
                        f"documents for code {code_label!r}: {exc}"
                    ) from exc
                per_pair[_pair_key(first, second)] = gwet_ac1(table)
        agreements[code_label] = per_pair
    return agreements


def run_calibration(
    corpus: Corpus,
    codebook: Codebook,
    sample: Sample,
    provider: Provider,
    human_ratings: list[HumanRatings],
    config: RunConfig,
) -> CalibrationReport:
    """Compare every rater pair (humans and model) on the same sample."""
    if not human_ratings:
        raise MissingHumanRatings("calibration needs at least one human ratings file")
    decisions, failures = collect_decisions(
        corpus, codebook, list(sample.document_ids), provider, config
    )
    document_ids = list(sample.document_ids)

    rater_columns: list[RaterColumns] = [
        human_rater_columns(ratings, codebook, document_ids) for ratings in human_ratings
    ]
    rater_columns.append(llm_rater_columns(decisions, codebook, config.abstain_policy))
    raters = [rater for rater, _ in rater_columns]
    agreements = pair_agreements(rater_columns, codebook, document_ids)

    reasons = {
        (d.document_id, d.code_id): d.reason for d in decisions if d.outcome == LABEL
    }
    disagreements: list[dict] = []
    for key in _group_keys(codebook):
        code_label = key if key is not None else ALL_CODES
        for doc in document_ids:
            votes = {}
            for rater, cols in rater_columns:
                if doc in cols[key]:
                    votes[rater] = cols[key][doc]
            if len(votes) >= 2 and len(set(votes.values())) > 1:
                disagreements.append(
                    {
                        "code": code_label,
                        "document_id": doc,
                        "text": corpus[doc].text,
                        "labels": votes,
                        "llm_reason": reasons.get((doc, key), ""),
                    }
                )

    abstains, unparseables = outcome_counts(decisions, codebook)
    return CalibrationReport(
        manifest=_manifest("calibration", corpus, codebook, sample, config),
        codebook=codebook,
        decisions=decisions,
        raters=raters,
        agreements=agreements,
        disagreements=disagreements,
        abstain_counts=abstains,
        unparseable_counts=unparseables,
        failures=failures,
    )


def run_final(
    corpus: Corpus,
    codebook: Codebook,
    provider: Provider,
    config: RunConfig,
    sample: Sample | None = None,
) -> FinalReport:
    """Code the sample (or the whole corpus) and estimate code prevalence."""
    document_ids = (
        list(sample.document_ids) if sample is not None else [d.id for d in corpus.documents]
    )
    decisions, failures = collect_decisions(corpus, codebook, document_ids, provider, config)

    prevalence: dict[str, tuple[int, int, float, float]] = {}
    if codebook.exclusivity == INDEPENDENT_BINARY:
        for code_id in codebook.code_ids():
            labeled = [d for d in decisions if d.code_id == code_id and d.outcome == LABEL]
            if not labeled:
                continue
            k = sum(1 for d in labeled if d.label == BINARY_LABELS[0])
            lo, hi = proportion_ci(k, len(labeled), config.ci_level)
            prevalence[code_id] = (k, len(labeled), lo, hi)
    else:
        labeled = [d for d in decisions if d.outcome == LABEL]
        for category in codebook.label_set:
            if not labeled:
                continue
            k = sum(1 for d in labeled if d.label == category)
            lo, hi = proportion_ci(k, len(labeled), config.ci_level)
            prevalence[category] = (k, len(labeled), lo, hi)

    try:
        timing = coding_time_summary(decisions)
    except NoDecisions:
        timing = {}
    abstains, unparseables = outcome_counts(decisions, codebook)
    return FinalReport(
        manifest=_manifest("final", corpus, codebook, sample, config),
        codebook=codebook,
        decisions=decisions,
        prevalence=prevalence,
        timing=timing,
        abstain_counts=abstains,
        unparseable_counts=unparseables,
        failures=failures,
    )


# ---------------------------------------------------------------------------
# Report rendering. Reports round to 2 decimals; results.csv keeps full
# precision. All iteration orders are fixed so output bytes are reproducible.


def _fmt2(x: float) -> str:
    return f"{x:.2f}"


def _manifest_lines(manifest: RunManifest) -> list[str]:
    lines = ["## Run configuration", ""]
    for key, value in manifest.stable_dict().items():
        lines.append(f"- {key}: {value}")
    lines.append("")
    return lines


def _failure_lines(failures: list[DocumentFailure]) -> list[str]:
    if not failures:
        return []
    lines = ["## Failed documents", ""]
    for failure in failures:
        lines.append(f"- {failure.document_id}: {failure.error}")
    lines.append("")
    return lines


def _outcome_lines(abstains: dict[str, int], unparseables: dict[str, int]) -> list[str]:
    lines = ["## Abstentions and unparseable output", ""]
    lines.append(f"- abstentions: {sum(abstains.values())}")
    lines.append(f"- unparseable: {sum(unparseables.values())}")
    for key in sorted(abstains):
        lines.append(f"  - abstain[{key}]: {abstains[key]}")
    for key in sorted(unparseables):
        lines.append(f"  - unparseable[{key}]: {unparseables[key]}")
    lines.append("")
    return lines


def render_development_md(report: DevelopmentReport) -> str:
    lines = ["# Development report", ""]
    lines += _manifest_lines(report.manifest)
    lines += ["## Tests of randomness", ""]
    lines.append("| Code | Description | Estimated proportion | P-value | Flag |")
    lines.append("| --- | --- | --- | --- | --- |")
    binary = report.codebook.exclusivity == INDEPENDENT_BINARY
    if binary:
        rows = [(code.id, code.name) for code in report.codebook.codes]
    else:
        rows = [(category, category) for category in report.codebook.label_set]
    for key, name in rows:
        proportion = report.proportions.get(key)
        share = _fmt2(proportion[0] / proportion[1]) if proportion else "n/a"
        test = report.tests.get(key if binary else ALL_CODES)
        p_text = _fmt2(test.p_value) if test else "n/a"
        flag = "possible random guessing" if (binary and key in report.flagged) else ""
        lines.append(f"| {key} | {name} | {share} | {p_text} | {flag} |")
    if not binary and ALL_CODES in report.tests:
        test = report.tests[ALL_CODES]
        lines.append("")
        lines.append(
            f"Label distribution vs. uniform: statistic {_fmt2(test.statistic)}, "
            f"df {test.df}, p-value {_fmt2(test.p_value)}."
        )
        if ALL_CODES in report.flagged:
            lines.append("")
            lines.append("Flag: possible random guessing.")
    lines.append("")
    lines.append(
        "A flagged code has label frequencies indistinguishable from uniform "
        f"guessing at alpha={report.manifest.alpha}. Note that a code whose true "
        "prevalence is near an even split also fails to reject, so review the "
        "coding reasons before concluding the model is guessing."
    )
    lines.append("")
    lines += _outcome_lines(report.abstain_counts, report.unparseable_counts)
    lines += _failure_lines(report.failures)
    return "\n".join(lines).rstrip("\n") + "\n"


def render_calibration_md(report: CalibrationReport) -> str:
    lines = ["# Calibration report", ""]
    lines += _manifest_lines(report.manifest)
    pair_keys: list[str] = []
    for i in range(len(report.raters)):
        for j in range(i + 1, len(report.raters)):
            pair_keys.append(_pair_key(report.raters[i], report.raters[j]))
    lines += ["## Agreement (AC1) by rater pair", ""]
    header = "| Code | " + " | ".join(pair_keys) + " |"
    lines.append(header)
    lines.append("| --- |" + " --- |" * len(pair_keys))
    for code_label, per_pair in report.agreements.items():
        cells = []
        for pair in pair_keys:
            result = per_pair.get(pair)
            cells.append(_fmt2(result.ac1) if result else "n/a")
        lines.append(f"| {code_label} | " + " | ".join(cells) + " |")
    lines.append("")
    lines += ["## Disagreements", ""]
    if not report.disagreements:
        lines.append("None.")
        lines.append("")
    else:
        lines.append("| Code | Document | Text | " + " | ".join(report.raters) + " | Model reason |")
        lines.append("| --- | --- | --- |" + " --- |" * (len(report.raters) + 1))
        for row in report.disagreements:
            labels = [row["labels"].get(rater, "(missing)") for rater in report.raters]
            text = row["text"].replace("|", "\\|").replace("\n", " ")
            reason = row["llm_reason"].replace("|", "\\|").replace("\n", " ")
            lines.append(
                f"| {row['code']} | {row['document_id']} | {text} | "
                + " | ".join(labels)
                + f" | {reason} |"
            )
        lines.append("")
    lines += _outcome_lines(report.abstain_counts, report.unparseable_counts)
    lines += _failure_lines(report.failures)
    return "\n".join(lines).rstrip("\n") + "\n"


def render_final_md(report: FinalReport) -> str:
    lines = ["# Final coding report", ""]
    lines += _manifest_lines(report.manifest)
    lines += ["## Prevalence", ""]
    lines.append("| Code | Count | N | Proportion | CI low | CI high |")
    lines.append("| --- | --- | --- | --- | --- | --- |")
    for key, (k, n, lo, hi) in report.prevalence.items():
        lines.append(
            f"| {key} | {k} | {n} | {_fmt2(k / n)} | {_fmt2(lo)} | {_fmt2(hi)} |"
        )
    lines.append("")
    lines += ["## Coding time", ""]
    for rater, seconds in sorted(report.timing.items()):
        lines.append(f"- {rater}: {_fmt2(seconds)} seconds/document")
    lines.append("")
    lines += _outcome_lines(report.abstain_counts, report.unparseable_counts)
    lines += _failure_lines(report.failures)
    return "\n".join(lines).rstrip("\n") + "\n"


def csv_text(rows: list[tuple[str, str, str, str, str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["dataset", "code", "metric", "value", "n_used"])
    writer.writerows(rows)
    return buffer.getvalue()


def development_rows(
    codebook: Codebook,
    decisions: list[CodingDecision],
    tests: dict[str, TestResult],
    proportions: dict[str, tuple[int, int]],
    abstain_counts: dict[str, int],
    unparseable_counts: dict[str, int],
) -> list[tuple[str, str, str, str, str]]:
    dataset = codebook.id
    rows: list[tuple[str, str, str, str, str]] = []
    for key, (k, n) in proportions.items():
        rows.append((dataset, key, "estimated_proportion", repr(k / n), str(n)))
    for key, test in tests.items():
        n = proportions.get(key, (0, 0))[1]
        if test.test == CHI_SQUARED_UNIFORM:
            n = sum(1 for d in decisions if d.outcome == LABEL)
            rows.append((dataset, key, "statistic", repr(test.statistic), str(n)))
            rows.append((dataset, key, "df", str(test.df), str(n)))
        rows.append((dataset, key, "p_value", repr(test.p_value), str(n)))
    for key in sorted(abstain_counts):
        rows.append((dataset, key, "abstain_count", str(abstain_counts[key]), ""))
    for key in sorted(unparseable_counts):
        rows.append((dataset, key, "unparseable_count", str(unparseable_counts[key]), ""))
    return rows


def development_csv_rows(report: DevelopmentReport) -> list[tuple[str, str, str, str, str]]:
    return development_rows(
        report.codebook,
        report.decisions,
        report.tests,
        report.proportions,
        report.abstain_counts,
        report.unparseable_counts,
    )


def calibration_csv_rows(report: CalibrationReport) -> list[tuple[str, str, str, str, str]]:
    dataset = report.codebook.id
    rows: list[tuple[str, str, str, str, str]] = []
    for code_label, per_pair in report.agreements.items():
        for pair, result in per_pair.items():
            n = str(result.n_used)
            rows.append((dataset, code_label, f"ac1[{pair}]", repr(result.ac1), n))
            rows.append((dataset, code_label, f"percent_agreement[{pair}]", repr(result.p_a), n))
            if result.kappa is not None:
                rows.append((dataset, code_label, f"kappa[{pair}]", repr(result.kappa), n))
    return rows


def final_csv_rows(report: FinalReport) -> list[tuple[str, str, str, str, str]]:
    dataset = report.codebook.id
    rows: list[tuple[str, str, str, str, str]] = []
    for key, (k, n, lo, hi) in report.prevalence.items():
        rows.append((dataset, key, "prevalence", repr(k / n), str(n)))
        rows.append((dataset, key, "ci_low", repr(lo), str(n)))
        rows.append((dataset, key, "ci_high", repr(hi), str(n)))
    documents = {d.document_id for d in report.decisions}
    for rater, seconds in sorted(report.timing.items()):
        rows.append(
            (dataset, ALL_CODES, f"coding_time_mean_seconds[{rater}]", repr(seconds), str(len(documents)))
        )
    return rows


_RENDERERS = {
    DevelopmentReport: (render_development_md, development_csv_rows),
    CalibrationReport: (render_calibration_md, calibration_csv_rows),
    FinalReport: (render_final_md, final_csv_rows),
}


def write_report(report, out_dir: str | Path, formats: tuple[str, ...] = ("md", "csv", "jsonl")) -> None:
    """Write report.md / results.csv / decisions.jsonl / manifest.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    render_md, csv_rows = _RENDERERS[type(report)]
    if "md" in formats:
        (out / "report.md").write_text(render_md(report), encoding="utf-8")
    if "csv" in formats:
        (out / "results.csv").write_text(csv_text(csv_rows(report)), encoding="utf-8")
    if "jsonl" in formats:
        write_decisions(out / "decisions.jsonl", report.decisions)
    (out / "manifest.json").write_text(
        json.dumps(report.manifest.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
