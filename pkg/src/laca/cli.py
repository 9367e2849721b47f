"""Command-line entry points.

Subcommands mirror the batch phases:

* ``laca sample``: draw a reproducible document sample.
* ``laca dev``: code an uncoded sample and run randomness tests.
* ``laca calibrate``: compare the model against human rating files.
* ``laca code``: final coding with prevalence estimates.
* ``laca stats``: offline re-analysis of saved decisions/ratings.

Exit codes: 0 success, 1 some documents permanently failed, 2 usage or
validation error. All randomness comes from ``--seed``; nothing else is
entropy-dependent, so identical flags produce identical outputs (given a
replayed or scripted provider).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import pipeline
from .codebook import Codebook, load_codebook
from .corpus import draw_sample, load_corpus, load_human_ratings, load_sample, save_sample
from .decode import ABSTAIN_POLICY_COERCE_NO, ABSTAIN_POLICY_EXCLUDE, read_decisions
from .errors import LacaError, NoDecisions
from .provider import (
    API_BASE_ENV,
    API_KEY_ENV,
    DEFAULT_API_BASE,
    Cassette,
    CompletionRequest,
    HttpProvider,
    Provider,
    RecordingProvider,
    ReplayProvider,
    ScriptedProvider,
    cassette_file_hash,
)

MODES = ("http", "record", "replay", "scripted")


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=MODES, default="http", help="provider mode")
    parser.add_argument("--cassette", help="cassette path (required for replay; written by record)")
    parser.add_argument("--model", default="gpt-3.5-turbo", help="model id sent on the wire")
    parser.add_argument("--temperature", type=float, default=0.0, help="sampling temperature")
    parser.add_argument("--max-tokens", type=int, default=None, help="completion token cap")
    parser.add_argument("--concurrency", type=int, default=4, help="max in-flight requests")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, help="JSONL corpus path")
    parser.add_argument("--codebook", required=True, help="codebook JSON path")
    parser.add_argument("--sample", help="existing sample.json to reuse")
    parser.add_argument("--n", type=int, help="sample size to draw")
    parser.add_argument("--seed", type=int, help="sample seed")
    parser.add_argument("--alpha", type=float, default=0.05, help="significance level")
    parser.add_argument(
        "--abstain",
        choices=(ABSTAIN_POLICY_EXCLUDE, ABSTAIN_POLICY_COERCE_NO),
        default=ABSTAIN_POLICY_EXCLUDE,
        help="how abstentions enter the statistics",
    )
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument(
        "--format",
        action="append",
        choices=("md", "csv", "jsonl"),
        default=None,
        help="report formats to write (repeatable; default all)",
    )
    _add_provider_flags(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="laca", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sample = sub.add_parser("sample", help="draw a reproducible document sample")
    p_sample.add_argument("--corpus", required=True)
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--seed", type=int, required=True)
    p_sample.add_argument("--out", default=".")
    p_sample.set_defaults(func=cmd_sample)

    p_dev = sub.add_parser("dev", help="development run: codes, reasons, randomness tests")
    _add_run_flags(p_dev)
    p_dev.set_defaults(func=cmd_dev)

    p_cal = sub.add_parser("calibrate", help="agreement between model and human raters")
    _add_run_flags(p_cal)
    p_cal.add_argument(
        "--human", action="append", default=[], help="human ratings CSV (repeatable)"
    )
    p_cal.set_defaults(func=cmd_calibrate)

    p_code = sub.add_parser("code", help="final coding: prevalence with intervals")
    _add_run_flags(p_code)
    p_code.set_defaults(func=cmd_code)

    p_stats = sub.add_parser("stats", help="offline re-analysis of saved outputs")
    p_stats.add_argument("--codebook", required=True)
    p_stats.add_argument("--decisions", help="decisions.jsonl from a previous run")
    p_stats.add_argument("--human", action="append", default=[], help="human ratings CSV (repeatable)")
    p_stats.add_argument("--alpha", type=float, default=0.05)
    p_stats.add_argument(
        "--abstain",
        choices=(ABSTAIN_POLICY_EXCLUDE, ABSTAIN_POLICY_COERCE_NO),
        default=ABSTAIN_POLICY_EXCLUDE,
    )
    p_stats.add_argument("--out", default=".")
    p_stats.set_defaults(func=cmd_stats)

    return parser


def _scripted_default(codebook: Codebook) -> ScriptedProvider:
    # Dry-run provider: always answers the first legal label. Useful for
    # exercising the full pipeline without a server or cassette.
    answer = f"{codebook.label_set[0]}\n---\nScripted response."

    def script(request: CompletionRequest) -> str:
        return answer

    return ScriptedProvider(script)


def _make_provider(args: argparse.Namespace, codebook: Codebook) -> tuple[Provider, str | None]:
    """Build the provider for ``--mode``; returns (provider, cassette hash)."""
    if args.mode == "replay":
        if not args.cassette:
            raise LacaError("replay mode requires --cassette")
        cassette = Cassette.load(args.cassette)
        return ReplayProvider(cassette), cassette_file_hash(args.cassette)
    if args.mode == "scripted":
        return _scripted_default(codebook), None
    api_key = os.environ.get(API_KEY_ENV, "")
    base_url = os.environ.get(API_BASE_ENV, DEFAULT_API_BASE)
    if args.mode == "record":
        if not args.cassette:
            raise LacaError("record mode requires --cassette")
        if not api_key:
            raise LacaError(f"record mode requires {API_KEY_ENV} to be set")
        http = HttpProvider(base_url=base_url, api_key=api_key)
        return RecordingProvider(http, Cassette(), path=args.cassette), None
    if not api_key:
        raise LacaError(f"http mode requires {API_KEY_ENV} to be set")
    return HttpProvider(base_url=base_url, api_key=api_key), None


def _resolve_sample(args: argparse.Namespace, corpus) -> object | None:
    if args.sample:
        sample = load_sample(args.sample)
        if sample.corpus_id != corpus.corpus_id:
            raise LacaError(
                f"sample {args.sample} was drawn from a different corpus "
                f"(content hash {sample.corpus_id[:12]}..., "
                f"got {corpus.corpus_id[:12]}...)"
            )
        missing = [doc for doc in sample.document_ids if doc not in corpus]
        if missing:
            raise LacaError(f"sample references unknown documents: {missing[:3]}")
        return sample
    if args.n is not None:
        if args.seed is None:
            raise LacaError("--n requires --seed")
        return draw_sample(corpus, args.n, args.seed)
    return None


def _run_config(args: argparse.Namespace, cassette_hash: str | None) -> pipeline.RunConfig:
    return pipeline.RunConfig(
        model=args.model,
        temperature=args.temperature,
        max_tokens=args.max_tokens,
        concurrency=args.concurrency,
        alpha=args.alpha,
        abstain_policy=args.abstain,
        provider_mode=args.mode,
        cassette_hash=cassette_hash,
    )


def _formats(args: argparse.Namespace) -> tuple[str, ...]:
    return tuple(args.format) if args.format else ("md", "csv", "jsonl")


def cmd_sample(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    sample = draw_sample(corpus, args.n, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_sample(sample, out / "sample.json")
    print(f"wrote {out / 'sample.json'} ({len(sample.document_ids)} documents)")
    return 0


def cmd_dev(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    codebook = load_codebook(args.codebook)
    sample = _resolve_sample(args, corpus)
    if sample is None:
        raise LacaError("dev needs --sample or --n/--seed")
    provider, cassette_hash = _make_provider(args, codebook)
    config = _run_config(args, cassette_hash)
    report = pipeline.run_development(corpus, codebook, sample, provider, config)
    pipeline.write_report(report, args.out, _formats(args))
    print(f"wrote development report to {args.out}")
    return 1 if report.failures else 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    if not args.human:
        raise LacaError("calibrate needs at least one --human ratings file")
    corpus = load_corpus(args.corpus)
    codebook = load_codebook(args.codebook)
    sample = _resolve_sample(args, corpus)
    if sample is None:
        raise LacaError("calibrate needs --sample or --n/--seed")
    humans = [load_human_ratings(path, codebook) for path in args.human]
    provider, cassette_hash = _make_provider(args, codebook)
    config = _run_config(args, cassette_hash)
    report = pipeline.run_calibration(corpus, codebook, sample, provider, humans, config)
    pipeline.write_report(report, args.out, _formats(args))
    print(f"wrote calibration report to {args.out}")
    return 1 if report.failures else 0


def cmd_code(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    codebook = load_codebook(args.codebook)
    sample = _resolve_sample(args, corpus)
    provider, cassette_hash = _make_provider(args, codebook)
    config = _run_config(args, cassette_hash)
    report = pipeline.run_final(corpus, codebook, provider, config, sample=sample)
    pipeline.write_report(report, args.out, _formats(args))
    print(f"wrote final coding report to {args.out}")
    return 1 if report.failures else 0


def cmd_stats(args: argparse.Namespace) -> int:
    codebook = load_codebook(args.codebook)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    decisions = None
    if args.decisions:
        decisions = read_decisions(args.decisions)
        if not decisions:
            raise NoDecisions(f"no decisions in {args.decisions}")
    humans = [load_human_ratings(path, codebook) for path in args.human]
    if decisions is None and len(humans) < 2:
        raise LacaError("stats needs --decisions and/or at least two --human files")

    rows: list[tuple[str, str, str, str, str]] = []
    if decisions is not None and not humans:
        tests, proportions, _ = pipeline.development_stats(decisions, codebook, args.alpha)
        abstains, unparseables = pipeline.outcome_counts(decisions, codebook)
        rows = pipeline.development_rows(
            codebook, decisions, tests, proportions, abstains, unparseables
        )
    else:
        rater_columns: list[pipeline.RaterColumns] = []
        document_order: list[str] = []
        if decisions is not None:
            seen = set()
            for decision in decisions:
                if decision.document_id not in seen:
                    seen.add(decision.document_id)
                    document_order.append(decision.document_id)
        else:
            seen = set()
            for ratings in humans:
                for doc, _ in ratings.labels:
                    if doc not in seen:
                        seen.add(doc)
                        document_order.append(doc)
        for ratings in humans:
            rater_columns.append(
                pipeline.human_rater_columns(ratings, codebook, document_order)
            )
        if decisions is not None:
            rater_columns.append(
                pipeline.llm_rater_columns(decisions, codebook, args.abstain)
            )
        agreements = pipeline.pair_agreements(rater_columns, codebook, document_order)
        for code_label, per_pair in agreements.items():
            for pair, result in per_pair.items():
                n = str(result.n_used)
                rows.append((codebook.id, code_label, f"ac1[{pair}]", repr(result.ac1), n))
                rows.append(
                    (codebook.id, code_label, f"percent_agreement[{pair}]", repr(result.p_a), n)
                )
                if result.kappa is not None:
                    rows.append((codebook.id, code_label, f"kappa[{pair}]", repr(result.kappa), n))

    (out / "results.csv").write_text(pipeline.csv_text(rows), encoding="utf-8")
    print(f"wrote {out / 'results.csv'}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LacaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
