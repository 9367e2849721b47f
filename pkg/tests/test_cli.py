from __future__ import annotations

import json
import socket

import pytest

from laca.cli import main

from conftest import FIXTURES

DEV100 = FIXTURES / "dev100"
TRUMP = FIXTURES / "codebooks" / "trump_tweets.json"
CAL = FIXTURES / "calibration"


def dev_args(out, extra=()):
    return [
        "dev",
        "--corpus", str(DEV100 / "corpus.jsonl"),
        "--codebook", str(TRUMP),
        "--n", "100", "--seed", "7",
        "--mode", "replay",
        "--cassette", str(DEV100 / "cassette.jsonl"),
        "--out", str(out),
        *extra,
    ]


def test_sample_writes_ids_and_reruns_identically(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    args = ["sample", "--corpus", str(DEV100 / "corpus.jsonl"), "--n", "100", "--seed", "7"]
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    first = (out_a / "sample.json").read_bytes()
    assert first == (out_b / "sample.json").read_bytes()
    payload = json.loads(first)
    assert len(payload["document_ids"]) == 100
    assert payload["seed"] == 7


def test_sample_too_large_exits_2(tmp_path, capsys):
    code = main([
        "sample", "--corpus", str(DEV100 / "corpus.jsonl"),
        "--n", "101", "--seed", "7", "--out", str(tmp_path),
    ])
    assert code == 2
    assert "101" in capsys.readouterr().err


def test_dev_writes_reports(tmp_path):
    out = tmp_path / "dev"
    assert main(dev_args(out)) == 0
    report = (out / "report.md").read_text()
    assert "| HSTG | Use of hashtag | 0.57 | 0.19 | possible random guessing |" in report
    assert (out / "results.csv").exists()
    assert (out / "decisions.jsonl").exists()
    assert (out / "manifest.json").exists()


def test_dev_requires_sample_flags(tmp_path):
    code = main([
        "dev", "--corpus", str(DEV100 / "corpus.jsonl"), "--codebook", str(TRUMP),
        "--mode", "replay", "--cassette", str(DEV100 / "cassette.jsonl"),
        "--out", str(tmp_path),
    ])
    assert code == 2


def test_missing_codebook_flag_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["dev", "--corpus", str(DEV100 / "corpus.jsonl")])
    assert err.value.code == 2


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["sample", "--corpus", "x", "--n", "1", "--seed", "1", "--frobnicate"])
    assert err.value.code == 2


def test_replay_requires_cassette(tmp_path):
    code = main([
        "dev", "--corpus", str(DEV100 / "corpus.jsonl"), "--codebook", str(TRUMP),
        "--n", "100", "--seed", "7", "--mode", "replay", "--out", str(tmp_path),
    ])
    assert code == 2


def test_http_requires_api_key(tmp_path, monkeypatch):
    monkeypatch.delenv("LACA_API_KEY", raising=False)
    code = main([
        "dev", "--corpus", str(DEV100 / "corpus.jsonl"), "--codebook", str(TRUMP),
        "--n", "100", "--seed", "7", "--mode", "http", "--out", str(tmp_path),
    ])
    assert code == 2


def test_help_documents_every_flag(capsys):
    with pytest.raises(SystemExit) as err:
        main(["dev", "--help"])
    assert err.value.code == 0
    out = capsys.readouterr().out
    for flag in (
        "--corpus", "--codebook", "--sample", "--n", "--seed", "--model",
        "--temperature", "--mode", "--cassette", "--alpha", "--abstain",
        "--concurrency", "--out", "--format",
    ):
        assert flag in out


def test_replay_run_opens_no_network(tmp_path, monkeypatch):
    def deny(*args, **kwargs):
        raise AssertionError("network use in replay mode")

    monkeypatch.setattr(socket, "socket", deny)
    assert main(dev_args(tmp_path / "hermetic")) == 0


def test_dev_reruns_are_byte_identical(tmp_path):
    outs = [tmp_path / f"run{i}" for i in range(2)]
    for out in outs:
        assert main(dev_args(out)) == 0
    for name in ("report.md", "results.csv", "decisions.jsonl"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_partial_failure_exits_1(tmp_path):
    # drop one document's thirteen cassette entries
    lines = (DEV100 / "cassette.jsonl").read_text().splitlines()
    trimmed = tmp_path / "short.jsonl"
    trimmed.write_text("\n".join(lines[13:]) + "\n", encoding="utf-8")
    out = tmp_path / "partial"
    code = main([
        "dev", "--corpus", str(DEV100 / "corpus.jsonl"), "--codebook", str(TRUMP),
        "--n", "100", "--seed", "7", "--mode", "replay",
        "--cassette", str(trimmed), "--out", str(out),
    ])
    assert code == 1
    assert "## Failed documents" in (out / "report.md").read_text()


def test_calibrate_reports_every_pair(tmp_path):
    out = tmp_path / "cal"
    code = main([
        "calibrate",
        "--corpus", str(DEV100 / "corpus.jsonl"), "--codebook", str(TRUMP),
        "--n", "100", "--seed", "7", "--mode", "replay",
        "--cassette", str(DEV100 / "cassette.jsonl"),
        "--human", str(CAL / "original.csv"),
        "--human", str(CAL / "replicated.csv"),
        "--out", str(out),
    ])
    assert code == 0
    report = (out / "report.md").read_text()
    assert "human:original|human:replicated" in report
    assert "human:original|llm:gpt-3.5-turbo" in report
    csv_text = (out / "results.csv").read_text()
    assert "ac1[human:original|llm:gpt-3.5-turbo]" in csv_text


def test_calibrate_without_humans_exits_2(tmp_path):
    code = main([
        "calibrate",
        "--corpus", str(DEV100 / "corpus.jsonl"), "--codebook", str(TRUMP),
        "--n", "100", "--seed", "7", "--mode", "replay",
        "--cassette", str(DEV100 / "cassette.jsonl"), "--out", str(tmp_path),
    ])
    assert code == 2


def test_code_subcommand_writes_prevalence(tmp_path):
    out = tmp_path / "final"
    code = main([
        "code",
        "--corpus", str(DEV100 / "corpus.jsonl"), "--codebook", str(TRUMP),
        "--n", "100", "--seed", "7", "--mode", "replay",
        "--cassette", str(DEV100 / "cassette.jsonl"), "--out", str(out),
    ])
    assert code == 0
    assert "52.00 seconds/document" in (out / "report.md").read_text()


def test_offline_stats_reproduces_dev_csv(tmp_path):
    dev_out = tmp_path / "dev"
    assert main(dev_args(dev_out)) == 0
    stats_out = tmp_path / "offline"
    code = main([
        "stats", "--codebook", str(TRUMP),
        "--decisions", str(dev_out / "decisions.jsonl"),
        "--out", str(stats_out),
    ])
    assert code == 0
    assert (stats_out / "results.csv").read_bytes() == (dev_out / "results.csv").read_bytes()


def test_offline_stats_reproduces_calibration_csv(tmp_path):
    cal_out = tmp_path / "cal"
    assert main([
        "calibrate",
        "--corpus", str(DEV100 / "corpus.jsonl"), "--codebook", str(TRUMP),
        "--n", "100", "--seed", "7", "--mode", "replay",
        "--cassette", str(DEV100 / "cassette.jsonl"),
        "--human", str(CAL / "original.csv"),
        "--human", str(CAL / "replicated.csv"),
        "--out", str(cal_out),
    ]) == 0
    stats_out = tmp_path / "offline"
    assert main([
        "stats", "--codebook", str(TRUMP),
        "--decisions", str(cal_out / "decisions.jsonl"),
        "--human", str(CAL / "original.csv"),
        "--human", str(CAL / "replicated.csv"),
        "--out", str(stats_out),
    ]) == 0
    assert (stats_out / "results.csv").read_bytes() == (cal_out / "results.csv").read_bytes()


def test_stats_ratings_only_needs_no_provider(tmp_path, monkeypatch):
    monkeypatch.delenv("LACA_API_KEY", raising=False)
    out = tmp_path / "hh"
    code = main([
        "stats", "--codebook", str(TRUMP),
        "--human", str(CAL / "original.csv"),
        "--human", str(CAL / "replicated.csv"),
        "--out", str(out),
    ])
    assert code == 0
    text = (out / "results.csv").read_text()
    assert "ac1[human:original|human:replicated]" in text
    assert "llm" not in text


def test_stats_empty_decisions_exits_2(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    code = main([
        "stats", "--codebook", str(TRUMP), "--decisions", str(empty),
        "--out", str(tmp_path),
    ])
    assert code == 2


def test_dev_accepts_a_saved_sample(tmp_path):
    sample_dir = tmp_path / "s"
    assert main([
        "sample", "--corpus", str(DEV100 / "corpus.jsonl"),
        "--n", "100", "--seed", "7", "--out", str(sample_dir),
    ]) == 0
    drawn = tmp_path / "drawn"
    reused = tmp_path / "reused"
    assert main(dev_args(drawn)) == 0
    assert main([
        "dev", "--corpus", str(DEV100 / "corpus.jsonl"), "--codebook", str(TRUMP),
        "--sample", str(sample_dir / "sample.json"),
        "--mode", "replay", "--cassette", str(DEV100 / "cassette.jsonl"),
        "--out", str(reused),
    ]) == 0
    assert (drawn / "results.csv").read_bytes() == (reused / "results.csv").read_bytes()


def test_stale_sample_is_rejected(tmp_path, capsys):
    other = tmp_path / "other.jsonl"
    other.write_text('{"id": "x", "text": "different corpus"}\n')
    sample_dir = tmp_path / "s"
    assert main([
        "sample", "--corpus", str(other), "--n", "1", "--seed", "1", "--out", str(sample_dir),
    ]) == 0
    code = main([
        "dev", "--corpus", str(DEV100 / "corpus.jsonl"), "--codebook", str(TRUMP),
        "--sample", str(sample_dir / "sample.json"),
        "--mode", "replay", "--cassette", str(DEV100 / "cassette.jsonl"),
        "--out", str(tmp_path / "out"),
    ])
    assert code == 2
    assert "different corpus" in capsys.readouterr().err


def test_format_flag_limits_outputs(tmp_path):
    out = tmp_path / "csv_only"
    assert main(dev_args(out, extra=["--format", "csv"])) == 0
    assert (out / "results.csv").exists()
    assert not (out / "report.md").exists()


def test_scripted_mode_runs_whole_pipeline(tmp_path):
    out = tmp_path / "scripted"
    code = main([
        "dev",
        "--corpus", str(DEV100 / "corpus.jsonl"), "--codebook", str(TRUMP),
        "--n", "10", "--seed", "3", "--mode", "scripted", "--out", str(out),
    ])
    assert code == 0
    report = (out / "report.md").read_text()
    assert "| HSTG |" in report
