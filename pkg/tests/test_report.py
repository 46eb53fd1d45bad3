"""Tests for corpus evaluation and report files."""

from __future__ import annotations

import json
import shutil
from typing import TYPE_CHECKING

import pytest

from dmnet.core import Split
from dmnet.errors import ConfigurationError, CorpusError, DomainError
from dmnet.metrics.report import EvalConfig, evaluate, load_external, summarize
from dmnet.simulation.corpus import write_manifest

if TYPE_CHECKING:
    from pathlib import Path

    from dmnet.simulation.corpus import CorpusResult


def _copy_clean(corpus: CorpusResult, out: Path) -> Path:
    out.mkdir()
    for entry in corpus.entries:
        shutil.copy(entry.clean_path, out / f"{entry.id}.wav")
    return out


def test_perfect_restoration(corpus: CorpusResult, tmp_path: Path) -> None:
    """Test that restored files identical to the targets score LSD 0 and STOI 1."""
    restored = _copy_clean(corpus, tmp_path / "restored")
    report = evaluate(corpus.manifest_path, restored)
    assert report.label == "restored"
    assert not report.missing
    assert report.aggregate["lsd_db"].mean == 0.0
    assert report.aggregate["stoi"].mean == pytest.approx(1.0, abs=1e-6)
    assert report.aggregate["si_sdr_db"].mean == 60.0
    assert report.aggregate["snr_db"].mean == 60.0


def test_noisy_row(corpus: CorpusResult) -> None:
    report = evaluate(corpus.manifest_path)
    assert report.label == "noisy"
    assert len(report.per_utterance) == 6
    assert report.aggregate["lsd_db"].mean > 0.0
    assert report.aggregate["stoi"].mean < 1.0
    summary = report.aggregate["lsd_db"]
    assert summary.ci_low <= summary.mean <= summary.ci_high
    assert summary.n == 6


def test_missing_outputs_are_flagged(corpus: CorpusResult, tmp_path: Path) -> None:
    restored = _copy_clean(corpus, tmp_path / "restored")
    gone = corpus.entries[2]
    (restored / f"{gone.id}.wav").unlink()
    report = evaluate(corpus.manifest_path, restored)
    assert report.missing == [gone.id]
    assert report.aggregate["lsd_db"].n == 5
    assert "1 missing" in report.summary_text()


def test_unreadable_output_fails_only_its_row(corpus: CorpusResult, tmp_path: Path) -> None:
    """Test that one truncated WAV is recorded as a failed row while the rest of the report completes."""
    restored = _copy_clean(corpus, tmp_path / "restored")
    broken = corpus.entries[1]
    path = restored / f"{broken.id}.wav"
    path.write_bytes(path.read_bytes()[:20])
    report = evaluate(corpus.manifest_path, restored)
    assert report.failed == [broken.id]
    assert not report.missing
    row = report.per_utterance[1]
    assert row.error is not None
    assert row.error.startswith("AudioFormatError")
    assert row.values() == {}
    assert report.aggregate["lsd_db"].n == 5
    assert "1 failed" in report.summary_text()
    assert json.loads(report.to_jsonl().splitlines()[-1])["failed"] == [broken.id]


def test_split_filter(corpus: CorpusResult) -> None:
    train_ids = [e.id for e in corpus.entries if e.split is Split.TRAIN]
    if not train_ids:
        pytest.skip("corpus drew only validation speakers")
    report = evaluate(corpus.manifest_path, config=EvalConfig(split=Split.TRAIN))
    assert [u.id for u in report.per_utterance] == train_ids


def test_empty_manifest(tmp_path: Path) -> None:
    manifest = write_manifest(tmp_path / "manifest.jsonl", [])
    with pytest.raises(CorpusError):
        evaluate(manifest)


def test_external_scores(corpus: CorpusResult, tmp_path: Path) -> None:
    sidecar = tmp_path / "external.jsonl"
    sidecar.write_text(
        "".join(json.dumps({"id": e.id, "pesq": 2.5, "srmr": 7.0}) + "\n" for e in corpus.entries),
    )
    report = evaluate(corpus.manifest_path, external=sidecar)
    assert report.aggregate["pesq"].mean == pytest.approx(2.5)
    assert report.per_utterance[0].external == {"pesq": 2.5, "srmr": 7.0}
    assert report.summary_text().splitlines()[1].split()[:2] == ["PESQ", "SRMR"]


def test_external_validation(tmp_path: Path) -> None:
    unknown = tmp_path / "unknown.jsonl"
    unknown.write_text('{"id": "a", "mos": 3.0}\n')
    with pytest.raises(ConfigurationError, match="mos"):
        load_external(unknown)
    out_of_range = tmp_path / "range.jsonl"
    out_of_range.write_text('{"id": "a", "pesq": 4.9}\n')
    with pytest.raises(DomainError, match="pesq"):
        load_external(out_of_range)


@pytest.mark.parametrize(
    "line",
    [
        '{"id": "a", "pesq": ',
        '{"pesq": 2.5}',
        '{"id": "a", "pesq": "high"}',
        '["a", 2.5]',
    ],
)
def test_malformed_external_records(tmp_path: Path, line: str) -> None:
    """Test that broken JSON, a missing id and non-numeric values are configuration errors naming the line."""
    sidecar = tmp_path / "external.jsonl"
    sidecar.write_text('{"id": "ok", "pesq": 2.0}\n' + line + "\n")
    with pytest.raises(ConfigurationError, match=":2: malformed"):
        load_external(sidecar)


def test_missing_external_file(tmp_path: Path) -> None:
    with pytest.raises(ConfigurationError, match="cannot read"):
        load_external(tmp_path / "absent.jsonl")


def test_report_files(corpus: CorpusResult, tmp_path: Path) -> None:
    report = evaluate(corpus.manifest_path)
    jsonl, text = report.write(tmp_path / "out", stem="noisy")
    lines = jsonl.read_text().splitlines()
    assert len(lines) == 7
    assert json.loads(lines[0])["id"] == corpus.entries[0].id
    footer = json.loads(lines[-1])
    assert footer["label"] == "noisy"
    assert footer["config"]["lsd_n_fft"] == 2048
    assert "LSD" in text.read_text()


def test_summarize() -> None:
    summary = summarize([1.0, 2.0, 3.0])
    assert summary.mean == 2.0
    assert summary.ci_low < 2.0 < summary.ci_high
    # t quantile at 2 degrees of freedom times the standard error
    assert summary.ci_high - summary.mean == pytest.approx(4.302652729 * (1.0 / 3**0.5), rel=1e-6)
    single = summarize([5.0])
    assert single.ci_low == single.ci_high == 5.0


def test_eval_config_checks() -> None:
    with pytest.raises(ConfigurationError):
        EvalConfig(confidence=1.0)
    with pytest.raises(ConfigurationError):
        EvalConfig(lsd_hop=4096)
