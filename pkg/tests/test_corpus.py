"""Tests for paired corpus generation and manifests."""

from __future__ import annotations

import json
from dataclasses import replace
from typing import TYPE_CHECKING

import numpy as np
import pytest

from dmnet.audio import read_wav
from dmnet.core import CorpusTarget, Split
from dmnet.errors import CorpusError
from dmnet.simulation.corpus import (
    CorpusConfig,
    build_corpus,
    load_manifest,
    read_file_list,
    speaker_of,
    split_of,
    write_manifest,
)

if TYPE_CHECKING:
    from pathlib import Path

    from dmnet.simulation.corpus import CorpusResult
    from dmnet.simulation.distortion import RecipeRanges


def test_corpus_layout(corpus: CorpusResult) -> None:
    assert len(corpus.entries) == 6
    assert not corpus.skipped
    for entry in corpus.entries:
        clean = read_wav(entry.clean_path)
        degraded = read_wav(entry.degraded_path)
        assert len(clean) == len(degraded)
        assert entry.clean_path.name == entry.degraded_path.name == f"{entry.id}.wav"
        assert entry.spec.noise_offset is not None
        assert entry.target is CorpusTarget.DRY_ROOM


def test_manifest_round_trip(corpus: CorpusResult) -> None:
    loaded = load_manifest(corpus.manifest_path)
    assert loaded == corpus.entries
    assert load_manifest(corpus.manifest_path.parent) == loaded


def test_validation_speaker_split(corpus: CorpusResult) -> None:
    for entry in corpus.entries:
        expected = Split.VALIDATION if entry.speaker == "p258" else Split.TRAIN
        assert entry.split is expected


def test_same_seed_same_corpus(
    tmp_path: Path,
    audio_dirs: tuple[Path, Path],
    fast_ranges: RecipeRanges,
    corpus: CorpusResult,
) -> None:
    clean_dir, noise_dir = audio_dirs
    again = build_corpus(clean_dir, noise_dir, 6, 7, tmp_path / "again", CorpusConfig(ranges=fast_ranges))
    for a, b in zip(corpus.entries, again.entries, strict=True):
        assert a.id == b.id
        assert a.spec == b.spec
        assert a.degraded_path.read_bytes() == b.degraded_path.read_bytes()
        assert a.clean_path.read_bytes() == b.clean_path.read_bytes()


def test_other_seed_other_corpus(
    tmp_path: Path,
    audio_dirs: tuple[Path, Path],
    fast_ranges: RecipeRanges,
    corpus: CorpusResult,
) -> None:
    clean_dir, noise_dir = audio_dirs
    other = build_corpus(clean_dir, noise_dir, 6, 8, tmp_path / "other", CorpusConfig(ranges=fast_ranges))
    assert [e.spec for e in other.entries] != [e.spec for e in corpus.entries]


def test_source_target(tmp_path: Path, audio_dirs: tuple[Path, Path], fast_ranges: RecipeRanges) -> None:
    """Test that the source target writes the untouched clean speech."""
    clean_dir, noise_dir = audio_dirs
    config = CorpusConfig(ranges=fast_ranges, target=CorpusTarget.SOURCE)
    result = build_corpus(clean_dir, noise_dir, 2, 0, tmp_path / "src", config)
    for entry in result.entries:
        assert entry.source_path is not None
        source = read_wav(entry.source_path)
        assert np.array_equal(read_wav(entry.clean_path).samples, source.samples)


def test_zero_count_writes_empty_manifest(tmp_path: Path, audio_dirs: tuple[Path, Path]) -> None:
    clean_dir, noise_dir = audio_dirs
    result = build_corpus(clean_dir, noise_dir, 0, 0, tmp_path / "empty")
    assert result.entries == []
    assert result.manifest_path.read_text() == ""
    assert load_manifest(result.manifest_path) == []


def test_no_inputs(tmp_path: Path, audio_dirs: tuple[Path, Path]) -> None:
    _, noise_dir = audio_dirs
    (tmp_path / "nothing").mkdir()
    with pytest.raises(CorpusError):
        build_corpus(tmp_path / "nothing", noise_dir, 2, 0, tmp_path / "out")


def test_unreadable_inputs_are_skipped(tmp_path: Path, audio_dirs: tuple[Path, Path]) -> None:
    _, noise_dir = audio_dirs
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "p225_001.wav").write_bytes(b"junk")
    with pytest.raises(CorpusError, match="skipped"):
        build_corpus(bad, noise_dir, 2, 0, tmp_path / "out")


def test_file_list(tmp_path: Path, audio_dirs: tuple[Path, Path]) -> None:
    clean_dir, _ = audio_dirs
    listing = tmp_path / "list.txt"
    listing.write_text(f"# speech\n{clean_dir.name}/p225_001.wav\n\n{clean_dir / 'p226_002.wav'}\n")
    paths = read_file_list(listing)
    assert [p.name for p in paths] == ["p225_001.wav", "p226_002.wav"]
    assert all(p.is_file() for p in paths)
    assert len(read_file_list(clean_dir)) == 3
    with pytest.raises(CorpusError):
        read_file_list(tmp_path / "missing.txt")


def test_speaker_helpers() -> None:
    assert speaker_of("/data/p287_010.wav") == "p287"
    assert split_of("p287") is Split.VALIDATION
    assert split_of("p225") is Split.TRAIN


def test_malformed_manifest(tmp_path: Path) -> None:
    path = tmp_path / "manifest.jsonl"
    path.write_text('{"id": "x"}\n')
    with pytest.raises(CorpusError, match="malformed"):
        load_manifest(path)
    with pytest.raises(CorpusError, match="not found"):
        load_manifest(tmp_path / "nope.jsonl")


def test_manifest_paths_are_relative(corpus: CorpusResult, tmp_path: Path) -> None:
    """Test that pair files are stored relative to the manifest and survive a rewrite elsewhere."""
    first = json.loads(corpus.manifest_path.read_text().splitlines()[0])
    assert first["clean_path"] == f"clean/{first['id']}.wav"
    assert first["degraded_path"] == f"degraded/{first['id']}.wav"
    moved = write_manifest(tmp_path / "copy" / "manifest.jsonl", [replace(corpus.entries[0])])
    assert load_manifest(moved)[0].clean_path == corpus.entries[0].clean_path
