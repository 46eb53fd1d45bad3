"""Paired (degraded, clean) corpus generation."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
from tqdm import tqdm

from dmnet.audio import read_wav, write_wav
from dmnet.constants import VALIDATION_SPEAKERS
from dmnet.core import CorpusTarget, NoisePosition, Split, UtteranceId
from dmnet.errors import AudioFormatError, CorpusError, DataError

from .distortion import DistortionSpec, RecipeRanges, sample_distortion_spec
from .mixing import tile_noise
from .pipeline import degrade, speech_path

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"


def speaker_of(path: str | Path) -> str:
    """Speaker label from a VCTK-style file name such as ``p258_001.wav``."""
    return Path(path).stem.split("_", 1)[0]


def split_of(speaker: str) -> Split:
    """Validation split for the held-out speakers, training otherwise."""
    return Split.VALIDATION if speaker in VALIDATION_SPEAKERS else Split.TRAIN


def read_file_list(source: str | Path) -> list[Path]:
    """WAV paths from a directory, or from a text file with one path per line.

    Relative paths in a list file are resolved against the file's directory.
    Blank lines and lines starting with ``#`` are ignored.
    """
    source = Path(source)
    if source.is_dir():
        return sorted(source.glob("*.wav"))
    if not source.is_file():
        msg = f"{source}: no such manifest or directory"
        raise CorpusError(msg)
    paths = []
    for line in source.read_text(encoding="utf-8").splitlines():
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        path = Path(entry)
        paths.append(path if path.is_absolute() else source.parent / path)
    return paths


@dataclass(frozen=True)
class ManifestEntry:
    """One line of a corpus manifest."""

    id: UtteranceId
    clean_path: Path
    degraded_path: Path
    split: Split
    speaker: str
    spec: DistortionSpec
    source_path: Path | None = None
    noise_path: Path | None = None
    target: CorpusTarget = CorpusTarget.DRY_ROOM
    target_gain: float = 1.0

    def to_json(self, root: Path) -> str:
        """Serialize with paths relative to `root` where possible."""

        def rel(path: Path | None) -> str | None:
            if path is None:
                return None
            try:
                return str(path.relative_to(root))
            except ValueError:
                return str(path)

        record: dict[str, Any] = {
            "id": self.id,
            "clean_path": rel(self.clean_path),
            "degraded_path": rel(self.degraded_path),
            "split": self.split.value,
            "speaker": self.speaker,
            "source_path": rel(self.source_path),
            "noise_path": rel(self.noise_path),
            "target": self.target.value,
            "target_gain": self.target_gain,
            "spec": self.spec.to_dict(),
        }
        return json.dumps(record, sort_keys=True)

    @classmethod
    def from_json(cls, line: str, root: Path) -> ManifestEntry:
        """Parse a manifest line, resolving relative paths against `root`."""
        record = json.loads(line)

        def resolve(value: str | None) -> Path | None:
            if value is None:
                return None
            path = Path(value)
            return path if path.is_absolute() else root / path

        clean_path = resolve(record["clean_path"])
        degraded_path = resolve(record["degraded_path"])
        assert clean_path is not None
        assert degraded_path is not None
        return cls(
            id=UtteranceId(record["id"]),
            clean_path=clean_path,
            degraded_path=degraded_path,
            split=Split(record["split"]),
            speaker=record["speaker"],
            spec=DistortionSpec.from_dict(record["spec"]),
            source_path=resolve(record.get("source_path")),
            noise_path=resolve(record.get("noise_path")),
            target=CorpusTarget(record.get("target", CorpusTarget.DRY_ROOM.value)),
            target_gain=float(record.get("target_gain", 1.0)),
        )


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Read every entry of a corpus manifest."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.is_file():
        msg = f"{path}: corpus manifest not found"
        raise CorpusError(msg)
    lines = path.read_text(encoding="utf-8").splitlines()
    try:
        return [ManifestEntry.from_json(line, path.parent) for line in lines if line.strip()]
    except (json.JSONDecodeError, KeyError, ValueError) as e:
        msg = f"{path}: malformed manifest ({e})"
        raise CorpusError(msg) from e


def write_manifest(path: Path, entries: Sequence[ManifestEntry]) -> Path:
    """Write a manifest atomically."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    text = "".join(entry.to_json(path.parent) + "\n" for entry in entries)
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)
    return path


@dataclass(frozen=True, slots=True)
class CorpusConfig:
    """Recipe and execution settings for corpus generation."""

    count: int = 4
    seed: int = 0
    ranges: RecipeRanges = field(default_factory=RecipeRanges)
    noise_position: NoisePosition = NoisePosition.PRE_FILTER
    target: CorpusTarget = CorpusTarget.DRY_ROOM
    workers: int = 1


@dataclass(frozen=True)
class CorpusRequest:
    """Inputs of one corpus build."""

    clean_manifest: Path
    noise_manifest: Path
    out_dir: Path
    config: CorpusConfig = field(default_factory=CorpusConfig)


@dataclass(frozen=True)
class CorpusResult:
    """Outcome of a corpus build."""

    manifest_path: Path
    entries: list[ManifestEntry]
    skipped: list[str]


@dataclass(frozen=True)
class _PairJob:
    index: int
    seed: int
    clean_paths: tuple[Path, ...]
    noise_paths: tuple[Path, ...]
    config: CorpusConfig
    out_dir: Path


def _build_pair(job: _PairJob) -> ManifestEntry | str:
    """Generate one pair. Returns a warning message when an input is unreadable."""
    utterance_seed = job.seed ^ job.index
    rng = np.random.default_rng(utterance_seed)
    clean_path = job.clean_paths[int(rng.integers(len(job.clean_paths)))]
    noise_path = job.noise_paths[int(rng.integers(len(job.noise_paths)))]
    spec = sample_distortion_spec(rng, job.config.ranges, utterance_seed, job.config.noise_position)

    try:
        source = read_wav(clean_path)
        noise = read_wav(noise_path)
    except AudioFormatError as e:
        return f"pair {job.index} skipped: {e}"

    noise_samples = tile_noise(noise.samples, len(source))
    spec = replace(spec, noise_offset=int(rng.integers(noise_samples.size - len(source) + 1)))
    try:
        degraded, spec_out = degrade(source, noise.with_samples(noise_samples), spec)
    except DataError as e:
        return f"pair {job.index} skipped: {clean_path}: {e}"

    target_gain = 1.0
    target = source
    if job.config.target is CorpusTarget.DRY_ROOM:
        dry = speech_path(source.samples, spec.dry())
        target = source.with_samples(dry.speech)
        target_gain = dry.reverb_gain

    utterance_id = UtteranceId(f"{job.index:06d}_{source.id}")
    clean_out = write_wav(job.out_dir / "clean" / f"{utterance_id}.wav", target)
    degraded_out = write_wav(job.out_dir / "degraded" / f"{utterance_id}.wav", degraded)
    speaker = speaker_of(clean_path)
    return ManifestEntry(
        id=utterance_id,
        clean_path=clean_out,
        degraded_path=degraded_out,
        split=split_of(speaker),
        speaker=speaker,
        spec=spec_out,
        source_path=Path(clean_path).resolve(),
        noise_path=Path(noise_path).resolve(),
        target=job.config.target,
        target_gain=target_gain,
    )


class CorpusBuilder:
    """Builds paired corpora from clean speech and noise recordings."""

    def build(self, request: CorpusRequest) -> CorpusResult:
        """Generate `config.count` pairs under `request.out_dir` and write the manifest."""
        config = request.config
        out_dir = Path(request.out_dir)
        manifest_path = out_dir / MANIFEST_NAME
        if config.count <= 0:
            write_manifest(manifest_path, [])
            return CorpusResult(manifest_path=manifest_path, entries=[], skipped=[])

        clean_paths = tuple(read_file_list(request.clean_manifest))
        noise_paths = tuple(read_file_list(request.noise_manifest))
        if not clean_paths or not noise_paths:
            msg = f"no input audio: {len(clean_paths)} clean and {len(noise_paths)} noise files"
            raise CorpusError(msg)

        jobs = [
            _PairJob(
                index=i,
                seed=config.seed,
                clean_paths=clean_paths,
                noise_paths=noise_paths,
                config=config,
                out_dir=out_dir,
            )
            for i in range(config.count)
        ]
        entries: list[ManifestEntry] = []
        skipped: list[str] = []
        for outcome in tqdm(self._run(jobs, config.workers), total=len(jobs), desc="corpus", disable=None):
            if isinstance(outcome, str):
                logger.warning(outcome)
                skipped.append(outcome)
            else:
                entries.append(outcome)

        if not entries:
            msg = f"all {config.count} pairs were skipped, first reason: {skipped[0]}"
            raise CorpusError(msg)
        write_manifest(manifest_path, entries)
        n_validation = sum(e.split is Split.VALIDATION for e in entries)
        logger.info(
            "Wrote %d pairs (%d validation, %d skipped) to %s",
            len(entries),
            n_validation,
            len(skipped),
            manifest_path,
        )
        return CorpusResult(manifest_path=manifest_path, entries=entries, skipped=skipped)

    @staticmethod
    def _run(jobs: list[_PairJob], workers: int) -> Iterator[ManifestEntry | str]:
        if workers <= 1:
            yield from map(_build_pair, jobs)
            return
        with ProcessPoolExecutor(max_workers=min(workers, os.cpu_count() or 1)) as pool:
            yield from pool.map(_build_pair, jobs)


def build_corpus(
    clean_manifest: str | Path,
    noise_manifest: str | Path,
    count: int,
    seed: int,
    out_dir: str | Path,
    config: CorpusConfig | None = None,
) -> CorpusResult:
    """Generate a paired corpus. `count` and `seed` override `config`."""
    config = replace(config or CorpusConfig(), count=count, seed=seed)
    request = CorpusRequest(
        clean_manifest=Path(clean_manifest),
        noise_manifest=Path(noise_manifest),
        out_dir=Path(out_dir),
        config=config,
    )
    return CorpusBuilder().build(request)
