"""Shared fixtures: synthetic audio, tiny network configurations and a small corpus."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from dmnet.audio import write_wav
from dmnet.constants import SAMPLE_RATE
from dmnet.core import UtteranceId, Waveform
from dmnet.model.config import ModelConfig
from dmnet.simulation.corpus import CorpusConfig, CorpusResult, build_corpus
from dmnet.simulation.distortion import RecipeRanges
from dmnet.spectral import StftConfig
from dmnet.training.config import LossWeights, TrainConfig


def speech_like(seconds: float, seed: int = 0, level: float = 0.1) -> np.ndarray:
    """Broadband noise with a 4 Hz syllabic envelope and a few voiced harmonics."""
    rng = np.random.default_rng(seed)
    t = np.arange(round(seconds * SAMPLE_RATE)) / SAMPLE_RATE
    envelope = 0.55 + 0.45 * np.sin(2 * np.pi * 4.0 * t)
    voiced = sum(np.sin(2 * np.pi * 140.0 * k * t) / k for k in range(1, 8))
    x = envelope * (rng.standard_normal(t.size) + 0.5 * voiced)
    return (level * x / np.max(np.abs(x))).astype(np.float64)


def tone(freq_hz: float, seconds: float, amplitude: float = 0.5) -> np.ndarray:
    t = np.arange(round(seconds * SAMPLE_RATE)) / SAMPLE_RATE
    return amplitude * np.sin(2 * np.pi * freq_hz * t)


@pytest.fixture
def speech() -> Waveform:
    """One second of speech-like audio."""
    return Waveform(samples=speech_like(1.0), id=UtteranceId("p225_001"))


@pytest.fixture
def noise() -> Waveform:
    """White noise, longer than the speech fixture."""
    rng = np.random.default_rng(123)
    return Waveform(samples=0.05 * rng.standard_normal(24000), id=UtteranceId("noise"))


@pytest.fixture
def tiny_stft() -> StftConfig:
    return StftConfig(n_fft=64, hop=16, win_length=64)


@pytest.fixture
def tiny_model_cfg(tiny_stft: StftConfig) -> ModelConfig:
    """A network small enough to train for a few steps on a CPU."""
    return ModelConfig(
        channels=8,
        n_conformers=1,
        n_heads=2,
        dense_depth=1,
        ffn_multiplier=2,
        conv_kernel=3,
        stft=tiny_stft,
    )


@pytest.fixture
def tiny_train_cfg() -> TrainConfig:
    return TrainConfig(
        lr=1e-3,
        steps=3,
        batch_size=2,
        segment_s=0.25,
        checkpoint_every=2,
        log_every=1,
        validate_every=2,
        validation_utterances=1,
        loss_weights=LossWeights(),
    )


@pytest.fixture
def audio_dirs(tmp_path: Path) -> tuple[Path, Path]:
    """Clean speech (two training speakers, one validation speaker) and noise directories."""
    clean_dir = tmp_path / "clean_in"
    noise_dir = tmp_path / "noise_in"
    for i, name in enumerate(["p225_001", "p226_002", "p258_003"]):
        write_wav(clean_dir / f"{name}.wav", Waveform(samples=speech_like(0.75, seed=i)))
    rng = np.random.default_rng(99)
    for i in range(2):
        write_wav(noise_dir / f"noise_{i}.wav", Waveform(samples=0.05 * rng.standard_normal(20000)))
    return clean_dir, noise_dir


@pytest.fixture
def fast_ranges() -> RecipeRanges:
    """Recipe with short reverberation times, so room rendering stays quick."""
    return RecipeRanges(rt60_s=(0.3, 0.4))


@pytest.fixture
def corpus(tmp_path: Path, audio_dirs: tuple[Path, Path], fast_ranges: RecipeRanges) -> CorpusResult:
    """A six-pair corpus."""
    clean_dir, noise_dir = audio_dirs
    config = CorpusConfig(ranges=fast_ranges)
    return build_corpus(clean_dir, noise_dir, count=6, seed=7, out_dir=tmp_path / "corpus", config=config)
