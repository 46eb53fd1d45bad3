"""Additive noise at a target signal-to-noise ratio."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np

from dmnet.core import Waveform
from dmnet.errors import EnergyError, LengthError
from dmnet.metrics.measures import active_level

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray


def tile_noise(noise: ArrayLike, length: int) -> NDArray[np.float64]:
    """Repeat a noise recording until it covers `length` samples."""
    noise = np.asarray(noise, dtype=np.float64)
    if noise.size == 0:
        msg = "noise recording is empty"
        raise LengthError(msg)
    if noise.size >= length:
        return noise
    return np.tile(noise, math.ceil(length / noise.size))


def crop_noise(noise: ArrayLike, length: int, rng: np.random.Generator | None = None) -> tuple[NDArray[np.float64], int]:
    """Random `length`-sample excerpt of `noise` and its offset."""
    noise = np.asarray(noise, dtype=np.float64)
    if noise.size < length:
        msg = f"noise has {noise.size} samples, need at least {length}"
        raise LengthError(msg)
    span = noise.size - length
    offset = int(rng.integers(span + 1)) if rng is not None and span > 0 else 0
    return noise[offset : offset + length], offset


def noise_gain_for_snr(clean: ArrayLike, noise: ArrayLike, snr_db: float) -> float:
    """Gain on `noise` that puts it `snr_db` below the active level of `clean`."""
    noise_power = float(np.mean(np.asarray(noise, dtype=np.float64) ** 2))
    if noise_power == 0.0:
        msg = "noise is silent, cannot reach a finite SNR"
        raise EnergyError(msg)
    return math.sqrt(active_level(clean) / (noise_power * 10.0 ** (snr_db / 10.0)))


def mix_samples(
    clean: ArrayLike,
    noise: ArrayLike,
    snr_db: float,
    rng: np.random.Generator | None = None,
) -> tuple[NDArray[np.float64], float, int]:
    """Array form of `mix_at_snr`, also returning the noise offset."""
    clean = np.asarray(clean, dtype=np.float64)
    excerpt, offset = crop_noise(noise, clean.size, rng)
    gain = noise_gain_for_snr(clean, excerpt, snr_db)
    return clean + gain * excerpt, gain, offset


def mix_at_snr(
    clean: Waveform,
    noise: Waveform,
    snr_db: float,
    rng: np.random.Generator | None = None,
) -> tuple[Waveform, float]:
    """Add a random excerpt of `noise` to `clean` at `snr_db`.

    The SNR is defined against the active speech level of `clean`. A noise
    recording longer than `clean` is cropped at an offset drawn from `rng`
    (offset 0 without one).
    """
    mixture, gain, _ = mix_samples(clean.samples, noise.samples, snr_db, rng)
    return clean.with_samples(mixture), gain
