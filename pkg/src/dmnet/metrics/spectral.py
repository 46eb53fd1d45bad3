"""Log-spectral distance."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from scipy.signal import stft as scipy_stft

from dmnet.constants import LSD_EPS, LSD_HOP, LSD_N_FFT, SAMPLE_RATE
from dmnet.core import Decibels
from dmnet.errors import EnergyError, LengthError, ShapeError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray


def power_spectrogram(
    x: ArrayLike,
    n_fft: int = LSD_N_FFT,
    hop: int = LSD_HOP,
    sample_rate: int = SAMPLE_RATE,
) -> NDArray[np.float64]:
    """Hann-windowed power spectrogram with layout (F, T)."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < n_fft:
        msg = f"signal of {x.size} samples is shorter than the {n_fft}-point analysis frame"
        raise LengthError(msg)
    _, _, spec = scipy_stft(x, fs=sample_rate, window="hann", nperseg=n_fft, noverlap=n_fft - hop)
    return np.abs(spec) ** 2


def lsd_from_power(ref_power: ArrayLike, est_power: ArrayLike, eps: float = LSD_EPS) -> Decibels:
    """LSD between two power spectrograms of layout (F, T)."""
    ref_power = np.asarray(ref_power, dtype=np.float64)
    est_power = np.asarray(est_power, dtype=np.float64)
    if ref_power.shape != est_power.shape:
        msg = f"power spectrograms {ref_power.shape} and {est_power.shape} differ"
        raise ShapeError(msg)
    log_ratio = 10.0 * np.log10((ref_power + eps) / (est_power + eps))
    per_frame = np.sqrt(np.mean(log_ratio**2, axis=0))
    return Decibels(float(np.mean(per_frame)))


def lsd(ref: ArrayLike, est: ArrayLike, n_fft: int = LSD_N_FFT, hop: int = LSD_HOP) -> Decibels:
    """Log-spectral distance between two waveforms, in dB.

    Per frame, the root mean square over frequency of the dB difference of the
    power spectra, averaged over frames. Zero for identical inputs.
    """
    ref = np.asarray(ref, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    if ref.shape != est.shape:
        msg = f"reference has {ref.shape[0]} samples, estimate {est.shape[0]}"
        raise LengthError(msg)
    if not np.any(ref):
        msg = "reference is silent, LSD is degenerate"
        raise EnergyError(msg)
    return lsd_from_power(power_spectrogram(ref, n_fft, hop), power_spectrogram(est, n_fft, hop))
