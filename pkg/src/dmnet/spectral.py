"""STFT analysis/synthesis, magnitude compression and phase wrapping.

All functions operate on torch tensors with the time axis last for waveforms
and a trailing (frames, bins) layout for spectrograms. Computation follows the
input dtype: float32 for the model path, float64 for reference checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import overload

import numpy as np
import torch
from scipy.signal import check_COLA, get_window

from .constants import DEFAULT_COMPRESS_EXPONENT, DEFAULT_HOP, DEFAULT_N_FFT, DEFAULT_WIN_LENGTH, TWO_PI
from .core import Waveform, WindowKind
from .errors import ConfigurationError, DomainError, LengthError, ShapeError


@dataclass(frozen=True, slots=True)
class StftConfig:
    """STFT parameters and the power-law magnitude compression."""

    n_fft: int = DEFAULT_N_FFT
    hop: int = DEFAULT_HOP
    win_length: int = DEFAULT_WIN_LENGTH
    window: WindowKind = WindowKind.HANN
    compress_exponent: float = DEFAULT_COMPRESS_EXPONENT

    def __post_init__(self) -> None:
        """Validate sizes, exponent and the constant overlap-add condition."""
        if not 0 < self.hop <= self.win_length <= self.n_fft:
            msg = f"need 0 < hop <= win_length <= n_fft, got {self.hop}, {self.win_length}, {self.n_fft}"
            raise ConfigurationError(msg)
        if not 0.0 < self.compress_exponent <= 1.0:
            msg = f"compress_exponent must lie in (0, 1], got {self.compress_exponent}"
            raise ConfigurationError(msg)
        if not check_COLA(self.window_array(), self.win_length, self.win_length - self.hop):
            msg = f"{self.window.value} window of {self.win_length} with hop {self.hop} violates COLA"
            raise ConfigurationError(msg)

    @property
    def n_bins(self) -> int:
        """Number of one-sided frequency bins."""
        return self.n_fft // 2 + 1

    def window_array(self) -> np.ndarray:
        """Periodic analysis window as a float64 array."""
        return np.asarray(get_window(self.window.scipy_name, self.win_length, fftbins=True), dtype=np.float64)

    def window_tensor(self, dtype: torch.dtype, device: torch.device | None = None) -> torch.Tensor:
        """Analysis window as a tensor."""
        return torch.as_tensor(self.window_array(), dtype=dtype, device=device)

    def n_frames(self, length: int) -> int:
        """Number of frames produced for a signal of `length` samples."""
        return 1 + length // self.hop


@dataclass(frozen=True)
class SpectroTriple:
    """Compressed magnitude, wrapped phase and the complex view of one signal."""

    magnitude: torch.Tensor  # (..., T, F), compressed, >= 0
    phase: torch.Tensor  # (..., T, F), in (-pi, pi]
    compress_exponent: float = DEFAULT_COMPRESS_EXPONENT

    def __post_init__(self) -> None:
        """Check that magnitude and phase agree in shape."""
        if self.magnitude.shape != self.phase.shape:
            msg = f"magnitude {tuple(self.magnitude.shape)} and phase {tuple(self.phase.shape)} differ"
            raise ShapeError(msg)

    @property
    def frames(self) -> int:
        """Number of frames T."""
        return int(self.magnitude.shape[-2])

    @property
    def bins(self) -> int:
        """Number of bins F."""
        return int(self.magnitude.shape[-1])

    @property
    def complex(self) -> torch.Tensor:
        """Uncompressed complex spectrogram."""
        return decompress_mag(self.magnitude, self.compress_exponent) * torch.exp(1j * self.phase)

    @classmethod
    def from_complex(cls, spec: torch.Tensor, compress_exponent: float = DEFAULT_COMPRESS_EXPONENT) -> SpectroTriple:
        """Split a complex spectrogram into compressed magnitude and wrapped phase."""
        linear = spec.abs()
        phase = torch.angle(spec)
        # angle of 0 is undefined; -pi is folded onto pi
        phase = torch.where(linear == 0, torch.zeros_like(phase), phase)
        phase = torch.where(phase <= -math.pi, phase + TWO_PI, phase)
        return cls(magnitude=compress_mag(linear, compress_exponent), phase=phase, compress_exponent=compress_exponent)


def _as_tensor(x: Waveform | torch.Tensor | np.ndarray) -> torch.Tensor:
    if isinstance(x, Waveform):
        return torch.from_numpy(np.ascontiguousarray(x.samples))
    if isinstance(x, np.ndarray):
        return torch.from_numpy(np.ascontiguousarray(x))
    return x


def complex_stft(x: Waveform | torch.Tensor | np.ndarray, cfg: StftConfig) -> torch.Tensor:
    """Uncompressed complex STFT with layout (..., T, F)."""
    samples = _as_tensor(x)
    if samples.shape[-1] < cfg.win_length:
        msg = f"signal of {samples.shape[-1]} samples is shorter than the {cfg.win_length}-sample window"
        raise LengthError(msg)
    lead = samples.shape[:-1]
    flat = samples.reshape(-1, samples.shape[-1])
    spec = torch.stft(
        flat,
        n_fft=cfg.n_fft,
        hop_length=cfg.hop,
        win_length=cfg.win_length,
        window=cfg.window_tensor(flat.dtype, flat.device),
        center=True,
        pad_mode="constant",
        normalized=False,
        onesided=True,
        return_complex=True,
    )
    spec = spec.transpose(-1, -2)
    return spec.reshape(*lead, *spec.shape[-2:])


def complex_istft(spec: torch.Tensor, cfg: StftConfig, length: int) -> torch.Tensor:
    """Overlap-add synthesis of a (..., T, F) complex spectrogram."""
    if spec.shape[-1] != cfg.n_bins:
        msg = f"spectrogram has {spec.shape[-1]} bins, configuration expects {cfg.n_bins}"
        raise ShapeError(msg)
    frames = spec.shape[-2]
    if length > frames * cfg.hop + cfg.win_length:
        msg = f"cannot synthesize {length} samples from {frames} frames"
        raise LengthError(msg)
    lead = spec.shape[:-2]
    flat = spec.reshape(-1, *spec.shape[-2:]).transpose(-1, -2)
    real_dtype = flat.real.dtype
    out = torch.istft(
        flat,
        n_fft=cfg.n_fft,
        hop_length=cfg.hop,
        win_length=cfg.win_length,
        window=cfg.window_tensor(real_dtype, flat.device),
        center=True,
        normalized=False,
        onesided=True,
        length=length,
    )
    return out.reshape(*lead, length)


def stft(x: Waveform | torch.Tensor | np.ndarray, cfg: StftConfig) -> SpectroTriple:
    """Analyze a waveform into its compressed magnitude and wrapped phase."""
    return SpectroTriple.from_complex(complex_stft(x, cfg), cfg.compress_exponent)


def istft(s: SpectroTriple, cfg: StftConfig, length: int) -> torch.Tensor:
    """Synthesize a waveform of `length` samples from a spectro triple."""
    return complex_istft(s.complex, cfg, length)


def compress_mag(linear_mag: torch.Tensor, exponent: float) -> torch.Tensor:
    """Power-law compression of a non-negative magnitude."""
    if bool((linear_mag < 0).any()):
        msg = "magnitude compression needs non-negative input"
        raise DomainError(msg)
    return linear_mag.pow(exponent)


def decompress_mag(mag: torch.Tensor, exponent: float) -> torch.Tensor:
    """Inverse of `compress_mag`."""
    if bool((mag < 0).any()):
        msg = "magnitude decompression needs non-negative input"
        raise DomainError(msg)
    return mag.pow(1.0 / exponent)


@overload
def wrap_phase(theta: float) -> float: ...


@overload
def wrap_phase(theta: torch.Tensor) -> torch.Tensor: ...


def wrap_phase(theta: float | torch.Tensor) -> float | torch.Tensor:
    """Wrap an angle into (-pi, pi]."""
    if isinstance(theta, torch.Tensor):
        if not bool(torch.isfinite(theta).all()):
            msg = "cannot wrap non-finite phase"
            raise DomainError(msg)
        return theta - TWO_PI * torch.ceil((theta - math.pi) / TWO_PI)
    if not math.isfinite(theta):
        msg = f"cannot wrap non-finite phase {theta}"
        raise DomainError(msg)
    return theta - TWO_PI * math.ceil((theta - math.pi) / TWO_PI)
