"""Magnitude and phase decoders."""

from __future__ import annotations

import math

import torch
from torch import nn

from .layers import DenseDilatedBlock, FrequencyUpsample


class MagnitudeDecoder(nn.Module):
    """Decoder body producing the pre-activation magnitude U of shape (B, T, F).

    The masking and mapping heads are activations applied to U; when both
    paths share this body, one forward pass serves both.
    """

    def __init__(self, channels: int, n_bins: int, depth: int = 2) -> None:
        super().__init__()
        self.dense = DenseDilatedBlock(channels, depth)
        self.upsample = FrequencyUpsample(channels, n_bins)
        self.project = nn.Conv2d(channels, 1, kernel_size=(1, 1))

    def forward(self, latent: torch.Tensor) -> torch.Tensor:
        return self.project(self.upsample(self.dense(latent))).squeeze(1)


def phase_from_parts(real: torch.Tensor, imag: torch.Tensor) -> torch.Tensor:
    """atan2 of the pseudo-imaginary over the pseudo-real part, in (-pi, pi]."""
    phase = torch.atan2(imag, real)
    return torch.where(phase <= -math.pi, phase + 2.0 * math.pi, phase)


class PhaseDecoder(nn.Module):
    """Decoder with two linear heads whose atan2 is the phase, shape (B, T, F)."""

    def __init__(self, channels: int, n_bins: int, depth: int = 2) -> None:
        super().__init__()
        self.dense = DenseDilatedBlock(channels, depth)
        self.upsample = FrequencyUpsample(channels, n_bins)
        self.real = nn.Conv2d(channels, 1, kernel_size=(1, 1))
        self.imag = nn.Conv2d(channels, 1, kernel_size=(1, 1))

    def forward(self, latent: torch.Tensor) -> torch.Tensor:
        x = self.upsample(self.dense(latent))
        return phase_from_parts(self.real(x).squeeze(1), self.imag(x).squeeze(1))
