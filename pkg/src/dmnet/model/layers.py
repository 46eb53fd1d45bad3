"""Convolutional building blocks shared by the encoder and decoders.

Feature maps use the layout (batch, channels, frames, bins).
"""

from __future__ import annotations

import torch
from torch import nn


class DenseDilatedBlock(nn.Module):
    """Densely connected 3x3 convolutions with time dilation 1, 2, 4, ..."""

    def __init__(self, channels: int, depth: int = 2) -> None:
        super().__init__()
        self.layers = nn.ModuleList(
            nn.Sequential(
                nn.Conv2d(
                    channels * (i + 1),
                    channels,
                    kernel_size=(3, 3),
                    dilation=(2**i, 1),
                    padding=(2**i, 1),
                ),
                nn.InstanceNorm2d(channels, affine=True),
                nn.PReLU(channels),
            )
            for i in range(depth)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skip = x
        for layer in self.layers:
            x = layer(skip)
            skip = torch.cat([x, skip], dim=1)
        return x


class Encoder(nn.Module):
    """Two-channel (magnitude, phase) input to a C-channel latent with F' = ceil(F / 2)."""

    def __init__(self, channels: int, depth: int = 2) -> None:
        super().__init__()
        self.input_conv = nn.Sequential(
            nn.Conv2d(2, channels, kernel_size=(1, 1)),
            nn.InstanceNorm2d(channels, affine=True),
            nn.PReLU(channels),
        )
        self.dense = DenseDilatedBlock(channels, depth)
        self.downsample = nn.Sequential(
            nn.Conv2d(channels, channels, kernel_size=(1, 3), stride=(1, 2), padding=(0, 1)),
            nn.InstanceNorm2d(channels, affine=True),
            nn.PReLU(channels),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.downsample(self.dense(self.input_conv(x)))


class FrequencyUpsample(nn.Module):
    """Transposed convolution from F' back to exactly F bins."""

    def __init__(self, channels: int, n_bins: int) -> None:
        super().__init__()
        self.conv = nn.ConvTranspose2d(
            channels,
            channels,
            kernel_size=(1, 3),
            stride=(1, 2),
            padding=(0, 1),
            output_padding=(0, 1 - n_bins % 2),
        )
        self.norm = nn.InstanceNorm2d(channels, affine=True)
        self.act = nn.PReLU(channels)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.act(self.norm(self.conv(x)))


class LearnableSigmoid(nn.Module):
    """beta * sigmoid(k_f * u) with one learnable slope per frequency bin."""

    def __init__(self, n_bins: int, beta: float = 2.0) -> None:
        super().__init__()
        self.beta = beta
        self.slope = nn.Parameter(torch.ones(n_bins))

    def forward(self, u: torch.Tensor) -> torch.Tensor:
        # u: (..., F)
        return self.beta * torch.sigmoid(self.slope * u)
