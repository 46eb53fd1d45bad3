"""Conformer blocks and the two-stage (time, then frequency) conformer stack."""

from __future__ import annotations

import torch
from torch import nn


class FeedForward(nn.Module):
    """Pre-norm position-wise feed-forward module."""

    def __init__(self, dim: int, multiplier: int = 4, dropout: float = 0.0) -> None:
        super().__init__()
        self.net = nn.Sequential(
            nn.LayerNorm(dim),
            nn.Linear(dim, dim * multiplier),
            nn.SiLU(),
            nn.Dropout(dropout),
            nn.Linear(dim * multiplier, dim),
            nn.Dropout(dropout),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


class ConvModule(nn.Module):
    """Pointwise conv + GLU, depthwise conv, LayerNorm, SiLU, pointwise conv.

    LayerNorm replaces the usual batch norm so that items of a batch stay
    independent.
    """

    def __init__(self, dim: int, kernel_size: int = 31, dropout: float = 0.0) -> None:
        super().__init__()
        self.norm = nn.LayerNorm(dim)
        self.pointwise_in = nn.Conv1d(dim, 2 * dim, kernel_size=1)
        self.glu = nn.GLU(dim=1)
        self.depthwise = nn.Conv1d(dim, dim, kernel_size=kernel_size, padding=kernel_size // 2, groups=dim)
        self.depthwise_norm = nn.LayerNorm(dim)
        self.act = nn.SiLU()
        self.pointwise_out = nn.Conv1d(dim, dim, kernel_size=1)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, padding_mask: torch.Tensor | None = None) -> torch.Tensor:
        # x: (N, L, D); padding_mask: (N, L), True on padded positions
        y = self.glu(self.pointwise_in(self.norm(x).transpose(1, 2)))
        if padding_mask is not None:
            y = y.masked_fill(padding_mask[:, None, :], 0.0)
        y = self.depthwise(y)
        y = self.act(self.depthwise_norm(y.transpose(1, 2))).transpose(1, 2)
        return self.dropout(self.pointwise_out(y).transpose(1, 2))


class ConformerBlock(nn.Module):
    """Macaron conformer block: half FFN, self-attention, convolution, half FFN, LayerNorm."""

    def __init__(
        self,
        dim: int,
        n_heads: int = 4,
        ffn_multiplier: int = 4,
        kernel_size: int = 31,
        dropout: float = 0.0,
    ) -> None:
        super().__init__()
        self.ffn_in = FeedForward(dim, ffn_multiplier, dropout)
        self.attn_norm = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, n_heads, dropout=dropout, batch_first=True)
        self.attn_dropout = nn.Dropout(dropout)
        self.conv = ConvModule(dim, kernel_size, dropout)
        self.ffn_out = FeedForward(dim, ffn_multiplier, dropout)
        self.out_norm = nn.LayerNorm(dim)

    def forward(self, x: torch.Tensor, padding_mask: torch.Tensor | None = None) -> torch.Tensor:
        x = x + 0.5 * self.ffn_in(x)
        q = self.attn_norm(x)
        attended, _ = self.attn(q, q, q, key_padding_mask=padding_mask, need_weights=False)
        x = x + self.attn_dropout(attended)
        x = x + self.conv(x, padding_mask)
        x = x + 0.5 * self.ffn_out(x)
        return self.out_norm(x)


class TSConformer(nn.Module):
    """A conformer over time for every bin, then over frequency for every frame, each with a residual."""

    def __init__(
        self,
        dim: int,
        n_heads: int = 4,
        ffn_multiplier: int = 4,
        kernel_size: int = 31,
        dropout: float = 0.0,
    ) -> None:
        super().__init__()
        self.time = ConformerBlock(dim, n_heads, ffn_multiplier, kernel_size, dropout)
        self.freq = ConformerBlock(dim, n_heads, ffn_multiplier, kernel_size, dropout)

    def forward(self, x: torch.Tensor, frame_mask: torch.Tensor | None = None) -> torch.Tensor:
        # x: (B, C, T, F); frame_mask: (B, T), True on padded frames
        b, c, t, f = x.shape
        seq = x.permute(0, 3, 2, 1).reshape(b * f, t, c)
        mask = frame_mask.repeat_interleave(f, dim=0) if frame_mask is not None else None
        seq = self.time(seq, mask) + seq
        seq = seq.reshape(b, f, t, c).permute(0, 2, 1, 3).reshape(b * t, f, c)
        seq = self.freq(seq) + seq
        return seq.reshape(b, t, f, c).permute(0, 3, 1, 2)


class TSConformerStack(nn.Module):
    """`n` two-stage conformer blocks applied in sequence; shape preserving."""

    def __init__(
        self,
        n: int,
        dim: int,
        n_heads: int = 4,
        ffn_multiplier: int = 4,
        kernel_size: int = 31,
        dropout: float = 0.0,
    ) -> None:
        super().__init__()
        self.blocks = nn.ModuleList(TSConformer(dim, n_heads, ffn_multiplier, kernel_size, dropout) for _ in range(n))

    def forward(self, x: torch.Tensor, frame_mask: torch.Tensor | None = None) -> torch.Tensor:
        for block in self.blocks:
            x = block(x, frame_mask)
        return x
