"""Training losses on magnitude, phase, complex spectrum, waveform and STFT consistency."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import torch
import torch.nn.functional as F

from dmnet.constants import TWO_PI
from dmnet.errors import ShapeError
from dmnet.spectral import complex_istft, complex_stft

if TYPE_CHECKING:
    from dmnet.model.network import ModelOutput
    from dmnet.spectral import SpectroTriple, StftConfig

    from .config import LossWeights


def _check_shapes(pred: torch.Tensor, target: torch.Tensor) -> None:
    if pred.shape != target.shape:
        msg = f"prediction {tuple(pred.shape)} and target {tuple(target.shape)} differ"
        raise ShapeError(msg)


def _mean(values: torch.Tensor, mask: torch.Tensor | None) -> torch.Tensor:
    """Mean of `values`, restricted to positions where the broadcast `mask` is True."""
    if mask is None:
        return values.mean()
    weights = mask.to(values.dtype).expand_as(values)
    return (values * weights).sum() / weights.sum().clamp_min(1.0)


def valid_frames(sample_lengths: torch.Tensor, hop: int, frames: int) -> torch.Tensor:
    """(B, T) mask, True on the frames of each item that lie within its unpadded length."""
    positions = torch.arange(frames, device=sample_lengths.device)
    return positions[None, :] < (1 + sample_lengths // hop)[:, None]


def valid_samples(sample_lengths: torch.Tensor, samples: int) -> torch.Tensor:
    """(B, L) mask, True before each item's length."""
    positions = torch.arange(samples, device=sample_lengths.device)
    return positions[None, :] < sample_lengths[:, None]


def anti_wrap(x: torch.Tensor) -> torch.Tensor:
    """Distance of an angle to the nearest multiple of 2 pi, in [0, pi]."""
    return torch.abs(x - TWO_PI * torch.round(x / TWO_PI))


def loss_magnitude(pred_mag: torch.Tensor, target_mag: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
    """Mean squared error of compressed magnitudes, over the frames `mask` keeps."""
    _check_shapes(pred_mag, target_mag)
    if mask is None:
        return F.mse_loss(pred_mag, target_mag)
    return _mean((pred_mag - target_mag) ** 2, mask[..., None])


def phase_loss_terms(
    pred_phase: torch.Tensor,
    target_phase: torch.Tensor,
    mask: torch.Tensor | None = None,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Instantaneous phase, group delay and instantaneous frequency terms.

    Group delay differences along frequency (last axis), instantaneous
    frequency along time (second to last). With a (B, T) frame `mask`, a time
    difference counts only when both of its frames are kept.
    """
    _check_shapes(pred_phase, target_phase)
    frame_mask = mask[..., None] if mask is not None else None
    pair_mask = (mask[..., 1:] & mask[..., :-1])[..., None] if mask is not None else None
    ip = _mean(anti_wrap(target_phase - pred_phase), frame_mask)
    gd = _mean(anti_wrap(torch.diff(target_phase, dim=-1) - torch.diff(pred_phase, dim=-1)), frame_mask)
    iaf = _mean(anti_wrap(torch.diff(target_phase, dim=-2) - torch.diff(pred_phase, dim=-2)), pair_mask)
    return ip, gd, iaf


def loss_phase_antiwrap(
    pred_phase: torch.Tensor,
    target_phase: torch.Tensor,
    mask: torch.Tensor | None = None,
) -> torch.Tensor:
    """Sum of the three anti-wrapped phase terms."""
    ip, gd, iaf = phase_loss_terms(pred_phase, target_phase, mask)
    return ip + gd + iaf


def _complex_mse(pred: torch.Tensor, target: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
    if mask is None:
        return F.mse_loss(torch.view_as_real(pred), torch.view_as_real(target)) * 2.0
    return _mean(torch.view_as_real(pred - target).pow(2).sum(-1), mask[..., None])


def loss_complex(
    pred_spec: torch.Tensor,
    target_spec: torch.Tensor,
    mask: torch.Tensor | None = None,
) -> torch.Tensor:
    """Mean over bins of |pred - target|^2 for complex spectrograms (real and imaginary MSE summed)."""
    _check_shapes(pred_spec, target_spec)
    return _complex_mse(pred_spec, target_spec, mask)


def loss_time(pred_wav: torch.Tensor, target_wav: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
    """Mean absolute waveform error over the samples `mask` keeps."""
    _check_shapes(pred_wav, target_wav)
    if mask is None:
        return F.l1_loss(pred_wav, target_wav)
    return _mean((pred_wav - target_wav).abs(), mask)


def loss_consistency(
    pred_spec: torch.Tensor,
    cfg: StftConfig,
    length: int,
    mask: torch.Tensor | None = None,
) -> torch.Tensor:
    """Distance between a complex spectrogram and the STFT of its own resynthesis."""
    reanalyzed = complex_stft(complex_istft(pred_spec, cfg, length), cfg)
    _check_shapes(pred_spec, reanalyzed)
    return _complex_mse(pred_spec, reanalyzed, mask)


@dataclass(frozen=True)
class LossBreakdown:
    """Weighted total and the unweighted components that entered it."""

    total: torch.Tensor
    components: dict[str, float]


def compute_losses(
    output: ModelOutput,
    target: SpectroTriple,
    target_wav: torch.Tensor,
    cfg: StftConfig,
    weights: LossWeights,
    sample_lengths: torch.Tensor | None = None,
) -> LossBreakdown:
    """Weighted sum of the loss components with non-zero weight.

    With `sample_lengths` (one per batch item), zero padding past each length
    is left out of every term.
    """
    length = int(target_wav.shape[-1])
    frames = target.magnitude.shape[-2]
    mask = valid_frames(sample_lengths, cfg.hop, frames) if sample_lengths is not None else None
    terms: dict[str, torch.Tensor] = {"magnitude": loss_magnitude(output.mag_final, target.magnitude, mask)}
    if weights.phase:
        terms["phase"] = loss_phase_antiwrap(output.phase, target.phase, mask)
    if weights.complex or weights.time or weights.consistency:
        pred_spec = output.complex(cfg.compress_exponent)
        if weights.complex:
            terms["complex"] = loss_complex(pred_spec, target.complex, mask)
        if weights.time:
            sample_mask = valid_samples(sample_lengths, length) if sample_lengths is not None else None
            terms["time"] = loss_time(complex_istft(pred_spec, cfg, length), target_wav, sample_mask)
        if weights.consistency:
            terms["consistency"] = loss_consistency(pred_spec, cfg, length, mask)
    total = weights.magnitude * terms["magnitude"]
    for name, value in terms.items():
        if name != "magnitude":
            total = total + getattr(weights, name) * value
    return LossBreakdown(total=total, components={name: float(value.detach()) for name, value in terms.items()})
