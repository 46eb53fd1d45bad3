"""The dual-path magnitude network and its variants."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import torch
from torch import nn

from dmnet.core import Variant
from dmnet.errors import ConfigurationError, ShapeError
from dmnet.spectral import SpectroTriple, decompress_mag

from .config import ModelConfig
from .conformer import TSConformerStack
from .decoders import MagnitudeDecoder, PhaseDecoder
from .layers import Encoder, LearnableSigmoid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelOutput:
    """Compressed-domain magnitudes of both paths, the fused magnitude and the phase.

    Tensors have shape (B, T, F), or (T, F) for an unbatched input. A path the
    variant does not compute is `None`.
    """

    mag_mask_path: torch.Tensor | None
    mag_map_path: torch.Tensor | None
    mag_final: torch.Tensor
    phase: torch.Tensor
    alpha_value: float | None = None

    def complex(self, compress_exponent: float) -> torch.Tensor:
        """Uncompressed complex spectrogram of the restored signal."""
        return decompress_mag(self.mag_final, compress_exponent) * torch.exp(1j * self.phase)


def fuse(
    mask_out: torch.Tensor | None,
    map_out: torch.Tensor | None,
    variant: Variant,
    omega: float | None = None,
    alpha: torch.Tensor | float | None = None,
    input_mag: torch.Tensor | None = None,
) -> torch.Tensor:
    """Combine the magnitude paths as the variant prescribes.

    S1 returns the masking path; S2 the mapping path plus the input magnitude;
    U1 and DM1 the omega-weighted blend; DM2 the mapping path plus alpha times
    the masking path, floored at zero.
    """
    if variant.has_mask_path and mask_out is None:
        msg = f"variant {variant.value} needs the masking path"
        raise ConfigurationError(msg)
    if variant.has_map_path and map_out is None:
        msg = f"variant {variant.value} needs the mapping path"
        raise ConfigurationError(msg)

    match variant:
        case Variant.S1:
            assert mask_out is not None
            return mask_out
        case Variant.S2:
            assert map_out is not None
            if input_mag is None:
                msg = "variant s2 adds the input magnitude and needs it"
                raise ConfigurationError(msg)
            return map_out + input_mag
        case Variant.U1 | Variant.DM1:
            assert mask_out is not None
            assert map_out is not None
            if omega is None or not 0.0 <= omega <= 1.0:
                msg = f"omega must lie in [0, 1], got {omega}"
                raise ConfigurationError(msg)
            return omega * mask_out + (1.0 - omega) * map_out
        case Variant.DM2:
            assert mask_out is not None
            assert map_out is not None
            if alpha is None:
                msg = "variant dm2 needs alpha"
                raise ConfigurationError(msg)
            return torch.clamp(map_out + alpha * mask_out, min=0.0)


def frame_padding_mask(frame_lengths: torch.Tensor, frames: int) -> torch.Tensor:
    """(B, T) mask, True on frames at or beyond each item's length."""
    positions = torch.arange(frames, device=frame_lengths.device)
    return positions[None, :] >= frame_lengths[:, None]


class DMNet(nn.Module):
    """Encoder, TS-Conformer stack, magnitude decoder(s), phase decoder and fusion.

    S1, DM1 and DM2 own one magnitude decoder body plus the learnable-sigmoid
    slopes of the masking head; DM2 adds the scalar alpha. S2 owns the body
    without slopes. U1 owns a second, independent body for the mapping path.
    """

    def __init__(self, cfg: ModelConfig) -> None:
        super().__init__()
        self.cfg = cfg
        variant = cfg.variant
        self.encoder = Encoder(cfg.channels, cfg.dense_depth)
        self.conformers = TSConformerStack(
            cfg.n_conformers,
            cfg.channels,
            cfg.n_heads,
            cfg.ffn_multiplier,
            cfg.conv_kernel,
            cfg.dropout,
        )
        self.magnitude_decoder = MagnitudeDecoder(cfg.channels, cfg.n_bins, cfg.dense_depth)
        self.mask_activation = LearnableSigmoid(cfg.n_bins, cfg.lsigmoid_beta) if variant.has_mask_path else None
        self.map_decoder = (
            MagnitudeDecoder(cfg.channels, cfg.n_bins, cfg.dense_depth) if variant is Variant.U1 else None
        )
        self.phase_decoder = PhaseDecoder(cfg.channels, cfg.n_bins, cfg.dense_depth)
        self.alpha: nn.Parameter | None
        alpha = None
        if variant is Variant.DM2:
            alpha = nn.Parameter(torch.tensor(float(cfg.alpha_init)), requires_grad=not cfg.freeze_alpha)
        self.register_parameter("alpha", alpha)

    @property
    def variant(self) -> Variant:
        """Architecture variant."""
        return self.cfg.variant

    @property
    def alpha_value(self) -> float | None:
        """Current alpha, DM2 only."""
        return float(self.alpha.detach()) if self.alpha is not None else None

    def freeze_alpha(self, value: float | None = None) -> None:
        """Stop alpha from training, optionally setting it first."""
        if self.alpha is None:
            msg = f"variant {self.variant.value} has no alpha"
            raise ConfigurationError(msg)
        with torch.no_grad():
            if value is not None:
                self.alpha.fill_(value)
        self.alpha.requires_grad_(False)

    def encode(self, magnitude: torch.Tensor, phase: torch.Tensor) -> torch.Tensor:
        """Stack magnitude and phase (B, T, F) and encode to (B, C, T, F')."""
        if magnitude.shape != phase.shape:
            msg = f"magnitude {tuple(magnitude.shape)} and phase {tuple(phase.shape)} differ"
            raise ShapeError(msg)
        if magnitude.shape[-1] != self.cfg.n_bins:
            msg = f"input has {magnitude.shape[-1]} bins, model expects {self.cfg.n_bins}"
            raise ShapeError(msg)
        return self.encoder(torch.stack([magnitude, phase], dim=1))

    def ts_conformer_stack(self, latent: torch.Tensor, frame_lengths: torch.Tensor | None = None) -> torch.Tensor:
        """Refine the latent along time and frequency. Padded frames are masked out of attention."""
        mask = frame_padding_mask(frame_lengths, latent.shape[2]) if frame_lengths is not None else None
        return self.conformers(latent, mask)

    def decode_magnitude(
        self,
        latent: torch.Tensor,
        input_mag: torch.Tensor,
    ) -> tuple[torch.Tensor | None, torch.Tensor | None]:
        """Masking-path and mapping-path magnitudes, `None` where the variant has no such path."""
        u = self.magnitude_decoder(latent)
        mask_out = input_mag * self.mask_activation(u) if self.mask_activation is not None else None
        if not self.variant.has_map_path:
            return mask_out, None
        map_u = self.map_decoder(latent) if self.map_decoder is not None else u
        return mask_out, torch.relu(map_u)

    def decode_phase(self, latent: torch.Tensor) -> torch.Tensor:
        """Phase in (-pi, pi] of shape (B, T, F)."""
        return self.phase_decoder(latent)

    def fuse(
        self,
        mask_out: torch.Tensor | None,
        map_out: torch.Tensor | None,
        input_mag: torch.Tensor | None = None,
    ) -> torch.Tensor:
        """Final magnitude of this network's variant."""
        return fuse(mask_out, map_out, self.variant, self.cfg.resolved_omega, self.alpha, input_mag)

    def forward(self, s: SpectroTriple, frame_lengths: torch.Tensor | None = None) -> ModelOutput:
        """Restore a (B, T, F) or (T, F) spectro triple."""
        magnitude, phase = s.magnitude, s.phase
        unbatched = magnitude.dim() == 2
        if unbatched:
            magnitude, phase = magnitude.unsqueeze(0), phase.unsqueeze(0)

        latent = self.ts_conformer_stack(self.encode(magnitude, phase), frame_lengths)
        mask_out, map_out = self.decode_magnitude(latent, magnitude)
        mag_final = self.fuse(mask_out, map_out, magnitude)
        out_phase = self.decode_phase(latent)

        if unbatched:
            mask_out = mask_out.squeeze(0) if mask_out is not None else None
            map_out = map_out.squeeze(0) if map_out is not None else None
            mag_final, out_phase = mag_final.squeeze(0), out_phase.squeeze(0)
        return ModelOutput(
            mag_mask_path=mask_out,
            mag_map_path=map_out,
            mag_final=mag_final,
            phase=out_phase,
            alpha_value=self.alpha_value,
        )

    def num_parameters(self) -> int:
        """Number of learnable scalars, frozen ones included."""
        return sum(p.numel() for p in self.parameters())


def count_parameters(cfg: ModelConfig) -> int:
    """Exact parameter count of the network `cfg` describes."""
    return DMNet(cfg).num_parameters()
