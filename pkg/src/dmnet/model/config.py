"""Architecture hyperparameters."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

from dmnet.constants import DEFAULT_ALPHA_INIT, DEFAULT_OMEGA, LSIGMOID_BETA
from dmnet.core import Variant, WindowKind
from dmnet.errors import ConfigurationError
from dmnet.spectral import StftConfig


@dataclass(frozen=True, slots=True)
class ModelConfig:
    """Hyperparameters of the restoration network.

    `omega` is only read by U1 and DM1 (default 0.5); DM2 always fuses with
    omega fixed to 0 and S1/S2 have a single path.
    """

    variant: Variant = Variant.DM2
    channels: int = 48
    n_conformers: int = 4
    n_heads: int = 4
    dense_depth: int = 2
    ffn_multiplier: int = 4
    conv_kernel: int = 31
    dropout: float = 0.0
    omega: float = DEFAULT_OMEGA
    alpha_init: float = DEFAULT_ALPHA_INIT
    freeze_alpha: bool = False
    lsigmoid_beta: float = LSIGMOID_BETA
    stft: StftConfig = field(default_factory=StftConfig)

    def __post_init__(self) -> None:
        """Check sizes and ranges."""
        for name in ("channels", "n_conformers", "n_heads", "dense_depth", "ffn_multiplier", "conv_kernel"):
            if getattr(self, name) < 1:
                msg = f"{name} must be positive, got {getattr(self, name)}"
                raise ConfigurationError(msg)
        if self.channels % self.n_heads:
            msg = f"channels ({self.channels}) must be divisible by n_heads ({self.n_heads})"
            raise ConfigurationError(msg)
        if self.conv_kernel % 2 == 0:
            msg = f"conv_kernel must be odd, got {self.conv_kernel}"
            raise ConfigurationError(msg)
        if not 0.0 <= self.omega <= 1.0:
            msg = f"omega must lie in [0, 1], got {self.omega}"
            raise ConfigurationError(msg)
        if not 0.0 <= self.dropout < 1.0:
            msg = f"dropout must lie in [0, 1), got {self.dropout}"
            raise ConfigurationError(msg)
        if self.lsigmoid_beta <= 0.0:
            msg = f"lsigmoid_beta must be positive, got {self.lsigmoid_beta}"
            raise ConfigurationError(msg)

    @property
    def n_bins(self) -> int:
        """Frequency bins F of the input spectrogram."""
        return self.stft.n_bins

    @property
    def latent_bins(self) -> int:
        """Frequency bins after the encoder's stride-2 downsampling."""
        return (self.n_bins + 1) // 2

    @property
    def compress_exponent(self) -> float:
        """Magnitude compression exponent, mirrored from the STFT config."""
        return self.stft.compress_exponent

    @property
    def resolved_omega(self) -> float | None:
        """Fusion weight actually used by the variant."""
        if self.variant is Variant.DM2:
            return 0.0
        return self.omega if self.variant.uses_omega else None

    def with_variant(self, variant: Variant) -> ModelConfig:
        """Same hyperparameters, another variant."""
        return replace(self, variant=variant)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        out = asdict(self)
        out["variant"] = self.variant.value
        out["stft"]["window"] = self.stft.window.value
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ModelConfig:
        """Inverse of `to_dict`."""
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            msg = f"unknown model config fields: {sorted(unknown)}"
            raise ConfigurationError(msg)
        values = dict(data)
        if "variant" in values:
            values["variant"] = Variant(values["variant"])
        if "stft" in values and isinstance(values["stft"], dict):
            stft = dict(values["stft"])
            if "window" in stft:
                stft["window"] = WindowKind(stft["window"])
            values["stft"] = StftConfig(**stft)
        return cls(**values)

    def config_hash(self) -> str:
        """Digest of the architecture, used to match checkpoints to configs.

        Settings that do not change the set of weights (dropout, freezing of
        alpha, omega) are left out.
        """
        arch = self.to_dict()
        for key in ("dropout", "freeze_alpha", "omega", "alpha_init"):
            arch.pop(key)
        text = json.dumps(arch, sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]
