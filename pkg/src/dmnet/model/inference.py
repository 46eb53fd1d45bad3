"""Waveform-in, waveform-out restoration."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from pathlib import Path

import numpy as np
import torch

from dmnet.audio import read_wav, write_wav
from dmnet.core import Waveform
from dmnet.errors import DataError
from dmnet.spectral import complex_istft, stft

from .checkpoint import load_checkpoint
from .config import ModelConfig
from .network import DMNet

logger = logging.getLogger(__name__)


class Restorer:
    """Runs a trained network over waveforms and files."""

    def __init__(self, model: DMNet, dtype: torch.dtype = torch.float32) -> None:
        self.model = model.to(dtype).eval()
        self.dtype = dtype

    @property
    def cfg(self) -> ModelConfig:
        """Configuration of the wrapped network."""
        return self.model.cfg

    @classmethod
    def from_checkpoint(
        cls,
        path: str | Path,
        cfg: ModelConfig | None = None,
        dtype: torch.dtype = torch.float32,
    ) -> Restorer:
        """Load weights from a checkpoint file, optionally checked against `cfg`."""
        ckpt = load_checkpoint(path, expected=cfg)
        model = DMNet(cfg or ckpt.config)
        model.load_state_dict(ckpt.state_dict)
        logger.info("Loaded %s network from %s (step %d)", ckpt.variant.value, path, ckpt.step)
        return cls(model, dtype)

    @torch.no_grad()
    def restore(self, y: Waveform) -> Waveform:
        """Restore one waveform. The output has the input's length."""
        cfg = self.cfg
        samples = torch.as_tensor(np.asarray(y.samples), dtype=self.dtype)
        out = self.model(stft(samples, cfg.stft))
        restored = complex_istft(out.complex(cfg.compress_exponent), cfg.stft, length=len(y))
        return y.with_samples(restored.cpu().numpy())

    def restore_file(self, in_path: str | Path, out_path: str | Path) -> Path:
        """Restore a WAV file into `out_path`."""
        return write_wav(out_path, self.restore(read_wav(in_path)))

    def restore_dir(self, in_dir: str | Path, out_dir: str | Path) -> list[Path]:
        """Restore every WAV file of `in_dir` into `out_dir`, keeping file names."""
        in_dir, out_dir = Path(in_dir), Path(out_dir)
        inputs = sorted(in_dir.glob("*.wav"))
        if not inputs:
            msg = f"{in_dir}: no WAV files to restore"
            raise DataError(msg)
        return [self.restore_file(path, out_dir / path.name) for path in inputs]


def restore(
    y: Waveform,
    cfg: ModelConfig,
    weights: Mapping[str, torch.Tensor] | str | Path,
    dtype: torch.dtype = torch.float32,
) -> Waveform:
    """Restore `y` with a network of configuration `cfg`.

    `weights` is a state dict or a checkpoint path; a checkpoint for another
    architecture raises `CheckpointError`.
    """
    if isinstance(weights, str | Path):
        return Restorer.from_checkpoint(weights, cfg, dtype).restore(y)
    model = DMNet(cfg)
    model.load_state_dict(dict(weights))
    return Restorer(model, dtype).restore(y)
