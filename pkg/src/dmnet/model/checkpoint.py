"""Self-describing checkpoint files."""

from __future__ import annotations

import logging
import pickle
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import torch

from dmnet.core import Variant
from dmnet.errors import CheckpointError

from .config import ModelConfig

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    """Weights plus everything needed to rebuild and resume the model."""

    config: ModelConfig
    state_dict: dict[str, torch.Tensor]
    step: int = 0
    optimizer_state: dict[str, Any] | None = None
    alpha_trajectory: list[tuple[int, float]] = field(default_factory=list)
    train_config: dict[str, Any] | None = None
    torch_rng_state: torch.Tensor | None = None

    @property
    def variant(self) -> Variant:
        """Variant of the stored network."""
        return self.config.variant

    @property
    def config_hash(self) -> str:
        """Architecture digest of the stored network."""
        return self.config.config_hash()

    @property
    def alpha(self) -> float | None:
        """Stored alpha, DM2 only."""
        value = self.state_dict.get("alpha")
        return float(value) if value is not None else None


def save_checkpoint(path: str | Path, ckpt: Checkpoint) -> Path:
    """Write `ckpt` atomically (temporary file, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": FORMAT_VERSION,
        "config": ckpt.config.to_dict(),
        "config_hash": ckpt.config_hash,
        "variant": ckpt.variant.value,
        "state_dict": ckpt.state_dict,
        "step": ckpt.step,
        "optimizer_state": ckpt.optimizer_state,
        "alpha": ckpt.alpha,
        "alpha_trajectory": [list(point) for point in ckpt.alpha_trajectory],
        "train_config": ckpt.train_config,
        "torch_rng_state": ckpt.torch_rng_state,
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(payload, tmp)
    tmp.replace(path)
    logger.info("Saved checkpoint %s (step %d)", path, ckpt.step)
    return path


def load_checkpoint(path: str | Path, expected: ModelConfig | None = None) -> Checkpoint:
    """Read a checkpoint, refusing one whose architecture differs from `expected`."""
    path = Path(path)
    if not path.is_file():
        msg = f"{path}: checkpoint not found"
        raise CheckpointError(msg)
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except (RuntimeError, OSError, EOFError, pickle.UnpicklingError) as e:
        msg = f"{path}: unreadable checkpoint ({e})"
        raise CheckpointError(msg) from e
    if not isinstance(payload, dict) or payload.get("format_version") != FORMAT_VERSION:
        msg = f"{path}: not a format {FORMAT_VERSION} checkpoint"
        raise CheckpointError(msg)

    config = ModelConfig.from_dict(payload["config"])
    if payload["config_hash"] != config.config_hash():
        msg = f"{path}: stored hash {payload['config_hash']} does not match its own config"
        raise CheckpointError(msg)
    if expected is not None and expected.config_hash() != config.config_hash():
        msg = (
            f"{path}: checkpoint is a {config.variant.value} network with hash {config.config_hash()}, "
            f"requested {expected.variant.value} with hash {expected.config_hash()}"
        )
        raise CheckpointError(msg)
    return Checkpoint(
        config=config,
        state_dict=payload["state_dict"],
        step=int(payload["step"]),
        optimizer_state=payload["optimizer_state"],
        alpha_trajectory=[(int(s), float(a)) for s, a in payload["alpha_trajectory"]],
        train_config=payload["train_config"],
        torch_rng_state=payload["torch_rng_state"],
    )
