"""Optimization and loss settings."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Any

from dmnet.constants import DEFAULT_LEARNING_RATE, DEFAULT_LOSS_WEIGHTS, GRAD_CLIP_NORM
from dmnet.errors import ConfigurationError


@dataclass(frozen=True, slots=True)
class LossWeights:
    """Weights of the loss components. A zero weight drops the component."""

    magnitude: float = DEFAULT_LOSS_WEIGHTS["magnitude"]
    phase: float = DEFAULT_LOSS_WEIGHTS["phase"]
    complex: float = DEFAULT_LOSS_WEIGHTS["complex"]
    time: float = DEFAULT_LOSS_WEIGHTS["time"]
    consistency: float = DEFAULT_LOSS_WEIGHTS["consistency"]

    def __post_init__(self) -> None:
        """Check weights are non-negative with a positive magnitude weight."""
        for f in fields(self):
            if getattr(self, f.name) < 0.0:
                msg = f"loss weight {f.name} must be non-negative, got {getattr(self, f.name)}"
                raise ConfigurationError(msg)
        if self.magnitude <= 0.0:
            msg = "the magnitude loss weight must be positive"
            raise ConfigurationError(msg)

    def items(self) -> list[tuple[str, float]]:
        """(name, weight) pairs in a fixed order."""
        return [(f.name, getattr(self, f.name)) for f in fields(self)]


@dataclass(frozen=True, slots=True)
class TrainConfig:
    """Training run settings (desk-scale defaults)."""

    lr: float = DEFAULT_LEARNING_RATE
    weight_decay: float = 0.01
    betas: tuple[float, float] = (0.8, 0.99)
    steps: int = 10_000
    batch_size: int = 2
    segment_s: float = 2.0
    warmup_steps: int = 0
    grad_clip: float = GRAD_CLIP_NORM
    loss_weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0
    checkpoint_every: int = 1000
    log_every: int = 50
    validate_every: int = 500
    validation_utterances: int = 8

    def __post_init__(self) -> None:
        """Check ranges."""
        if self.lr < 0.0:
            msg = f"lr must be non-negative, got {self.lr}"
            raise ConfigurationError(msg)
        if self.steps < 0:
            msg = f"steps must be non-negative, got {self.steps}"
            raise ConfigurationError(msg)
        for name in ("batch_size", "checkpoint_every", "log_every"):
            if getattr(self, name) < 1:
                msg = f"{name} must be positive, got {getattr(self, name)}"
                raise ConfigurationError(msg)
        if self.segment_s <= 0.0:
            msg = f"segment_s must be positive, got {self.segment_s}"
            raise ConfigurationError(msg)
        if self.warmup_steps < 0 or self.validate_every < 0 or self.validation_utterances < 0:
            msg = "warmup_steps, validate_every and validation_utterances must be non-negative"
            raise ConfigurationError(msg)
        if self.grad_clip <= 0.0:
            msg = f"grad_clip must be positive, got {self.grad_clip}"
            raise ConfigurationError(msg)

    def lr_at(self, step: int) -> float:
        """Learning rate for 0-based `step`: linear warm-up, then constant."""
        if self.warmup_steps and step < self.warmup_steps:
            return self.lr * (step + 1) / self.warmup_steps
        return self.lr

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        out = asdict(self)
        out["betas"] = list(self.betas)
        return out
