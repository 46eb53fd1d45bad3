"""Process-wide numeric settings."""

from __future__ import annotations

import logging
import os

import torch

logger = logging.getLogger(__name__)

DETERMINISTIC_ENV = "DMNET_DETERMINISTIC"


def deterministic_requested() -> bool:
    """Whether the environment asks for deterministic float64 mode."""
    return os.environ.get(DETERMINISTIC_ENV, "").strip().lower() in {"1", "true", "yes"}


def configure_runtime(deterministic: bool | None = None) -> torch.dtype:
    """Apply the numeric mode and return the compute dtype.

    Deterministic mode computes in float64 with deterministic kernels on a
    single intra-op thread; otherwise float32 is used.
    """
    if deterministic is None:
        deterministic = deterministic_requested()
    if deterministic:
        torch.use_deterministic_algorithms(True)
        torch.set_num_threads(1)
        logger.info("Deterministic mode: float64, deterministic kernels, single thread")
        return torch.float64
    return torch.float32
