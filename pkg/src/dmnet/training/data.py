"""Paired training data held in memory, with seeded batch sampling."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import torch

from dmnet.audio import read_wav
from dmnet.core import Split, UtteranceId
from dmnet.errors import CorpusError, DataError, LengthError
from dmnet.simulation.corpus import load_manifest

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from numpy.typing import NDArray

    from dmnet.simulation.corpus import ManifestEntry

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairedUtterance:
    """Degraded input and clean target of one utterance."""

    id: UtteranceId
    degraded: NDArray[np.float32]
    clean: NDArray[np.float32]

    def __len__(self) -> int:
        """Return the number of samples."""
        return int(self.degraded.shape[0])


@dataclass(frozen=True)
class Batch:
    """Equal-length crops stacked as (B, L) tensors, zero padded past `lengths`."""

    degraded: torch.Tensor
    clean: torch.Tensor
    lengths: torch.Tensor

    @property
    def padded(self) -> bool:
        """Whether any item is shorter than the batch."""
        return bool((self.lengths < self.degraded.shape[-1]).any())


def load_pair(entry: ManifestEntry) -> PairedUtterance:
    """Read the two files of a manifest entry."""
    degraded = read_wav(entry.degraded_path, entry.id)
    clean = read_wav(entry.clean_path, entry.id)
    if len(degraded) != len(clean):
        msg = f"{entry.id}: degraded has {len(degraded)} samples, clean {len(clean)}"
        raise LengthError(msg)
    return PairedUtterance(id=entry.id, degraded=degraded.samples, clean=clean.samples)


class PairedCorpus:
    """The pairs of one split of a corpus."""

    def __init__(self, pairs: Sequence[PairedUtterance]) -> None:
        self.pairs = list(pairs)

    def __len__(self) -> int:
        """Return the number of pairs."""
        return len(self.pairs)

    @classmethod
    def from_manifest(cls, manifest: str | Path, split: Split | None = Split.TRAIN) -> PairedCorpus:
        """Load every readable pair of `split` (all pairs for `None`)."""
        pairs = []
        for entry in load_manifest(manifest):
            if split is not None and entry.split is not split:
                continue
            try:
                pairs.append(load_pair(entry))
            except DataError as e:
                logger.warning("Skipping %s: %s", entry.id, e)
        logger.info("Loaded %d %s pairs from %s", len(pairs), split.value if split else "", manifest)
        return cls(pairs)

    def sample_batch(self, rng: np.random.Generator, batch_size: int, segment: int) -> Batch:
        """Random crops of `segment` samples from pairs drawn with replacement."""
        if not self.pairs:
            msg = "cannot sample from an empty corpus"
            raise CorpusError(msg)
        degraded = np.zeros((batch_size, segment), dtype=np.float32)
        clean = np.zeros((batch_size, segment), dtype=np.float32)
        lengths = np.zeros(batch_size, dtype=np.int64)
        for i in range(batch_size):
            pair = self.pairs[int(rng.integers(len(self.pairs)))]
            if len(pair) > segment:
                start = int(rng.integers(len(pair) - segment + 1))
                degraded[i] = pair.degraded[start : start + segment]
                clean[i] = pair.clean[start : start + segment]
                lengths[i] = segment
            else:
                degraded[i, : len(pair)] = pair.degraded
                clean[i, : len(pair)] = pair.clean
                lengths[i] = len(pair)
        return Batch(
            degraded=torch.from_numpy(degraded),
            clean=torch.from_numpy(clean),
            lengths=torch.from_numpy(lengths),
        )
