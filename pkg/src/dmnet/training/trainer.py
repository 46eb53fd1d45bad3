"""Seeded, resumable training loop."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
import torch
from tqdm import tqdm

from dmnet.constants import SAMPLE_RATE
from dmnet.core import Split
from dmnet.errors import ConfigurationError, CorpusError, NonFiniteLossError
from dmnet.model.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from dmnet.model.network import DMNet
from dmnet.runtime import configure_runtime
from dmnet.spectral import stft

from .config import TrainConfig
from .data import Batch, PairedCorpus
from .losses import LossBreakdown, compute_losses

if TYPE_CHECKING:
    from dmnet.model.config import ModelConfig

logger = logging.getLogger(__name__)

LOG_NAME = "train_log.jsonl"
VALIDATION_LOG_NAME = "validation_log.jsonl"
CHECKPOINT_DIR = "checkpoints"


def checkpoint_name(step: int) -> str:
    """File name of the checkpoint written after `step` updates."""
    return f"step_{step:07d}.pt"


@dataclass(frozen=True)
class TrainResult:
    """Outcome of a training run."""

    final_checkpoint: Path
    checkpoints: list[Path]
    log_path: Path
    steps: int
    losses: list[float] = field(default_factory=list)
    alpha_trajectory: list[tuple[int, float]] = field(default_factory=list)


def _truncate_log(path: Path, step: int) -> None:
    """Drop log records after `step`, left behind by an interrupted run."""
    if not path.is_file():
        return
    lines = path.read_text(encoding="utf-8").splitlines()
    kept = [line for line in lines if line and json.loads(line)["step"] <= step]
    path.write_text("".join(line + "\n" for line in kept), encoding="utf-8")


class Trainer:
    """Trains one network on the training split of a corpus manifest.

    The batch of step k is drawn from a generator seeded with (seed, k) and the
    network is initialised from `seed`, so a resumed run continues exactly as
    an uninterrupted one would (bit for bit in deterministic mode).
    """

    def __init__(
        self,
        model_cfg: ModelConfig,
        train_cfg: TrainConfig,
        manifest: str | Path,
        workdir: str | Path,
        resume: str | Path | None = None,
        dtype: torch.dtype | None = None,
    ) -> None:
        self.model_cfg = model_cfg
        self.cfg = train_cfg
        self.workdir = Path(workdir)
        self.dtype = dtype or configure_runtime()
        self.segment = round(train_cfg.segment_s * SAMPLE_RATE)
        if self.segment < model_cfg.stft.win_length:
            msg = f"segment of {self.segment} samples is shorter than the {model_cfg.stft.win_length}-sample window"
            raise ConfigurationError(msg)

        self.train_set = PairedCorpus.from_manifest(manifest, Split.TRAIN)
        if not len(self.train_set):
            msg = f"{manifest}: no training pairs"
            raise CorpusError(msg)
        self.validation_set = PairedCorpus.from_manifest(manifest, Split.VALIDATION)

        torch.manual_seed(train_cfg.seed)
        self.model = DMNet(model_cfg).to(self.dtype)
        self.optimizer = torch.optim.AdamW(
            [p for p in self.model.parameters() if p.requires_grad],
            lr=train_cfg.lr,
            betas=train_cfg.betas,
            weight_decay=train_cfg.weight_decay,
        )
        self.step = 0
        self.alpha_trajectory: list[tuple[int, float]] = []
        self.checkpoint_dir = self.workdir / CHECKPOINT_DIR
        self.log_path = self.workdir / LOG_NAME
        if resume is not None:
            self._resume(Path(resume))

    def _resume(self, path: Path) -> None:
        ckpt = load_checkpoint(path, expected=self.model_cfg)
        self.model.load_state_dict(ckpt.state_dict)
        if ckpt.optimizer_state is not None:
            self.optimizer.load_state_dict(ckpt.optimizer_state)
        if ckpt.torch_rng_state is not None:
            torch.set_rng_state(ckpt.torch_rng_state)
        self.step = ckpt.step
        self.alpha_trajectory = list(ckpt.alpha_trajectory)
        _truncate_log(self.log_path, self.step)
        _truncate_log(self.workdir / VALIDATION_LOG_NAME, self.step)
        logger.info("Resumed from %s at step %d", path, self.step)

    def _checkpoint(self, name: str | None = None) -> Path:
        ckpt = Checkpoint(
            config=self.model_cfg,
            state_dict={k: v.detach().clone() for k, v in self.model.state_dict().items()},
            step=self.step,
            optimizer_state=self.optimizer.state_dict(),
            alpha_trajectory=list(self.alpha_trajectory),
            train_config=self.cfg.to_dict(),
            torch_rng_state=torch.get_rng_state(),
        )
        return save_checkpoint(self.checkpoint_dir / (name or checkpoint_name(self.step)), ckpt)

    def _losses(self, batch: Batch) -> LossBreakdown:
        stft_cfg = self.model_cfg.stft
        degraded = batch.degraded.to(self.dtype)
        clean = batch.clean.to(self.dtype)
        lengths = batch.lengths if batch.padded else None
        frame_lengths = 1 + lengths // stft_cfg.hop if lengths is not None else None
        output = self.model(stft(degraded, stft_cfg), frame_lengths)
        return compute_losses(output, stft(clean, stft_cfg), clean, stft_cfg, self.cfg.loss_weights, lengths)

    def _append(self, path: Path, record: dict[str, Any]) -> None:
        with path.open("a", encoding="utf-8") as f:
            f.write(json.dumps(record, sort_keys=True) + "\n")

    @torch.no_grad()
    def validate(self) -> float | None:
        """Mean total loss over the first validation utterances, `None` without any."""
        pairs = self.validation_set.pairs[: self.cfg.validation_utterances]
        if not pairs:
            return None
        self.model.eval()
        totals = []
        for pair in pairs:
            batch = Batch(
                degraded=torch.from_numpy(pair.degraded[None, :]),
                clean=torch.from_numpy(pair.clean[None, :]),
                lengths=torch.tensor([len(pair)]),
            )
            totals.append(float(self._losses(batch).total))
        self.model.train()
        return float(np.mean(totals))

    def train(self) -> TrainResult:
        """Run until `steps` updates have been made, checkpointing along the way."""
        self.workdir.mkdir(parents=True, exist_ok=True)
        checkpoints = []
        if self.step == 0:
            self.log_path.unlink(missing_ok=True)
            (self.workdir / VALIDATION_LOG_NAME).unlink(missing_ok=True)
            if self.model.alpha_value is not None:
                self.alpha_trajectory = [(0, self.model.alpha_value)]
            checkpoints.append(self._checkpoint())

        losses = []
        self.model.train()
        progress = tqdm(range(self.step, self.cfg.steps), desc="train", disable=None)
        for step in progress:
            rng = np.random.default_rng([self.cfg.seed, step])
            batch = self.train_set.sample_batch(rng, self.cfg.batch_size, self.segment)
            lr = self.cfg.lr_at(step)
            for group in self.optimizer.param_groups:
                group["lr"] = lr

            breakdown = self._losses(batch)
            total = float(breakdown.total.detach())
            if not math.isfinite(total):
                snapshot = self._checkpoint(f"nonfinite_step_{step:07d}.pt")
                msg = f"loss became {total} at step {step} ({breakdown.components}), snapshot in {snapshot}"
                raise NonFiniteLossError(msg)

            self.optimizer.zero_grad(set_to_none=True)
            breakdown.total.backward()
            torch.nn.utils.clip_grad_norm_(self.model.parameters(), self.cfg.grad_clip)
            self.optimizer.step()
            self.step = step + 1
            losses.append(total)

            alpha = self.model.alpha_value
            if alpha is not None:
                self.alpha_trajectory.append((self.step, alpha))
            self._append(
                self.log_path,
                {"step": self.step, "lr": lr, "loss": total, **breakdown.components, "alpha": alpha},
            )
            if self.step % self.cfg.log_every == 0:
                logger.info("step %d loss %.5f %s", self.step, total, breakdown.components)
                progress.set_postfix(loss=f"{total:.4f}")
            if self.cfg.validate_every and self.step % self.cfg.validate_every == 0:
                validation = self.validate()
                if validation is not None:
                    self._append(self.workdir / VALIDATION_LOG_NAME, {"step": self.step, "loss": validation})
                    logger.info("step %d validation loss %.5f", self.step, validation)
            if self.step % self.cfg.checkpoint_every == 0 or self.step == self.cfg.steps:
                checkpoints.append(self._checkpoint())

        final = self.checkpoint_dir / checkpoint_name(self.step)
        if not final.is_file():
            final = self._checkpoint()
            checkpoints.append(final)
        return TrainResult(
            final_checkpoint=final,
            checkpoints=checkpoints,
            log_path=self.log_path,
            steps=self.step,
            losses=losses,
            alpha_trajectory=list(self.alpha_trajectory),
        )


def train(
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    corpus_manifest: str | Path,
    workdir: str | Path,
    resume: str | Path | None = None,
) -> TrainResult:
    """Train a network and return the written checkpoints."""
    return Trainer(model_cfg, train_cfg, corpus_manifest, workdir, resume).train()
