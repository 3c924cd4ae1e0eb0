"""Adam training loop with validation tracking and checkpoint policy.

Keeps three parameter snapshots: the final epoch, the best validation
DSC, and the second-best validation DSC restricted to epochs after the
warmup. Training aborts with the epoch index when the loss stops being
finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .metrics import EPSILON_SMOOTH, dsc_slice
from .model import (ModelConfig, ModelParams, SegModel, _loss_terms,
                    _seq_input, build_model, get_params, set_params)
from .sequences import SliceSequence

__all__ = [
    "TrainConfig",
    "Checkpoint",
    "CheckpointSet",
    "HistoryRow",
    "TrainResult",
    "TrainingDivergedError",
    "train",
    "validation_dsc",
    "write_history_csv",
]


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, value: float):
        super().__init__(f"non-finite training loss {value} at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 150
    batch_size: int = 1
    lr: float = 2e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    dice_weight: float = 1.0
    bce_weight: float = 1.0
    val_threshold: float = 0.5
    warmup_epochs: int = 40

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.batch_size != 1:
            raise ValueError("only batch_size=1 is supported")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")


@dataclass(frozen=True)
class Checkpoint:
    params: ModelParams
    epoch: int
    val_dsc: float


@dataclass(frozen=True)
class CheckpointSet:
    last: Checkpoint
    best_val: Checkpoint
    second_best_post_warmup: Checkpoint


@dataclass(frozen=True)
class HistoryRow:
    epoch: int
    train_loss: float
    val_loss: float
    val_dsc_mean: float
    val_dsc_std: float


@dataclass(frozen=True)
class TrainResult:
    checkpoints: CheckpointSet
    history: tuple[HistoryRow, ...]


def _sequence_dsc(model: SegModel, seq: SliceSequence, threshold: float) -> float:
    with torch.no_grad():
        probs = model(_seq_input(seq)).numpy()
    return _probs_dsc(probs, seq.gtv, threshold)


def _probs_dsc(probs: np.ndarray, gtv: np.ndarray, threshold: float) -> float:
    values = [dsc_slice(probs[i] > threshold, gtv[i], EPSILON_SMOOTH)
              for i in range(probs.shape[0])]
    return float(np.mean(values))


def _validate(model: SegModel, val_seqs, cfg: TrainConfig) -> tuple[float, float, float]:
    model.eval()
    losses, dscs = [], []
    for seq in val_seqs:
        with torch.no_grad():
            pred = model(_seq_input(seq))
            dice, bce = _loss_terms(pred, torch.as_tensor(seq.gtv, dtype=torch.float64),
                                    EPSILON_SMOOTH)
            losses.append(cfg.dice_weight * float(dice) + cfg.bce_weight * float(bce))
        dscs.append(_probs_dsc(pred.numpy(), seq.gtv, cfg.val_threshold))
    return float(np.mean(losses)), float(np.mean(dscs)), float(np.std(dscs))


def validation_dsc(params: ModelParams, config: ModelConfig, val_seqs,
                   threshold: float = 0.5) -> tuple[float, float]:
    """Mean and population std of per-sequence DSC at the given threshold."""
    if not val_seqs:
        raise ValueError("validation set is empty")
    model = set_params(build_model(config), params)
    model.eval()
    values = [_sequence_dsc(model, seq, threshold) for seq in val_seqs]
    return float(np.mean(values)), float(np.std(values))


def train(train_seqs, val_seqs, model_cfg: ModelConfig, train_cfg: TrainConfig,
          log=None) -> TrainResult:
    """Run the full loop and return history plus the checkpoint set."""
    if not train_seqs:
        raise ValueError("training set is empty")
    if not val_seqs:
        raise ValueError("validation set is empty")
    model = build_model(model_cfg)
    optimizer = torch.optim.Adam(model.parameters(), lr=train_cfg.lr,
                                 betas=(train_cfg.beta1, train_cfg.beta2),
                                 eps=train_cfg.adam_eps)
    inputs = [_seq_input(seq) for seq in train_seqs]
    targets = [torch.as_tensor(seq.gtv, dtype=torch.float64) for seq in train_seqs]

    history: list[HistoryRow] = []
    best: Checkpoint | None = None
    post_best: Checkpoint | None = None
    post_second: Checkpoint | None = None
    snapshot: Checkpoint | None = None

    for epoch in range(1, train_cfg.epochs + 1):
        model.train()
        order = np.random.default_rng([model_cfg.seed, epoch]).permutation(len(inputs))
        epoch_losses = []
        for idx in order:
            optimizer.zero_grad()
            pred = model(inputs[idx])
            dice, bce = _loss_terms(pred, targets[idx], EPSILON_SMOOTH)
            total = train_cfg.dice_weight * dice + train_cfg.bce_weight * bce
            value = float(total.detach())
            if not np.isfinite(value):
                raise TrainingDivergedError(epoch, value)
            total.backward()
            optimizer.step()
            epoch_losses.append(value)
        train_loss = float(np.mean(epoch_losses))
        if not np.isfinite(train_loss):
            raise TrainingDivergedError(epoch, train_loss)

        val_loss, dsc_mean, dsc_std = _validate(model, val_seqs, train_cfg)
        history.append(HistoryRow(epoch, train_loss, val_loss, dsc_mean, dsc_std))
        if log is not None:
            log(history[-1])

        snapshot = Checkpoint(get_params(model), epoch, dsc_mean)
        if best is None or dsc_mean > best.val_dsc:
            best = snapshot
        if epoch > train_cfg.warmup_epochs:
            if post_best is None or dsc_mean > post_best.val_dsc:
                post_second = post_best
                post_best = snapshot
            elif post_second is None or dsc_mean > post_second.val_dsc:
                post_second = snapshot

    # short runs may never reach two post-warmup epochs; fall back to the
    # strongest snapshot available so the slot is always populated
    second = post_second or post_best or best
    return TrainResult(CheckpointSet(snapshot, best, second), tuple(history))


def write_history_csv(path, history) -> None:
    lines = ["epoch,train_loss,val_loss,val_dsc_mean,val_dsc_std"]
    for row in history:
        lines.append(",".join([
            str(row.epoch),
            f"{row.train_loss:.12g}",
            f"{row.val_loss:.12g}",
            f"{row.val_dsc_mean:.12g}",
            f"{row.val_dsc_std:.12g}",
        ]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
