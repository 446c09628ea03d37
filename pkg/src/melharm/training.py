"""Training loop: fresh random context per piece per epoch, Adam, early stop.

Each piece is one training example. Gradients are averaged over a batch of
pieces before every optimizer step (sequences keep their true lengths; there
is no padding). Validation uses masks fixed per example index so epoch
losses are comparable, and the parameters with the lowest validation loss
are the ones returned.
"""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .corpus import CorpusStats
from .nn import (
    NUM_CHORDS,
    ModelParams,
    NumericalError,
    assemble_input,
    backward,
    class_weights,
    forward,
    init_params,
    make_training_mask,
    masked_nll,
)
from .optim import adam_step, clip_global_norm, init_adam

log = logging.getLogger(__name__)

# salt for per-example validation mask rngs, fixed so histories are comparable
VALIDATION_MASK_SALT = 0x5EEDBA5E


@dataclass
class TrainConfig:
    epochs_max: int = 10
    batch_size: int = 32
    lr: float = 0.005
    dropout: float = 0.2
    seed: int = 0
    class_balancing: bool = True
    validation_fraction: float = 0.05
    hidden_size: int = 128
    clip_norm: float = 5.0

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError(
                f"validation_fraction must lie in (0, 1), got {self.validation_fraction}"
            )
        for name in ("epochs_max", "batch_size", "lr", "hidden_size", "clip_norm"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")


@dataclass
class TrainHistory:
    epochs: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    best_epoch: int = -1
    aborted: bool = False

    def rows(self) -> list:
        return [
            {"epoch": e, "train_loss": tl, "val_loss": vl, "seconds": s}
            for e, tl, vl, s in zip(
                self.epochs, self.train_loss, self.val_loss, self.seconds
            )
        ]


def _validation_mask(num_frames: int, example_index: int) -> np.ndarray:
    rng = np.random.default_rng((VALIDATION_MASK_SALT, example_index))
    return make_training_mask(num_frames, rng)


def evaluate_loss(params: ModelParams, dataset, weights: np.ndarray) -> float:
    """Mean masked NLL with a fixed mask per example index (no dropout)."""
    if not dataset:
        raise ValueError("evaluate_loss needs a non-empty dataset")
    total = 0.0
    for idx, fs in enumerate(dataset):
        mask = _validation_mask(fs.num_frames, idx)
        batch = assemble_input(fs.melody, fs.chords, mask)
        logits, _ = forward(params, batch, train_mode=False)
        total += masked_nll(logits, fs.chords, mask, weights)
    return total / len(dataset)


def _zero_grads_like(params: ModelParams) -> dict:
    return {name: np.zeros_like(a) for name, a in params.arrays().items()}


def weights_for(stats: CorpusStats, class_balancing: bool) -> np.ndarray:
    if class_balancing:
        return class_weights(stats.chord_counts)
    return np.ones(NUM_CHORDS)


def train(corpus, stats: CorpusStats, cfg: TrainConfig):
    """Returns (best params, TrainHistory)."""
    if not corpus:
        raise ValueError("train needs a non-empty corpus")

    weights = weights_for(stats, cfg.class_balancing)

    rng = np.random.default_rng(cfg.seed)
    n_val = max(1, round(cfg.validation_fraction * len(corpus)))
    n_val = min(n_val, len(corpus) - 1) if len(corpus) > 1 else 0
    order = rng.permutation(len(corpus))
    val_set = [corpus[i] for i in order[:n_val]]
    train_set = [corpus[i] for i in order[n_val:]]
    if not val_set:  # single-piece corpus: validate on the training piece
        val_set = train_set

    params = init_params(cfg.hidden_size, cfg.dropout, cfg.seed)
    opt = init_adam(params, lr=cfg.lr)
    history = TrainHistory()
    best = params.copy()
    best_val = float("inf")

    for epoch in range(cfg.epochs_max):
        t0 = time.monotonic()
        epoch_losses = []
        perm = rng.permutation(len(train_set))
        acc = _zero_grads_like(params)
        in_batch = 0

        def apply_batch():
            nonlocal acc, in_batch
            for g in acc.values():
                g /= in_batch
            clip_global_norm(acc, cfg.clip_norm)
            adam_step(params, acc, opt)
            acc = _zero_grads_like(params)
            in_batch = 0

        aborted = False
        for j in perm:
            fs = train_set[j]
            mask = make_training_mask(fs.num_frames, rng)
            batch = assemble_input(fs.melody, fs.chords, mask)
            try:
                logits, cache = forward(params, batch, train_mode=True, rng=rng)
                loss = masked_nll(logits, fs.chords, mask, weights)
            except NumericalError as exc:
                log.error("epoch %d: %s; stopping", epoch, exc)
                aborted = True
                break
            if not np.isfinite(loss):
                log.error("epoch %d: non-finite loss; stopping", epoch)
                aborted = True
                break
            epoch_losses.append(loss)
            grads = backward(params, cache, fs.chords, mask, weights)
            for name, g in grads.items():
                acc[name] += g
            in_batch += 1
            if in_batch == cfg.batch_size:
                apply_batch()
        if in_batch and not aborted:
            apply_batch()

        if aborted:
            history.aborted = True
            break

        val = evaluate_loss(params, val_set, weights)
        history.epochs.append(epoch)
        history.train_loss.append(float(np.mean(epoch_losses)))
        history.val_loss.append(val)
        history.seconds.append(time.monotonic() - t0)
        if val < best_val:
            best_val = val
            best = params.copy()
            history.best_epoch = epoch
        log.info(
            "epoch %d: train %.4f val %.4f (%.1fs)",
            epoch, history.train_loss[-1], val, history.seconds[-1],
        )

    return best, history
