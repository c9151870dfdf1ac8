"""Training loop: per epoch, regenerate the batch, take one optimizer step,
validate on a second regenerated batch, and early-stop after a fixed number
of annealing cycles without validation improvement."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from ntnlink.dataset import (STREAM_TRAIN, STREAM_VAL, TrainConfig, make_dataset,
                             stack_batch)
from ntnlink.errors import NumericalError
from ntnlink.nn.optim import Adam, lr_at_epoch
from ntnlink.nn.ops import mse_loss
from ntnlink.predictor import ChannelPredictor


@dataclass
class EpochRow:
    epoch: int
    lr: float
    train_loss: float
    val_nmse: float
    seconds: float


@dataclass
class TrainResult:
    history: list[EpochRow]
    best_epoch: int
    best_val_nmse: float
    epochs_run: int


def _snapshot(model: ChannelPredictor) -> dict:
    return {name: arr.copy() for name, arr in model.state_tensors()}


def _restore(model: ChannelPredictor, snap: dict) -> None:
    for name, arr in model.state_tensors():
        arr[...] = snap[name]


def train(model: ChannelPredictor, config: TrainConfig, log_fn=None,
          dataset_fn=None, lr_fn=None, threads: int = 1) -> TrainResult:
    """Train in place and leave the best-validation parameters loaded.

    dataset_fn(stream, epoch, n) and lr_fn(epoch) are injection points for
    diagnostics; the defaults regenerate data per epoch and follow the
    config's warmup/annealing schedule.
    """
    if dataset_fn is None:
        def dataset_fn(stream, epoch, n):
            return make_dataset(config, n, stream, epoch, threads=threads)
    if lr_fn is None:
        def lr_fn(epoch):
            return lr_at_epoch(config.lr_schedule, epoch)

    optimizer = Adam(model.store, l2=config.l2)
    history: list[EpochRow] = []
    best_val = math.inf
    best_epoch = -1
    best_state = None
    epochs_run = 0

    for epoch in range(config.max_epochs):
        t0 = time.perf_counter()
        x, target, _ = stack_batch(dataset_fn(STREAM_TRAIN, epoch, config.batch_size))
        loss = math.nan
        for _ in range(max(1, config.steps_per_epoch)):
            pred = model.forward_stacked(x, mode="train")
            loss, grad = mse_loss(pred, target)
            if not math.isfinite(loss):
                raise NumericalError(
                    f"non-finite training loss at epoch {epoch} (lr={lr_fn(epoch):g})"
                )
            model.store.zero_grads()
            model.backward(grad)
            optimizer.step(lr_fn(epoch))

        xv, tv, _ = stack_batch(dataset_fn(STREAM_VAL, epoch, config.batch_size))
        val_pred = model.forward_stacked(xv, mode="val")
        val_nmse, _ = mse_loss(val_pred, tv)
        if not math.isfinite(val_nmse):
            raise NumericalError(f"non-finite validation loss at epoch {epoch}")

        row = EpochRow(epoch=epoch, lr=lr_fn(epoch), train_loss=loss,
                       val_nmse=val_nmse, seconds=time.perf_counter() - t0)
        history.append(row)
        if log_fn is not None:
            log_fn(row)

        if val_nmse < best_val:
            best_val = val_nmse
            best_epoch = epoch
            best_state = _snapshot(model)
        epochs_run = epoch + 1
        if epoch - best_epoch >= config.patience_epochs:
            break

    if best_state is not None:
        _restore(model, best_state)
    model.trained_epochs = epochs_run
    return TrainResult(history=history, best_epoch=best_epoch,
                       best_val_nmse=best_val, epochs_run=epochs_run)
