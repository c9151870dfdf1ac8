"""Adam optimizer and the warmup + cosine-annealing learning-rate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ntnlink.errors import ConfigurationError
from ntnlink.nn.core import ParamStore


@dataclass(frozen=True)
class LrSchedule:
    max_lr: float = 0.03
    min_lr: float = 0.001
    warmup_epochs: int = 40
    annealing_period_epochs: int = 100

    def __post_init__(self):
        if not (self.max_lr > self.min_lr > 0.0):
            raise ConfigurationError("LrSchedule requires max_lr > min_lr > 0")
        if self.warmup_epochs < 0 or self.annealing_period_epochs < 1:
            raise ConfigurationError("LrSchedule requires warmup >= 0 and period >= 1")


def lr_at_epoch(schedule: LrSchedule, epoch: int) -> float:
    """Linear ramp min->max over the warmup, then periodic cosine annealing.

    Epoch `warmup_epochs` is the first annealing epoch (lr = max_lr); each
    full period restarts at max_lr.
    """
    if epoch < 0:
        raise ConfigurationError("epoch must be >= 0")
    s = schedule
    if epoch < s.warmup_epochs:
        return s.min_lr + (s.max_lr - s.min_lr) * epoch / s.warmup_epochs
    phase = (epoch - s.warmup_epochs) % s.annealing_period_epochs
    cos = math.cos(math.pi * phase / s.annealing_period_epochs)
    return s.min_lr + (s.max_lr - s.min_lr) * 0.5 * (1.0 + cos)


class Adam:
    """Adam with an L2 term added to the raw gradient before the moments.

    Moment buffers persist across steps and are checkpointable via
    `state_arrays`.
    """

    BETA1 = 0.9
    BETA2 = 0.999
    EPS = 1e-8

    def __init__(self, store: ParamStore, l2: float = 0.0):
        self.store = store
        self.l2 = l2
        self.t = 0
        self.m = {name: np.zeros_like(p.data) for name, p in store.named_params()}
        self.v = {name: np.zeros_like(p.data) for name, p in store.named_params()}

    def step(self, lr: float) -> None:
        self.t += 1
        b1t = 1.0 - self.BETA1 ** self.t
        b2t = 1.0 - self.BETA2 ** self.t
        for name, p in self.store.named_params():
            g = p.grad + self.l2 * p.data
            m = self.m[name]
            v = self.v[name]
            m *= self.BETA1
            m += (1.0 - self.BETA1) * g
            v *= self.BETA2
            v += (1.0 - self.BETA2) * g * g
            p.data -= lr * (m / b1t) / (np.sqrt(v / b2t) + self.EPS)

    def state_arrays(self):
        for name in self.m:
            yield f"adam_m.{name}", self.m[name]
        for name in self.v:
            yield f"adam_v.{name}", self.v[name]


def adam_step(optimizer: Adam, lr: float) -> None:
    """Single optimizer step at the given learning rate."""
    optimizer.step(lr)
