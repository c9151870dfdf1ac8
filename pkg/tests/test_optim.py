"""Adam recurrence and the warmup/cosine learning-rate schedule."""

import numpy as np
import pytest

from ntnlink.errors import ConfigurationError
from ntnlink.nn.core import ParamStore, Tensor
from ntnlink.nn.optim import Adam, LrSchedule, adam_step, lr_at_epoch


def _store_with(value, grad):
    store = ParamStore()
    p = Tensor(np.array([value]), with_grad=True)
    store.register("w", [p])
    p.grad[:] = grad
    return store, p


def test_adam_zero_gradient_keeps_parameters():
    store, p = _store_with(1.5, 0.0)
    Adam(store, l2=0.0).step(0.1)
    assert p.data[0] == 1.5


def test_adam_first_step_has_learning_rate_magnitude():
    store, p = _store_with(1.0, 1.0)
    Adam(store).step(0.1)
    # bias-corrected first step: m_hat = g, v_hat = g^2 -> step = lr * g/|g|
    assert p.data[0] == pytest.approx(0.9, abs=1e-7)


def test_adam_l2_term_enters_gradient_before_moments():
    store, p = _store_with(1.0, 0.0)
    opt = Adam(store, l2=1e-6)
    opt.step(0.1)
    # gradient became 1e-6 * w; sign of the step follows it
    assert p.data[0] < 1.0
    store2, p2 = _store_with(1.0, 0.0)
    opt2 = Adam(store2, l2=0.0)
    opt2.step(0.1)
    assert p2.data[0] == 1.0


def test_adam_moments_persist_across_steps():
    store, p = _store_with(0.0, 1.0)
    opt = Adam(store)
    opt.step(0.1)
    first = p.data[0]
    p.grad[:] = 0.0
    opt.step(0.1)  # momentum keeps moving the parameter
    assert p.data[0] < first
    assert opt.t == 2


def test_adam_step_function_wrapper():
    store, p = _store_with(1.0, 1.0)
    opt = Adam(store)
    adam_step(opt, 0.1)
    assert p.data[0] == pytest.approx(0.9, abs=1e-7)


def test_lr_schedule_validation():
    with pytest.raises(ConfigurationError):
        LrSchedule(max_lr=0.001, min_lr=0.03)
    with pytest.raises(ConfigurationError):
        LrSchedule(annealing_period_epochs=0)


def test_lr_schedule_warmup_and_annealing_anchors():
    s = LrSchedule()
    assert lr_at_epoch(s, 0) == pytest.approx(0.001)
    assert lr_at_epoch(s, 40) == pytest.approx(0.03)
    assert lr_at_epoch(s, 90) == pytest.approx((0.03 + 0.001) / 2)
    assert lr_at_epoch(s, 140) == pytest.approx(0.03)  # period restart
    assert lr_at_epoch(s, 20) == pytest.approx(0.001 + (0.03 - 0.001) * 0.5)


def test_lr_schedule_bounds_property():
    s = LrSchedule()
    vals = [lr_at_epoch(s, e) for e in range(0, 500)]
    assert min(vals) >= s.min_lr - 1e-12
    assert max(vals) <= s.max_lr + 1e-12
