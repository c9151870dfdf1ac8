"""Functional layer operations with explicit backward passes.

Conventions: activations are (batch, freq, time, channel) float64 arrays,
LSTM sequences are (batch, time, features). Convolutions are
cross-correlations (no kernel flip). Forward functions return the output
plus whatever the matching backward needs.
"""

from __future__ import annotations

import numpy as np

from ntnlink.backend import kernels
from ntnlink.errors import ConfigurationError, UsageError


def conv2d_forward(x, w, b, stride, pad):
    """Strided 2D cross-correlation with zero padding.

    pad is (top, bottom, left, right) on the (freq, time) axes.
    Returns (y, xpad); xpad is the saved activation for the backward pass.
    """
    if x.ndim != 4:
        raise UsageError(f"conv2d expects a 4-d input, got shape {x.shape}")
    if x.shape[3] != w.shape[2]:
        raise ConfigurationError(
            f"conv2d channel mismatch: input has {x.shape[3]}, kernel expects {w.shape[2]}"
        )
    xpad = np.pad(x, ((0, 0), (pad[0], pad[1]), (pad[2], pad[3]), (0, 0)))
    wf, wt = w.shape[0], w.shape[1]
    if xpad.shape[1] < wf or xpad.shape[2] < wt:
        raise ConfigurationError(
            f"conv2d padded extents {xpad.shape[1:3]} smaller than kernel ({wf}, {wt})"
        )
    y = kernels.conv2d_fwd(xpad, w, stride[0], stride[1])
    if y.shape[1] < 1 or y.shape[2] < 1:
        raise ConfigurationError("conv2d produced a non-positive output extent")
    return y + b, xpad


def conv2d_backward(gy, xpad, w, stride, pad, in_shape):
    """Gradients of conv2d_forward w.r.t. input, kernel, and bias."""
    gxpad = kernels.conv2d_bwd_input(
        np.ascontiguousarray(gy), w, stride[0], stride[1], xpad.shape[1], xpad.shape[2]
    )
    gw, gb = kernels.conv2d_bwd_params(
        np.ascontiguousarray(gy), xpad, w.shape[0], w.shape[1], stride[0], stride[1]
    )
    top, bot, left, right = pad
    gx = gxpad[:, top:top + in_shape[1], left:left + in_shape[2], :]
    return np.ascontiguousarray(gx), gw, gb


def tconv2d_forward(x, w, b, stride, crop):
    """Strided 2D transposed convolution, then cropping, then bias.

    Output extents before cropping are (Lf-1)*sf + Wf and (Lt-1)*st + Wt;
    crop is (top, bottom, left, right) removed from the produced tensor.
    """
    if x.ndim != 4:
        raise UsageError(f"tconv2d expects a 4-d input, got shape {x.shape}")
    if x.shape[3] != w.shape[2]:
        raise ConfigurationError(
            f"tconv2d channel mismatch: input has {x.shape[3]}, kernel expects {w.shape[2]}"
        )
    yfull = kernels.tconv2d_fwd(np.ascontiguousarray(x), w, stride[0], stride[1])
    top, bot, left, right = crop
    if top + bot >= yfull.shape[1] or left + right >= yfull.shape[2]:
        raise ConfigurationError(
            f"tconv2d crop {crop} larger than produced extents {yfull.shape[1:3]}"
        )
    y = yfull[:, top:yfull.shape[1] - bot, left:yfull.shape[2] - right, :]
    return np.ascontiguousarray(y) + b, yfull.shape


def tconv2d_backward(gy, x, w, stride, crop, full_shape):
    top, bot, left, right = crop
    gyfull = np.zeros(full_shape)
    gyfull[:, top:full_shape[1] - bot, left:full_shape[2] - right, :] = gy
    gx = kernels.tconv2d_bwd_input(gyfull, w, stride[0], stride[1], x.shape[1], x.shape[2])
    gw = kernels.tconv2d_bwd_params(
        gyfull, np.ascontiguousarray(x), w.shape[0], w.shape[1], stride[0], stride[1]
    )
    gb = gy.sum(axis=(0, 1, 2))
    return gx, gw, gb


def lstm_forward(x, w, r, b):
    """Single-layer LSTM from zero initial state; x is (batch, time, feat)."""
    if x.ndim != 3:
        raise UsageError(f"lstm expects a 3-d input, got shape {x.shape}")
    if x.shape[2] != w.shape[0]:
        raise ConfigurationError(
            f"lstm feature mismatch: input has {x.shape[2]}, weights expect {w.shape[0]}"
        )
    h, c, gates = kernels.lstm_fwd(np.ascontiguousarray(x), w, r, b)
    return h, (c, gates)


def lstm_backward(gh, x, w, r, h, cache):
    c, gates = cache
    return kernels.lstm_bwd(np.ascontiguousarray(gh), np.ascontiguousarray(x), w, r, h, c, gates)


def frequency_flatten(x):
    """(B, Lf, Lt, C) -> (B, 1, Lt, Lf*C): frequencies become extra channels.

    Pure reindexing; invert with frequency_unflatten. The channel axis runs
    fastest, so flattened channel index = f*C + c.
    """
    b, lf, lt, c = x.shape
    return np.ascontiguousarray(x.transpose(0, 2, 1, 3).reshape(b, 1, lt, lf * c))


def frequency_unflatten(y, lf, c):
    b, _, lt, fc = y.shape
    if fc != lf * c:
        raise UsageError(f"cannot unflatten {fc} channels into ({lf}, {c})")
    return np.ascontiguousarray(y.reshape(b, lt, lf, c).transpose(0, 2, 1, 3))


def time_flip(x):
    """Mirror on the time axis (axis 2 of a 4-d tensor). Involution."""
    return np.ascontiguousarray(x[:, :, ::-1, :])


def batchnorm_forward(x, gamma, beta, running_mean, running_var, train,
                      momentum=0.1, eps=1e-5, update_running=True):
    """Per-channel batch normalization over (batch, freq, time).

    Train mode normalizes with batch statistics and (unless update_running is
    cleared, as during validation passes) updates the running buffers in
    place; Infer mode uses the running buffers.
    """
    if train:
        axes = (0, 1, 2)
        mean = x.mean(axis=axes)
        var = x.var(axis=axes)
        if update_running:
            running_mean *= 1.0 - momentum
            running_mean += momentum * mean
            running_var *= 1.0 - momentum
            running_var += momentum * var
    else:
        mean, var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean) * inv_std
    y = gamma * xhat + beta
    return y, (xhat, inv_std, train)


def batchnorm_backward(gy, gamma, cache):
    xhat, inv_std, train = cache
    axes = (0, 1, 2)
    ggamma = (gy * xhat).sum(axis=axes)
    gbeta = gy.sum(axis=axes)
    if train:
        # batch statistics depend on x, so their gradients feed back
        count = gy.shape[0] * gy.shape[1] * gy.shape[2]
        gx = (gamma * inv_std) * (gy - gbeta / count - xhat * ggamma / count)
    else:
        # running statistics are constants at inference
        gx = gy * gamma * inv_std
    return gx, ggamma, gbeta


def leaky_relu(x, slope=0.01):
    return np.where(x >= 0.0, x, slope * x)


def leaky_relu_backward(gy, x, slope=0.01):
    return np.where(x >= 0.0, gy, slope * gy)


def mse_loss(prediction, target):
    """Mean over all elements of the squared difference, with its gradient."""
    if prediction.shape != target.shape:
        raise UsageError(
            f"mse_loss shape mismatch: {prediction.shape} vs {target.shape}"
        )
    diff = prediction - target
    loss = float(np.mean(diff * diff))
    grad = 2.0 * diff / diff.size
    return loss, grad


def nmse(prediction, target):
    """||prediction - target||^2 / ||target||^2 for complex or real arrays."""
    num = np.sum(np.abs(prediction - target) ** 2)
    den = np.sum(np.abs(target) ** 2)
    return float(num / den)
