"""Stateful layers: parameter init, forward caching, gradient accumulation.

A layer owns its parameter Tensors (registered in a shared ParamStore) and
caches whatever its backward pass needs from the most recent forward call.
"""

from __future__ import annotations

import numpy as np

from ntnlink.errors import UsageError
from ntnlink.nn import ops
from ntnlink.nn.core import LayerSpec, ParamStore, Tensor, same_padding


class Conv2D:
    def __init__(self, spec: LayerSpec, in_channels: int, store: ParamStore,
                 rng: np.random.Generator):
        self.spec = spec
        self.in_channels = in_channels
        wf, wt = spec.kernel
        c = spec.filters_or_units
        bound = np.sqrt(6.0 / (wf * wt * in_channels))
        self.w = Tensor(rng.uniform(-bound, bound, size=(wf, wt, in_channels, c)), with_grad=True)
        self.b = Tensor(np.zeros(c), with_grad=True)
        store.register(spec.name, [self.w, self.b])
        self._cache = None

    def forward(self, x):
        y, xpad = ops.conv2d_forward(x, self.w.data, self.b.data,
                                     self.spec.stride, self.spec.pad_or_crop)
        self._cache = (xpad, x.shape)
        return y

    def backward(self, gy):
        if self._cache is None:
            raise UsageError(f"{self.spec.name}: backward called before forward")
        xpad, in_shape = self._cache
        gx, gw, gb = ops.conv2d_backward(gy, xpad, self.w.data,
                                         self.spec.stride, self.spec.pad_or_crop, in_shape)
        self.w.grad += gw
        self.b.grad += gb
        return gx


class TConv2D:
    def __init__(self, spec: LayerSpec, in_channels: int, store: ParamStore,
                 rng: np.random.Generator):
        self.spec = spec
        self.in_channels = in_channels
        wf, wt = spec.kernel
        c = spec.filters_or_units
        bound = np.sqrt(6.0 / (wf * wt * in_channels))
        self.w = Tensor(rng.uniform(-bound, bound, size=(wf, wt, in_channels, c)), with_grad=True)
        self.b = Tensor(np.zeros(c), with_grad=True)
        store.register(spec.name, [self.w, self.b])
        self._cache = None

    def forward(self, x):
        y, full_shape = ops.tconv2d_forward(x, self.w.data, self.b.data,
                                            self.spec.stride, self.spec.pad_or_crop)
        self._cache = (x, full_shape)
        return y

    def backward(self, gy):
        if self._cache is None:
            raise UsageError(f"{self.spec.name}: backward called before forward")
        x, full_shape = self._cache
        gx, gw, gb = ops.tconv2d_backward(gy, x, self.w.data,
                                          self.spec.stride, self.spec.pad_or_crop, full_shape)
        self.w.grad += gw
        self.b.grad += gb
        return gx


class LSTM:
    """Gate packing along the last weight axis is [input, forget, cell, output].

    Forget-gate biases start at 1 so early training does not wipe the cell
    state; all weights start uniform in +-1/sqrt(units).
    """

    def __init__(self, spec: LayerSpec, in_features: int, store: ParamStore,
                 rng: np.random.Generator):
        self.spec = spec
        self.in_features = in_features
        u = spec.filters_or_units
        bound = 1.0 / np.sqrt(u)
        self.w = Tensor(rng.uniform(-bound, bound, size=(in_features, 4 * u)), with_grad=True)
        self.r = Tensor(rng.uniform(-bound, bound, size=(u, 4 * u)), with_grad=True)
        bias = np.zeros(4 * u)
        bias[u:2 * u] = 1.0
        self.b = Tensor(bias, with_grad=True)
        store.register(spec.name, [self.w, self.r, self.b])
        self._cache = None

    def forward(self, x):
        h, cache = ops.lstm_forward(x, self.w.data, self.r.data, self.b.data)
        self._cache = (x, h, cache)
        return h

    def backward(self, gh):
        if self._cache is None:
            raise UsageError(f"{self.spec.name}: backward called before forward")
        x, h, cache = self._cache
        gx, gw, gr, gb = ops.lstm_backward(gh, x, self.w.data, self.r.data, h, cache)
        self.w.grad += gw
        self.r.grad += gr
        self.b.grad += gb
        return gx


class BatchNorm:
    def __init__(self, name: str, channels: int, store: ParamStore):
        self.name = name
        self.gamma = Tensor(np.ones(channels), with_grad=True)
        self.beta = Tensor(np.zeros(channels), with_grad=True)
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)
        store.register(name, [self.gamma, self.beta], table_layer=False)
        self._cache = None

    def forward(self, x, train, update_running=True):
        y, cache = ops.batchnorm_forward(x, self.gamma.data, self.beta.data,
                                         self.running_mean, self.running_var, train,
                                         update_running=update_running)
        self._cache = cache
        return y

    def backward(self, gy):
        if self._cache is None:
            raise UsageError(f"{self.name}: backward called before forward")
        gx, ggamma, gbeta = ops.batchnorm_backward(gy, self.gamma.data, self._cache)
        self.gamma.grad += ggamma
        self.beta.grad += gbeta
        return gx


def build_table_spec(name, kind, filters, kernel, stride, pad_or_crop,
                     activation="None", batchnorm=False):
    if pad_or_crop == "same":
        pad_or_crop = same_padding(kernel)
    return LayerSpec(name=name, kind=kind, filters_or_units=filters, kernel=kernel,
                     stride=stride, pad_or_crop=pad_or_crop, activation=activation,
                     batchnorm=batchnorm)
