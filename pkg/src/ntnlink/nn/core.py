"""Dense-tensor container, parameter registry, and layer descriptors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ntnlink.errors import ConfigurationError

LAYER_KINDS = ("Conv2D", "TConv2D", "LSTM", "BatchNorm", "LeakyReLU",
               "FrequencyFlatten", "TimeFlip", "Add")
ACTIVATIONS = ("None", "LeakyReLU")


class Tensor:
    """A row-major float64 array with an optional same-shape gradient slot."""

    __slots__ = ("data", "grad")

    def __init__(self, data, with_grad: bool = False):
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.grad = np.zeros_like(self.data) if with_grad else None

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad[...] = 0.0

    def __repr__(self):
        return f"Tensor(shape={tuple(self.data.shape)}, grad={'yes' if self.grad is not None else 'no'})"


@dataclass(frozen=True)
class LayerSpec:
    """Static description of one layer: what it is and how it is wired.

    `pad_or_crop` is (top, bottom, left, right): top/bottom act on the
    frequency axis, left/right on the time axis. For Conv2D it is zero
    padding of the input, for TConv2D it is cropping of the output.
    """

    name: str
    kind: str
    filters_or_units: int = 0
    kernel: tuple[int, int] = (1, 1)
    stride: tuple[int, int] = (1, 1)
    pad_or_crop: tuple[int, int, int, int] = (0, 0, 0, 0)
    activation: str = "None"
    batchnorm: bool = False

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ConfigurationError(f"unknown layer kind {self.kind!r}")
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"unknown activation {self.activation!r}")
        if self.kind in ("Conv2D", "TConv2D", "LSTM") and self.filters_or_units < 1:
            raise ConfigurationError(f"{self.name}: filters/units must be >= 1")
        if any(k < 1 for k in self.kernel) or any(s < 1 for s in self.stride):
            raise ConfigurationError(f"{self.name}: kernel and stride extents must be >= 1")
        if any(p < 0 for p in self.pad_or_crop):
            raise ConfigurationError(f"{self.name}: pad/crop entries must be >= 0")

    def fingerprint(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "filters_or_units": self.filters_or_units,
            "kernel": list(self.kernel),
            "stride": list(self.stride),
            "pad_or_crop": list(self.pad_or_crop),
            "activation": self.activation,
            "batchnorm": self.batchnorm,
        }


def same_padding(kernel: tuple[int, int]) -> tuple[int, int, int, int]:
    """Zero padding that preserves extents at stride 1 (extra on bottom/right)."""
    pf, pt = kernel[0] - 1, kernel[1] - 1
    return (pf // 2, pf - pf // 2, pt // 2, pt - pt // 2)


@dataclass
class ParamStore:
    """Ordered registry of named parameter groups.

    Every registered Tensor carries a grad slot. `table_names` marks the
    groups that belong to the core trainable-layer table (the count the
    complexity report checks); BatchNorm scale/shift live outside it.
    """

    rng_seed: int = 0
    groups: dict[str, list[Tensor]] = field(default_factory=dict)
    table_names: set[str] = field(default_factory=set)

    def register(self, name: str, tensors: list[Tensor], table_layer: bool = True) -> None:
        if name in self.groups:
            raise ConfigurationError(f"duplicate parameter group {name!r}")
        for t in tensors:
            if t.grad is None:
                t.grad = np.zeros_like(t.data)
        self.groups[name] = tensors
        if table_layer:
            self.table_names.add(name)

    def named_params(self):
        for name, tensors in self.groups.items():
            for i, t in enumerate(tensors):
                yield f"{name}.{i}", t

    def param_count(self, table_only: bool = False) -> int:
        return sum(
            t.size
            for name, tensors in self.groups.items()
            if not table_only or name in self.table_names
            for t in tensors
        )

    def zero_grads(self) -> None:
        for _, t in self.named_params():
            t.zero_grad()
