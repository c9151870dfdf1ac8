"""Analytic per-layer multiplication counts and trainable-parameter totals.

Multiplication model: a convolution costs (output extents) x (input
channels) x (kernel area) x (filters); a transposed convolution costs the
same expression with its *input* extents; an LSTM with U units over an
Lt-step sequence costs Lt*U*(4N + 4U + 3). Normalization and activation
layers are excluded from the count and their parameters reported separately.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from ntnlink.errors import ConfigurationError

EXPECTED_TOTAL_MULS = 156_576
EXPECTED_CORE_PARAMS = 5_806


@dataclass(frozen=True)
class LayerCost:
    name: str
    kind: str
    input_shape: tuple
    output_shape: tuple
    muls: int
    params: int


@dataclass(frozen=True)
class ComplexityReport:
    layers: tuple
    total_muls: int
    trainable_params: int
    aux_params: int  # normalization scale/shift, outside the core count

    def as_dict(self) -> dict:
        return {
            "layers": [asdict(l) for l in self.layers],
            "total_muls": self.total_muls,
            "trainable_params": self.trainable_params,
            "aux_params": self.aux_params,
        }

    def table(self) -> str:
        rows = [f"{'layer':<14} {'kind':<8} {'in':<12} {'out':<12} {'muls':>9} {'params':>7}"]
        for l in self.layers:
            rows.append(f"{l.name:<14} {l.kind:<8} {str(l.input_shape):<12} "
                        f"{str(l.output_shape):<12} {l.muls:>9,} {l.params:>7,}")
        rows.append(f"{'total':<14} {'':<8} {'':<12} {'':<12} "
                    f"{self.total_muls:>9,} {self.trainable_params:>7,}")
        return "\n".join(rows)


def default_arch_entries() -> list[dict]:
    """The shipped predictor's trainable layers with resolved input shapes."""
    return [
        {"name": "enc_conv", "kind": "Conv2D", "filters_or_units": 8,
         "kernel": [6, 3], "stride": [12, 1], "pad_or_crop": [0, 0, 1, 1],
         "input_shape": [48, 14, 2], "batchnorm": True},
        {"name": "skip_input", "kind": "Conv2D", "filters_or_units": 2,
         "kernel": [1, 3], "stride": [1, 1], "pad_or_crop": [0, 0, 1, 1],
         "input_shape": [48, 14, 2], "batchnorm": False},
        {"name": "skip_encoded", "kind": "Conv2D", "filters_or_units": 8,
         "kernel": [1, 3], "stride": [1, 1], "pad_or_crop": [0, 0, 1, 1],
         "input_shape": [4, 14, 8], "batchnorm": True},
        {"name": "temporal_lstm", "kind": "LSTM", "filters_or_units": 16,
         "input_shape": [1, 14, 32], "batchnorm": False},
        {"name": "expand_small", "kind": "TConv2D", "filters_or_units": 8,
         "kernel": [4, 3], "stride": [1, 1], "pad_or_crop": [0, 0, 1, 1],
         "input_shape": [1, 14, 16], "batchnorm": True},
        {"name": "expand_full", "kind": "TConv2D", "filters_or_units": 2,
         "kernel": [12, 3], "stride": [12, 1], "pad_or_crop": [0, 0, 1, 1],
         "input_shape": [4, 14, 8], "batchnorm": False},
        {"name": "smooth_conv", "kind": "Conv2D", "filters_or_units": 2,
         "kernel": [3, 3], "stride": [1, 1], "pad_or_crop": [1, 1, 1, 1],
         "input_shape": [48, 14, 2], "batchnorm": False},
    ]


def layer_cost(entry: dict) -> LayerCost:
    kind = entry["kind"]
    lf, lt, n = entry["input_shape"]
    c = entry["filters_or_units"]
    if kind == "Conv2D":
        wf, wt = entry["kernel"]
        sf, st = entry["stride"]
        top, bot, left, right = entry["pad_or_crop"]
        of = (lf + top + bot - wf) // sf + 1
        ot = (lt + left + right - wt) // st + 1
        if of < 1 or ot < 1:
            raise ConfigurationError(f"{entry['name']}: non-positive output extent")
        muls = of * ot * n * wf * wt * c
        params = wf * wt * n * c + c
        out = (of, ot, c)
    elif kind == "TConv2D":
        wf, wt = entry["kernel"]
        sf, st = entry["stride"]
        top, bot, left, right = entry["pad_or_crop"]
        of = (lf - 1) * sf + wf - top - bot
        ot = (lt - 1) * st + wt - left - right
        if of < 1 or ot < 1:
            raise ConfigurationError(f"{entry['name']}: crop larger than output")
        muls = lf * lt * n * wf * wt * c
        params = wf * wt * n * c + c
        out = (of, ot, c)
    elif kind == "LSTM":
        muls = lt * c * (4 * n + 4 * c + 3)
        params = 4 * (n * c + c * c + c)
        out = (lf, lt, c)
    else:
        raise ConfigurationError(f"unsupported layer kind {kind!r} in complexity model")
    return LayerCost(name=entry["name"], kind=kind,
                     input_shape=tuple(entry["input_shape"]), output_shape=out,
                     muls=muls, params=params)


def complexity_report(entries: list[dict] | None = None) -> ComplexityReport:
    if entries is None:
        entries = default_arch_entries()
    layers = tuple(layer_cost(e) for e in entries)
    aux = sum(2 * l.output_shape[-1] for l, e in zip(layers, entries)
              if e.get("batchnorm"))
    return ComplexityReport(layers=layers,
                            total_muls=sum(l.muls for l in layers),
                            trainable_params=sum(l.params for l in layers),
                            aux_params=aux)


def report_from_arch_file(path: str) -> ComplexityReport:
    with open(path, encoding="utf-8") as f:
        entries = json.load(f)
    if not isinstance(entries, list):
        raise ConfigurationError("architecture file must be a JSON list of layers")
    return complexity_report(entries)
