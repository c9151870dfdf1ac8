"""Slot-ahead CFR predictor: conv encoder-decoder with an LSTM time core.

The network maps the complex 48x14 channel estimate of one slot to a
prediction of the next slot. The encoder compresses the frequency axis to a
singleton, an LSTM predicts along time on the compressed features, and the
decoder expands back to full frequency resolution with additive skip
connections. The final stride-1 convolution is linear and smooths the
blocking pattern that strided transposed convolutions produce.

Time handling: after the encoder the tensor is mirrored on the time axis so
the LSTM sees the most recent OFDM symbol first; the decoder and the skip
tensors operate in that mirrored order and one final mirror restores natural
symbol order.
"""

from __future__ import annotations

import numpy as np

from ntnlink.errors import UsageError
from ntnlink.nn import checkpoint as ckpt
from ntnlink.nn import ops
from ntnlink.nn.core import LayerSpec, ParamStore
from ntnlink.nn.layers import LSTM, BatchNorm, Conv2D, TConv2D, build_table_spec

N_SC = 48
N_SYM_SLOT = 14
LEAKY_SLOPE = 0.01


def architecture() -> list[LayerSpec]:
    """Ordered stack of layer descriptors; this is the checkpoint fingerprint."""
    return [
        build_table_spec("enc_conv", "Conv2D", 8, (6, 3), (12, 1), (0, 0, 1, 1),
                         activation="LeakyReLU", batchnorm=True),
        build_table_spec("skip_input", "Conv2D", 2, (1, 3), (1, 1), "same"),
        build_table_spec("skip_encoded", "Conv2D", 8, (1, 3), (1, 1), "same",
                         activation="LeakyReLU", batchnorm=True),
        LayerSpec(name="freq_flatten", kind="FrequencyFlatten"),
        LayerSpec(name="time_mirror_in", kind="TimeFlip"),
        build_table_spec("temporal_lstm", "LSTM", 16, (1, 1), (1, 1), (0, 0, 0, 0)),
        build_table_spec("expand_small", "TConv2D", 8, (4, 3), (1, 1), (0, 0, 1, 1),
                         activation="LeakyReLU", batchnorm=True),
        LayerSpec(name="add_skip_encoded", kind="Add"),
        build_table_spec("expand_full", "TConv2D", 2, (12, 3), (12, 1), (0, 0, 1, 1)),
        LayerSpec(name="add_skip_input", kind="Add"),
        build_table_spec("smooth_conv", "Conv2D", 2, (3, 3), (1, 1), "same"),
        LayerSpec(name="time_mirror_out", kind="TimeFlip"),
    ]


CORE_LAYER_NAMES = ("enc_conv", "skip_input", "skip_encoded", "temporal_lstm",
                    "expand_small", "expand_full", "smooth_conv")


def stack_complex(h):
    """(..., 48, 14) complex -> (..., 48, 14, 2) real/imag channels."""
    return np.ascontiguousarray(np.stack([h.real, h.imag], axis=-1))


def unstack_complex(x):
    return x[..., 0] + 1j * x[..., 1]


def norm_scale_of(h):
    """Per-sample scale so the stacked real tensor has unit average power.

    h is (..., 48, 14) complex; returns a scalar per leading batch entry.
    """
    power = np.mean(np.abs(h) ** 2, axis=(-2, -1)) / 2.0
    return np.sqrt(np.maximum(power, 1e-300))


class ChannelPredictor:
    def __init__(self, rng_seed: int = 0):
        self.rng_seed = int(rng_seed)
        self.trained_epochs = 0
        self.store = ParamStore(rng_seed=self.rng_seed)
        rng = np.random.default_rng(self.rng_seed)
        spec = {s.name: s for s in architecture()}
        self.enc_conv = Conv2D(spec["enc_conv"], 2, self.store, rng)
        self.enc_bn = BatchNorm("enc_conv_bn", 8, self.store)
        self.skip_input = Conv2D(spec["skip_input"], 2, self.store, rng)
        self.skip_encoded = Conv2D(spec["skip_encoded"], 8, self.store, rng)
        self.skip_encoded_bn = BatchNorm("skip_encoded_bn", 8, self.store)
        self.temporal_lstm = LSTM(spec["temporal_lstm"], 32, self.store, rng)
        self.expand_small = TConv2D(spec["expand_small"], 16, self.store, rng)
        self.expand_small_bn = BatchNorm("expand_small_bn", 8, self.store)
        self.expand_full = TConv2D(spec["expand_full"], 8, self.store, rng)
        self.smooth_conv = Conv2D(spec["smooth_conv"], 2, self.store, rng)
        self._cache = None

    # -- architecture metadata -------------------------------------------

    def fingerprint(self) -> list[dict]:
        return [s.fingerprint() for s in architecture()]

    def core_param_count(self) -> int:
        return self.store.param_count(table_only=True)

    def param_count(self) -> int:
        return self.store.param_count()

    # -- forward / backward on stacked real tensors -----------------------

    def forward_stacked(self, x, mode: str = "infer"):
        """x: (B, 48, 14, 2) normalized stacked input; returns same shape.

        mode: "train" uses batch statistics and updates BN running buffers,
        "val" uses batch statistics without touching the buffers, "infer"
        normalizes with the running buffers.
        """
        if mode not in ("train", "val", "infer"):
            raise UsageError(f"unknown forward mode {mode!r}")
        if x.ndim != 4 or x.shape[1:] != (N_SC, N_SYM_SLOT, 2):
            raise UsageError(f"expected (B, {N_SC}, {N_SYM_SLOT}, 2), got {x.shape}")
        train = mode in ("train", "val")
        update = mode == "train"
        c = {}
        e1 = self.enc_conv.forward(x)
        e1 = self.enc_bn.forward(e1, train, update)
        c["enc_pre"] = e1
        e1 = ops.leaky_relu(e1, LEAKY_SLOPE)

        s_in = self.skip_input.forward(x)
        s_enc = self.skip_encoded.forward(e1)
        s_enc = self.skip_encoded_bn.forward(s_enc, train, update)
        c["skip_enc_pre"] = s_enc
        s_enc = ops.leaky_relu(s_enc, LEAKY_SLOPE)

        seq = ops.time_flip(ops.frequency_flatten(e1))[:, 0]
        hs = self.temporal_lstm.forward(seq)
        d = hs[:, None, :, :]

        d1 = self.expand_small.forward(d)
        d1 = self.expand_small_bn.forward(d1, train, update)
        c["expand_small_pre"] = d1
        d1 = ops.leaky_relu(d1, LEAKY_SLOPE)
        d1 = d1 + ops.time_flip(s_enc)

        d2 = self.expand_full.forward(d1)
        d2 = d2 + ops.time_flip(s_in)

        out = self.smooth_conv.forward(d2)
        self._cache = c
        return ops.time_flip(out)

    def backward(self, gout):
        """Accumulates parameter gradients; returns grad w.r.t. the input."""
        if self._cache is None:
            raise UsageError("backward called before forward")
        c = self._cache
        g = ops.time_flip(gout)
        g2 = self.smooth_conv.backward(g)

        gx_skip_in = self.skip_input.backward(ops.time_flip(g2))
        g3 = self.expand_full.backward(g2)

        g_senc = ops.time_flip(g3)
        g_senc = ops.leaky_relu_backward(g_senc, c["skip_enc_pre"], LEAKY_SLOPE)
        g_senc = self.skip_encoded_bn.backward(g_senc)
        ge1_skip = self.skip_encoded.backward(g_senc)

        g4 = ops.leaky_relu_backward(g3, c["expand_small_pre"], LEAKY_SLOPE)
        g4 = self.expand_small_bn.backward(g4)
        g4 = self.expand_small.backward(g4)
        gseq = self.temporal_lstm.backward(np.ascontiguousarray(g4[:, 0]))
        ge1_main = ops.frequency_unflatten(ops.time_flip(gseq[:, None, :, :]), 4, 8)

        ge1 = ge1_main + ge1_skip
        ge1 = ops.leaky_relu_backward(ge1, c["enc_pre"], LEAKY_SLOPE)
        ge1 = self.enc_bn.backward(ge1)
        gx = self.enc_conv.backward(ge1)
        return gx + gx_skip_in

    # -- complex-matrix inference -----------------------------------------

    def predict(self, h_est):
        """Predict the next slot's CFR from a data-and-pilot-aided estimate.

        h_est: complex (48, 14) or (B, 48, 14). Inference runs batch-norm in
        running-statistics mode and denormalizes with the input's own scale.
        """
        h = np.asarray(h_est, dtype=np.complex128)
        single = h.ndim == 2
        if single:
            h = h[None]
        if h.shape[1:] != (N_SC, N_SYM_SLOT):
            raise UsageError(f"expected (*, {N_SC}, {N_SYM_SLOT}) complex, got {h.shape}")
        scale = norm_scale_of(h)
        x = stack_complex(h / scale[:, None, None])
        y = self.forward_stacked(x, mode="infer")
        out = unstack_complex(y) * scale[:, None, None]
        return out[0] if single else out

    # -- persistence -------------------------------------------------------

    def state_tensors(self):
        items = [(name, p.data) for name, p in self.store.named_params()]
        for bn_name, bn in self._batchnorms():
            items.append((f"{bn_name}.running_mean", bn.running_mean))
            items.append((f"{bn_name}.running_var", bn.running_var))
        return items

    def _batchnorms(self):
        return [("enc_conv_bn", self.enc_bn),
                ("skip_encoded_bn", self.skip_encoded_bn),
                ("expand_small_bn", self.expand_small_bn)]

    def load_state_arrays(self, arrays):
        for name, arr in self.state_tensors():
            if name not in arrays:
                raise ckpt.CheckpointMismatch(f"checkpoint is missing tensor {name!r}")
            if arrays[name].shape != arr.shape:
                raise ckpt.CheckpointMismatch(
                    f"tensor {name!r} has shape {arrays[name].shape}, expected {arr.shape}"
                )
            arr[...] = arrays[name]

    def save(self, prefix, optimizer=None, epoch=None, meta=None):
        arrays = list(self.state_tensors())
        if optimizer is not None:
            arrays.extend(optimizer.state_arrays())
            meta = dict(meta or {})
            meta["adam_t"] = optimizer.t
        return ckpt.save_state(prefix, self.fingerprint(), arrays, self.rng_seed,
                               self.trained_epochs if epoch is None else epoch,
                               meta=meta)

    @classmethod
    def from_checkpoint(cls, prefix):
        manifest, arrays = ckpt.load_state(prefix)
        model = cls(rng_seed=manifest["rng_seed"])
        ckpt.check_fingerprint(model.fingerprint(), manifest["fingerprint"])
        model.load_state_arrays(arrays)
        model.trained_epochs = manifest["epoch"]
        return model, manifest
