"""Gray-mapped square QAM: mapping, hard decisions, and max-log soft demapping.

Square constellations are built per axis from reflected-Gray PAM tables with
the all-zeros label on the smallest positive level, so bit patterns of
neighbouring points differ in exactly one bit. The full tables are written
out in docs/gray_mapping.md. Points are scaled to unit average energy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ntnlink.errors import ConfigurationError, UsageError

# level of each bit label (index = integer value of the bit group, MSB first)
_PAM_LEVELS = {
    1: np.array([1.0, -1.0]),
    2: np.array([1.0, 3.0, -1.0, -3.0]),
    3: np.array([1.0, 3.0, 7.0, 5.0, -1.0, -3.0, -7.0, -5.0]),
}
_LLR_CLIP = 50.0
_ERASURE_GAIN = 1e-12


@dataclass(frozen=True)
class QamConstellation:
    order: int
    bits_per_symbol: int
    points: np.ndarray          # indexed by integer label, unit average energy
    axis_levels: np.ndarray     # scaled PAM levels indexed by per-axis label
    axis_bits: int

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points))
        object.__setattr__(self, "axis_levels", np.asarray(self.axis_levels))


@lru_cache(maxsize=8)
def make_constellation(order: int) -> QamConstellation:
    if order not in (4, 16, 64):
        raise ConfigurationError(f"unsupported QAM order {order} (use 4, 16, or 64)")
    m = int(np.log2(order))
    axis_bits = m // 2
    levels = _PAM_LEVELS[axis_bits]
    scale = np.sqrt(np.mean(levels ** 2) * 2.0)
    lv = levels / scale
    labels = np.arange(order)
    i_idx = labels >> axis_bits
    q_idx = labels & ((1 << axis_bits) - 1)
    points = lv[i_idx] + 1j * lv[q_idx]
    return QamConstellation(order=order, bits_per_symbol=m, points=points,
                            axis_levels=lv, axis_bits=axis_bits)


def qam_map(bits, const: QamConstellation) -> np.ndarray:
    """Bits (0/1 array, MSB-first per symbol) to unit-energy complex symbols."""
    bits = np.asarray(bits)
    m = const.bits_per_symbol
    if bits.size % m != 0:
        raise UsageError(f"bit count {bits.size} not divisible by {m}")
    groups = bits.reshape(-1, m)
    weights = 1 << np.arange(m - 1, -1, -1)
    labels = groups @ weights
    return const.points[labels]


def _axis_bits_of_levels(const: QamConstellation):
    """Per-axis (level, bit) tables: bit value of each label bit at each level."""
    nb = const.axis_bits
    labels = np.arange(1 << nb)
    bits = ((labels[:, None] >> np.arange(nb - 1, -1, -1)[None, :]) & 1).astype(bool)
    return bits  # bits[label, bit_position]


def qam_hard_demap(symbols, const: QamConstellation) -> np.ndarray:
    """Nearest-point decision returned as a flat bit array."""
    sym = np.asarray(symbols).ravel()
    nb = const.axis_bits
    out = np.empty((sym.size, 2 * nb), dtype=np.uint8)
    table = _axis_bits_of_levels(const)
    for axis, vals in ((0, sym.real), (1, sym.imag)):
        d = np.abs(vals[:, None] - const.axis_levels[None, :])
        label = d.argmin(axis=1)
        out[:, axis * nb:(axis + 1) * nb] = table[label]
    return out.ravel()


def qam_nearest(symbols, const: QamConstellation) -> np.ndarray:
    """Nearest constellation point for each input symbol."""
    bits = qam_hard_demap(symbols, const)
    return qam_map(bits, const).reshape(np.asarray(symbols).shape)


def qam_demap_soft(symbols_eq, channel_gains, noise_var, const: QamConstellation
                   ) -> np.ndarray:
    """Max-log LLRs for zero-forcing-equalized symbols.

    The effective per-symbol noise variance is noise_var / |h|^2. Positive
    LLR means bit 0 is more likely. Entries whose channel gain is below the
    erasure threshold get LLR 0; LLRs are clipped to +-50.
    """
    sym = np.asarray(symbols_eq).ravel()
    h = np.asarray(channel_gains).ravel()
    if sym.shape != h.shape:
        raise UsageError("symbols and channel gains must align")
    habs2 = np.abs(h) ** 2
    erased = np.abs(h) < _ERASURE_GAIN
    eff_var = np.maximum(noise_var, 1e-300) / np.maximum(habs2, _ERASURE_GAIN ** 2)

    nb = const.axis_bits
    table = _axis_bits_of_levels(const)          # (levels, nb) booleans
    llr = np.empty((sym.size, 2 * nb))
    for axis, vals in ((0, sym.real), (1, sym.imag)):
        d2 = (vals[:, None] - const.axis_levels[None, :]) ** 2   # (n, levels)
        for b in range(nb):
            ones = table[:, b]
            d_one = d2[:, ones].min(axis=1)
            d_zero = d2[:, ~ones].min(axis=1)
            llr[:, axis * nb + b] = (d_one - d_zero) / eff_var
    llr = np.clip(llr, -_LLR_CLIP, _LLR_CLIP)
    llr[erased, :] = 0.0
    return llr.ravel()
