"""Resource-grid assembly and the channel-estimation cascade.

A burst is 48 subcarriers by two 14-symbol slots. Pilot-bearing slots put
4-QAM pilots on every subcarrier of symbol columns 3 and 12 (0-based within
the slot); the pilot-removal scheme keeps those columns in slot 0 only and
fills slot 1 entirely with data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from ntnlink.errors import UsageError
from ntnlink.phy.qam import QamConstellation, make_constellation, qam_map

N_SC = 48
N_SYM_SLOT = 14
PILOT_COLS = (3, 12)
PILOT_ORDER = 4
EQ_ERASURE_GAIN = 1e-12


class EstimateSource(Enum):
    PILOT_LS = "pilot_ls"
    INTERPOLATED = "interpolated"
    DATA_AIDED_LS = "data_aided_ls"
    PREDICTED = "predicted"


@lru_cache(maxsize=8)
def _data_cols(n_sym_slot: int, pilot_cols: tuple) -> np.ndarray:
    cols = np.arange(n_sym_slot)
    if pilot_cols:
        cols = cols[~np.isin(cols, pilot_cols)]
    return cols


@dataclass
class ChannelEstimate:
    entries: np.ndarray
    source: EstimateSource
    pilot_cols: tuple[int, ...] = PILOT_COLS


@dataclass(frozen=True)
class GridLayout:
    """Which slots carry pilots. Data capacity is per slot in symbols."""

    n_sc: int = N_SC
    n_sym_slot: int = N_SYM_SLOT
    n_slots: int = 2
    pilot_cols: tuple[int, ...] = PILOT_COLS
    pilot_slots: tuple[int, ...] = (0, 1)

    def has_pilots(self, slot: int) -> bool:
        return slot in self.pilot_slots

    def data_cols(self, slot: int) -> np.ndarray:
        return _data_cols(self.n_sym_slot, self.pilot_cols if self.has_pilots(slot) else ())

    def data_capacity(self, slot: int) -> int:
        return self.n_sc * self.data_cols(slot).size

    @property
    def n_sym(self) -> int:
        return self.n_sym_slot * self.n_slots


ESTIMATION_LAYOUT = GridLayout(pilot_slots=(0, 1))
PREDICTION_LAYOUT = GridLayout(pilot_slots=(0,))


@dataclass
class ResourceGrid:
    entries: np.ndarray
    layout: GridLayout
    pilot_values: dict[int, np.ndarray] = field(default_factory=dict)

    def slot(self, index: int) -> np.ndarray:
        lo = index * self.layout.n_sym_slot
        return self.entries[:, lo:lo + self.layout.n_sym_slot]


@lru_cache(maxsize=8)
def _pilot_block(n_sc: int, n_cols: int, seed: int) -> np.ndarray:
    const = make_constellation(PILOT_ORDER)
    rng = np.random.default_rng((seed, n_sc, n_cols))
    bits = rng.integers(0, 2, n_sc * n_cols * 2)
    return qam_map(bits, const).reshape(n_sc, n_cols)


def pilot_symbols(layout: GridLayout, seed: int = 0x9e3779b9) -> np.ndarray:
    """Unit-energy 4-QAM pilot block (n_sc, len(pilot_cols)); fixed per seed
    so transmitter and receiver agree."""
    return _pilot_block(layout.n_sc, len(layout.pilot_cols), seed)


def build_grid(data_symbols: list[np.ndarray], pilots: np.ndarray,
               layout: GridLayout) -> ResourceGrid:
    """Assemble a burst grid from per-slot data symbols (column-major fill
    over the data columns) and the shared pilot block."""
    if len(data_symbols) != layout.n_slots:
        raise UsageError(f"expected {layout.n_slots} per-slot symbol vectors")
    grid = np.zeros((layout.n_sc, layout.n_sym), dtype=np.complex128)
    pilot_values: dict[int, np.ndarray] = {}
    for s, syms in enumerate(data_symbols):
        cap = layout.data_capacity(s)
        if syms.size != cap:
            raise UsageError(f"slot {s} expects {cap} data symbols, got {syms.size}")
        base = s * layout.n_sym_slot
        cols = layout.data_cols(s)
        grid[:, base + cols] = syms.reshape(cols.size, layout.n_sc).T
        if layout.has_pilots(s):
            grid[:, base + np.asarray(layout.pilot_cols)] = pilots
            pilot_values[s] = pilots
    return ResourceGrid(entries=grid, layout=layout, pilot_values=pilot_values)


def extract_data(entries_slot: np.ndarray, layout: GridLayout, slot: int) -> np.ndarray:
    """Inverse of the data placement for one slot (column-major over data cols)."""
    cols = layout.data_cols(slot)
    return entries_slot[:, cols].T.ravel()


def ls_pilot_estimate(y_slot: np.ndarray, pilots: np.ndarray,
                      pilot_cols=PILOT_COLS) -> ChannelEstimate:
    """Per-RE least squares at the pilot columns: H = Y / X."""
    if np.any(pilots == 0):
        raise UsageError("pilot symbols must be nonzero")
    values = y_slot[:, np.asarray(pilot_cols)] / pilots
    return ChannelEstimate(entries=values, source=EstimateSource.PILOT_LS,
                           pilot_cols=tuple(pilot_cols))


@lru_cache(maxsize=8)
def _interp_weights(pilot_cols: tuple, n_sym_slot: int):
    """Per-output-column (left pilot index, right pilot index, right weight)
    for linear interpolation with hold extrapolation."""
    cols = np.asarray(pilot_cols, dtype=np.float64)
    grid = np.arange(n_sym_slot, dtype=np.float64)
    right = np.clip(np.searchsorted(cols, grid, side="left"), 1, cols.size - 1)
    left = right - 1
    span = cols[right] - cols[left]
    frac = np.clip((grid - cols[left]) / span, 0.0, 1.0)
    return left, right, frac


def interpolate_slot(est: ChannelEstimate, n_sym_slot: int = N_SYM_SLOT
                     ) -> ChannelEstimate:
    """Linear interpolation in time between pilot columns, held constant
    before the first and after the last pilot."""
    if est.source is not EstimateSource.PILOT_LS:
        raise UsageError("interpolate_slot expects a pilot LS estimate")
    left, right, frac = _interp_weights(tuple(est.pilot_cols), n_sym_slot)
    v = est.entries
    dense = v[:, left] * (1.0 - frac) + v[:, right] * frac
    return ChannelEstimate(entries=dense, source=EstimateSource.INTERPOLATED,
                           pilot_cols=est.pilot_cols)


def equalize(y_slot: np.ndarray, est: ChannelEstimate) -> tuple[np.ndarray, np.ndarray]:
    """Zero forcing per RE. Entries whose estimate magnitude is below the
    erasure threshold are returned as zeros; the gains are passed through so
    the soft demapper can assign them zero LLRs."""
    h = est.entries
    if h.shape != y_slot.shape:
        raise UsageError(f"estimate shape {h.shape} != slot shape {y_slot.shape}")
    safe = np.abs(h) >= EQ_ERASURE_GAIN
    out = np.zeros_like(y_slot)
    np.divide(y_slot, h, out=out, where=safe)
    return out, h


def data_aided_ls(y_slot: np.ndarray, remapped_symbols: np.ndarray,
                  pilots: np.ndarray, layout: GridLayout, slot: int = 0
                  ) -> ChannelEstimate:
    """Second LS pass over a whole pilot-bearing slot: the hard-decided data
    symbols act as virtual pilots, the true pilots stay in place."""
    x = np.zeros_like(y_slot)
    cols = layout.data_cols(slot)
    x[:, cols] = remapped_symbols.reshape(cols.size, layout.n_sc).T
    x[:, np.asarray(layout.pilot_cols)] = pilots
    if np.any(x == 0):
        raise UsageError("remapped slot contains zero symbols")
    return ChannelEstimate(entries=y_slot / x, source=EstimateSource.DATA_AIDED_LS,
                           pilot_cols=layout.pilot_cols)
