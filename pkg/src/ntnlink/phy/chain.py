"""Per-slot transmit and receive pipelines shared by the Monte Carlo harness
and the training-set generator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ntnlink.phy import grid as rg
from ntnlink.phy.interleaver import deinterleave, interleave
from ntnlink.phy.ldpc import LdpcCode, ldpc_decode, ldpc_encode, load_code
from ntnlink.phy.qam import (QamConstellation, make_constellation,
                             qam_demap_soft, qam_hard_demap, qam_map)

INTERLEAVER_SEED_BASE = 0xC0FFEE


def es_n0_from_eb_n0(eb_n0_db: float, mod_order: int, code_rate: float) -> float:
    """Energy-per-symbol SNR from energy-per-information-bit SNR; pilot
    overhead is excluded from the accounting."""
    if np.isinf(eb_n0_db):
        return eb_n0_db
    m = np.log2(mod_order)
    return eb_n0_db + 10.0 * np.log10(m * code_rate)


@dataclass(frozen=True)
class SlotCoding:
    code: LdpcCode
    const: QamConstellation
    interleaver_seed: int


def slot_coding(layout: rg.GridLayout, slot: int, mod_order: int) -> SlotCoding:
    m = int(np.log2(mod_order))
    n_coded = layout.data_capacity(slot) * m
    return SlotCoding(code=load_code(n_coded), const=make_constellation(mod_order),
                      interleaver_seed=INTERLEAVER_SEED_BASE + slot)


def transmit_slot(info_bits: np.ndarray, coding: SlotCoding) -> tuple[np.ndarray, np.ndarray]:
    """Encode, interleave, and map one slot. Returns (coded bits as sent
    on-air after interleaving, data symbols)."""
    coded = ldpc_encode(info_bits, coding.code)
    on_air = interleave(coded, coding.interleaver_seed)
    return on_air, qam_map(on_air, coding.const)


def random_tx_slot(layout: rg.GridLayout, slot: int, coding: SlotCoding,
                   rng: np.random.Generator):
    """Random info bits through the full TX pipeline for one slot."""
    info = rng.integers(0, 2, coding.code.k).astype(np.uint8)
    on_air, symbols = transmit_slot(info, coding)
    return info, on_air, symbols


def receive_slot(y_slot: np.ndarray, est: rg.ChannelEstimate, layout: rg.GridLayout,
                 slot: int, coding: SlotCoding, noise_var: float):
    """Equalize, soft-demap the data REs, deinterleave, and decode.

    Returns (decoded info bits, decode success, hard on-air bits, equalized
    data symbols).
    """
    eq, gains = rg.equalize(y_slot, est)
    data_eq = rg.extract_data(eq, layout, slot)
    data_gain = rg.extract_data(gains, layout, slot)
    llrs = qam_demap_soft(data_eq, data_gain, noise_var, coding.const)
    hard = qam_hard_demap(data_eq, coding.const)
    info_hat, ok = ldpc_decode(deinterleave(llrs, coding.interleaver_seed), coding.code)
    return info_hat, ok, hard, data_eq


def pilot_slot_estimate(y_slot: np.ndarray, pilots: np.ndarray,
                        pilot_cols=rg.PILOT_COLS) -> rg.ChannelEstimate:
    """LS at the pilots, then time interpolation across the slot."""
    return rg.interpolate_slot(rg.ls_pilot_estimate(y_slot, pilots, pilot_cols))


def data_aided_estimate(y_slot: np.ndarray, est_interp: rg.ChannelEstimate,
                        pilots: np.ndarray, layout: rg.GridLayout,
                        const: QamConstellation, slot: int = 0) -> rg.ChannelEstimate:
    """Equalize with the interpolated estimate, hard-demap, remap, and run LS
    over the whole slot with the remapped symbols as virtual pilots."""
    eq, _ = rg.equalize(y_slot, est_interp)
    data_eq = rg.extract_data(eq, layout, slot)
    remapped = qam_map(qam_hard_demap(data_eq, const), const)
    return rg.data_aided_ls(y_slot, remapped, pilots, layout, slot)
