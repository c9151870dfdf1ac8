"""Full TX->RX pipelines: noiseless identities and SNR bookkeeping."""

import numpy as np
import pytest

from ntnlink import channel as ch
from ntnlink.phy import chain
from ntnlink.phy import grid as rg


@pytest.mark.parametrize("mod_order", [4, 16, 64])
def test_end_to_end_noiseless_identity_flat_channel(mod_order):
    """Flat unit channel, no noise, no CFO: the chain is the identity."""
    lay = rg.PREDICTION_LAYOUT
    pilots = rg.pilot_symbols(lay)
    rng = np.random.default_rng(mod_order)
    h = np.ones((48, 28), dtype=complex)
    infos, grids = [], []
    for s in (0, 1):
        coding = chain.slot_coding(lay, s, mod_order)
        info, on_air, syms = chain.random_tx_slot(lay, s, coding, rng)
        infos.append((coding, info, on_air))
        grids.append(syms)
    x = rg.build_grid(grids, pilots, lay)
    y = h * x.entries
    for s in (0, 1):
        coding, info, on_air = infos[s]
        ys = y[:, s * 14:(s + 1) * 14]
        if s == 0:
            est = chain.pilot_slot_estimate(ys, pilots)
        else:
            est = rg.ChannelEstimate(np.ones((48, 14), complex),
                                     rg.EstimateSource.PREDICTED)
        info_hat, ok, hard, _ = chain.receive_slot(ys, est, lay, s, coding, 1e-12)
        assert ok
        np.testing.assert_array_equal(info_hat, info)
        np.testing.assert_array_equal(hard, on_air)


def test_estimation_layout_end_to_end_noiseless_faded():
    """Noiseless but frequency-selective: interpolated LS still decodes."""
    lay = rg.ESTIMATION_LAYOUT
    pilots = rg.pilot_symbols(lay)
    rng = np.random.default_rng(9)
    prof = ch.load_profile("NTN-TDL-C")
    fad = ch.TdlFading(prof, ch.doppler_from_speed(5, 2e9), rng)
    h = ch.cfr_matrix(fad, 0.0, 48, ch.symbol_centers(28))
    infos, grids = [], []
    for s in (0, 1):
        coding = chain.slot_coding(lay, s, 16)
        info, on_air, syms = chain.random_tx_slot(lay, s, coding, rng)
        infos.append((coding, info))
        grids.append(syms)
    x = rg.build_grid(grids, pilots, lay)
    y = h * x.entries
    for s in (0, 1):
        coding, info = infos[s]
        ys = y[:, s * 14:(s + 1) * 14]
        est = chain.pilot_slot_estimate(ys, pilots)
        info_hat, ok, _, _ = chain.receive_slot(ys, est, lay, s, coding, 1e-12)
        assert ok and np.array_equal(info_hat, info)


def test_es_n0_mapping():
    assert chain.es_n0_from_eb_n0(8.5, 4, 0.75) == pytest.approx(
        8.5 + 10 * np.log10(2 * 0.75))
    assert chain.es_n0_from_eb_n0(10.0, 16, 0.75) == pytest.approx(
        10.0 + 10 * np.log10(4 * 0.75))
    assert chain.es_n0_from_eb_n0(np.inf, 16, 0.75) == np.inf


def test_slot_coding_sizes():
    lay = rg.PREDICTION_LAYOUT
    c0 = chain.slot_coding(lay, 0, 16)
    c1 = chain.slot_coding(lay, 1, 16)
    assert c0.code.n == 48 * 12 * 4
    assert c1.code.n == 48 * 14 * 4
    assert c0.interleaver_seed != c1.interleaver_seed


def test_pilot_ls_error_statistics():
    """At unit pilot energy the per-RE LS error variance is N0."""
    lay = rg.PREDICTION_LAYOUT
    pilots = rg.pilot_symbols(lay)
    rng = np.random.default_rng(11)
    n0 = 10.0 ** (-0.7)
    trials = 1200
    sq = []
    raw = []
    h = np.ones((48, 14), complex)
    x = np.zeros((48, 14), complex)
    x[:, [3, 12]] = pilots
    for _ in range(trials):
        y = ch.awgn(h * x, 7.0, rng)
        est = rg.ls_pilot_estimate(y, pilots)
        err = est.entries - 1.0
        sq.append(np.abs(err) ** 2)
        raw.append(err)
    assert float(np.mean(sq)) == pytest.approx(n0, rel=0.03)
    # unbiasedness: the mean complex error sits within 3 standard errors of 0
    se = np.sqrt(n0 / (trials * 96))
    assert abs(np.mean(raw)) < 3 * se
