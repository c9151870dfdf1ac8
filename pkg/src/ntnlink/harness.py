"""Monte Carlo link evaluation: estimation-based vs prediction-based systems.

Each iteration draws one two-slot burst (fading, residual CFO, noise) and
runs both receivers on identical realizations, so metric differences are
attributable to the channel-knowledge source alone:

  estimation branch   pilots in both slots, LS + interpolation per slot
  prediction branch   pilots in slot 0 only; slot 0 produces a
                      data-and-pilot-aided estimate that the predictor maps
                      to a slot-1 CFR (or that is reused as-is when running
                      the persistence baseline)

Blocks are one codeword per slot. Iterations execute in fixed waves with
per-index RNG streams, so results do not depend on the worker count; a run
stops once both branches have collected `min_block_errors` block errors or
at `max_iterations`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from ntnlink import channel as ch
from ntnlink.errors import ConfigurationError
from ntnlink.parallel import run_chunked
from ntnlink.phy import chain
from ntnlink.phy import grid as rg

WAVE_SIZE = 256

_STREAM_CHAN = 11
_STREAM_CFO = 12
_STREAM_NOISE = 13
_STREAM_BITS = 14


@dataclass(frozen=True)
class ScenarioConfig:
    eb_n0_db: float = 10.0
    data_mod_order: int = 16
    code_rate: float = 0.75
    channel_profile: str = "NTN-TDL-C"
    ue_speed_kmh: float = 5.0
    carrier_hz: float = 2e9
    predictor_path: str | None = None   # None runs the persistence baseline
    max_iterations: int = 100_000
    min_block_errors: int = 100
    seed: int = 0
    perfect_csi: bool = False
    label: str = ""


@dataclass
class MetricsRecord:
    eb_n0_db: float
    ber_uncoded_est: float
    ber_uncoded_pred: float
    bler_e: float
    bler_p: float
    tp_e_bps: float
    tp_p_bps: float
    nmse_pred_db: float
    nmse_est_db: float
    iterations_run: int
    wall_time_s: float
    ber_est_ci: tuple = (0.0, 1.0)
    ber_pred_ci: tuple = (0.0, 1.0)
    bler_e_ci: tuple = (0.0, 1.0)
    bler_p_ci: tuple = (0.0, 1.0)
    mod_order: int = 16
    ue_speed_kmh: float = 5.0
    channel_profile: str = ""
    label: str = ""
    warnings: list = field(default_factory=list)


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054):
    """95% binomial confidence interval (Wilson score)."""
    if trials == 0:
        return (0.0, 1.0)
    p = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


# -- throughput formulas ----------------------------------------------------

T_SLOT_S = 1e-3
N_PILOT_COLS = len(rg.PILOT_COLS)


def throughput_estimation(bler_e: float, mod_order: int, code_rate: float) -> float:
    """Estimation-based system throughput in bit/s at the given slot BLER."""
    m = math.log2(mod_order)
    peak = m * code_rate * rg.N_SC * (rg.N_SYM_SLOT - N_PILOT_COLS) / T_SLOT_S
    return peak * (1.0 - bler_e)


def throughput_prediction(bler_e: float, bler_p: float, mod_order: int,
                          code_rate: float) -> float:
    """Prediction-based system throughput: pilot-bearing and pilot-free slots
    alternate, the latter carrying a full 14 symbols of data."""
    m = math.log2(mod_order)
    peak_free = m * code_rate * rg.N_SC * rg.N_SYM_SLOT / T_SLOT_S
    return (throughput_estimation(bler_e, mod_order, code_rate)
            + peak_free * (1.0 - bler_p)) / 2.0


# -- per-iteration simulation ------------------------------------------------

_MODEL_CACHE: dict = {}


def _get_model(path: str):
    if path not in _MODEL_CACHE:
        from ntnlink.predictor import ChannelPredictor

        model, _ = ChannelPredictor.from_checkpoint(path)
        _MODEL_CACHE[path] = model
    return _MODEL_CACHE[path]


@dataclass
class _Acc:
    iters: int = 0
    bits_e: int = 0
    bit_err_e: int = 0
    bits_p: int = 0
    bit_err_p: int = 0
    blocks_e: int = 0
    blk_err_e: int = 0
    blocks_p: int = 0
    blk_err_p: int = 0
    nmse_pred_num: float = 0.0
    nmse_est_num: float = 0.0
    nmse_den: float = 0.0
    untrained_model: bool = False

    def add(self, other: "_Acc") -> None:
        for f in ("iters", "bits_e", "bit_err_e", "bits_p", "bit_err_p", "blocks_e",
                  "blk_err_e", "blocks_p", "blk_err_p", "nmse_pred_num",
                  "nmse_est_num", "nmse_den"):
            setattr(self, f, getattr(self, f) + getattr(other, f))
        self.untrained_model |= other.untrained_model


def _iterate(config: ScenarioConfig, lo: int, hi: int) -> _Acc:
    model = _get_model(config.predictor_path) if config.predictor_path else None
    acc = _Acc()
    if model is not None and model.trained_epochs == 0:
        acc.untrained_model = True

    profile = ch.load_profile(config.channel_profile)
    doppler = ch.doppler_from_speed(config.ue_speed_kmh, config.carrier_hz)
    cfo = ch.CfoProcess(ch.cfo_sigma_hz(config.carrier_hz))
    es_n0 = chain.es_n0_from_eb_n0(config.eb_n0_db, config.data_mod_order,
                                   config.code_rate)
    n0 = ch.noise_variance(es_n0)
    times = ch.symbol_centers(2 * rg.N_SYM_SLOT)

    lay_e = rg.ESTIMATION_LAYOUT
    lay_p = rg.PREDICTION_LAYOUT
    pilots = rg.pilot_symbols(lay_e)
    cod_e = [chain.slot_coding(lay_e, s, config.data_mod_order) for s in (0, 1)]
    cod_p = [chain.slot_coding(lay_p, s, config.data_mod_order) for s in (0, 1)]
    nsym = rg.N_SYM_SLOT

    for i in range(lo, hi):
        fading = ch.TdlFading(profile, doppler,
                              np.random.default_rng((config.seed, _STREAM_CHAN, i)))
        eps = cfo.draw(np.random.default_rng((config.seed, _STREAM_CFO, i)))
        h = ch.cfr_matrix(fading, eps, rg.N_SC, times)
        noise_rng = np.random.default_rng((config.seed, _STREAM_NOISE, i))
        w = ch.awgn(np.zeros((rg.N_SC, 2 * nsym), dtype=np.complex128), es_n0, noise_rng)
        bits_rng = np.random.default_rng((config.seed, _STREAM_BITS, i))

        # estimation branch: pilots in both slots
        tx_e = [chain.random_tx_slot(lay_e, s, cod_e[s], bits_rng) for s in (0, 1)]
        x_e = rg.build_grid([t[2] for t in tx_e], pilots, lay_e)
        y_e = h * x_e.entries + w
        for s in (0, 1):
            ys = y_e[:, s * nsym:(s + 1) * nsym]
            hs = h[:, s * nsym:(s + 1) * nsym]
            if config.perfect_csi:
                est = rg.ChannelEstimate(hs, rg.EstimateSource.INTERPOLATED)
            else:
                est = chain.pilot_slot_estimate(ys, pilots)
            info_hat, ok, hard, _ = chain.receive_slot(ys, est, lay_e, s, cod_e[s], n0)
            info, on_air, _ = tx_e[s]
            acc.bit_err_e += int(np.count_nonzero(hard != on_air))
            acc.bits_e += on_air.size
            acc.blk_err_e += int(not np.array_equal(info_hat, info))
            acc.blocks_e += 1
            if s == 1:
                acc.nmse_est_num += float(np.sum(np.abs(est.entries - hs) ** 2))

        # prediction branch: pilot-free second slot, same channel and noise
        tx_p = [chain.random_tx_slot(lay_p, s, cod_p[s], bits_rng) for s in (0, 1)]
        x_p = rg.build_grid([t[2] for t in tx_p], pilots, lay_p)
        y_p = h * x_p.entries + w
        y0, y1 = y_p[:, :nsym], y_p[:, nsym:]
        h1 = h[:, nsym:]
        if config.perfect_csi:
            h1_hat = rg.ChannelEstimate(h1, rg.EstimateSource.PREDICTED)
        else:
            interp = chain.pilot_slot_estimate(y0, pilots)
            da = chain.data_aided_estimate(y0, interp, pilots, lay_p,
                                           cod_p[0].const, 0)
            if model is None:
                h1_hat = rg.ChannelEstimate(da.entries.copy(),
                                            rg.EstimateSource.PREDICTED)
            else:
                h1_hat = rg.ChannelEstimate(model.predict(da.entries),
                                            rg.EstimateSource.PREDICTED)
        info_hat, ok, hard, _ = chain.receive_slot(y1, h1_hat, lay_p, 1, cod_p[1], n0)
        info, on_air, _ = tx_p[1]
        acc.bit_err_p += int(np.count_nonzero(hard != on_air))
        acc.bits_p += on_air.size
        acc.blk_err_p += int(not np.array_equal(info_hat, info))
        acc.blocks_p += 1
        acc.nmse_pred_num += float(np.sum(np.abs(h1_hat.entries - h1) ** 2))
        acc.nmse_den += float(np.sum(np.abs(h1) ** 2))
        acc.iters += 1
    return acc


def _iterate_star(args, lo, hi):
    config, offset = args
    return _iterate(config, offset + lo, offset + hi)


def _db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else float("-inf")


def run_scenario(config: ScenarioConfig, threads: int = 1) -> MetricsRecord:
    if config.predictor_path:
        _get_model(config.predictor_path)  # fail fast on bad checkpoints
    t0 = time.perf_counter()
    acc = _Acc()
    done = 0
    while done < config.max_iterations:
        hi = min(done + WAVE_SIZE, config.max_iterations)
        for part in run_chunked(_iterate_star, (config, done), hi - done, threads):
            acc.add(part)
        done = hi
        if min(acc.blk_err_e, acc.blk_err_p) >= config.min_block_errors:
            break
    wall = time.perf_counter() - t0
    warnings = []
    if acc.untrained_model:
        warnings.append("predictor checkpoint has no training epochs")
    bler_e = acc.blk_err_e / acc.blocks_e
    bler_p = acc.blk_err_p / acc.blocks_p
    return MetricsRecord(
        eb_n0_db=config.eb_n0_db,
        ber_uncoded_est=acc.bit_err_e / acc.bits_e,
        ber_uncoded_pred=acc.bit_err_p / acc.bits_p,
        bler_e=bler_e,
        bler_p=bler_p,
        tp_e_bps=throughput_estimation(bler_e, config.data_mod_order, config.code_rate),
        tp_p_bps=throughput_prediction(bler_e, bler_p, config.data_mod_order,
                                       config.code_rate),
        nmse_pred_db=_db(acc.nmse_pred_num / acc.nmse_den) if acc.nmse_den else float("nan"),
        nmse_est_db=_db(acc.nmse_est_num / acc.nmse_den) if acc.nmse_den else float("nan"),
        iterations_run=acc.iters,
        wall_time_s=wall,
        ber_est_ci=wilson_interval(acc.bit_err_e, acc.bits_e),
        ber_pred_ci=wilson_interval(acc.bit_err_p, acc.bits_p),
        bler_e_ci=wilson_interval(acc.blk_err_e, acc.blocks_e),
        bler_p_ci=wilson_interval(acc.blk_err_p, acc.blocks_p),
        mod_order=config.data_mod_order,
        ue_speed_kmh=config.ue_speed_kmh,
        channel_profile=config.channel_profile,
        label=config.label,
        warnings=warnings,
    )


SWEEP_AXES = ("ebn0", "speed", "channel", "mod")


def sweep(base: ScenarioConfig, axis: str, values, threads: int = 1,
          train_ckpts: dict[str, str] | None = None) -> list[MetricsRecord]:
    """One record per axis value, paired seeds across values.

    The channel axis crosses the test profiles in `values` with the training
    checkpoints in `train_ckpts` (mapping label -> checkpoint prefix),
    yielding one record per (test, training) combination.
    """
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"unknown sweep axis {axis!r} (use {SWEEP_AXES})")
    if not values:
        raise ConfigurationError("sweep needs at least one value")
    records = []
    if axis == "channel":
        ckpts = train_ckpts or {"persistence": None}
        for test_profile in values:
            for train_label, path in ckpts.items():
                cfg = replace(base, channel_profile=str(test_profile),
                              predictor_path=path,
                              label=f"{test_profile} ({train_label})")
                records.append(run_scenario(cfg, threads))
        return records
    for v in values:
        if axis == "ebn0":
            cfg = replace(base, eb_n0_db=float(v))
        elif axis == "speed":
            cfg = replace(base, ue_speed_kmh=float(v))
        else:
            cfg = replace(base, data_mod_order=int(v))
        records.append(run_scenario(cfg, threads))
    return records
