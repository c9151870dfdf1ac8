"""Training-set synthesis: run the slot-0 receive cascade on fresh channel
realizations and pair the resulting data-and-pilot-aided estimate with the
true CFR of the following slot.

Coding is skipped here on purpose: the estimation cascade demaps and remaps
symbols before any decoding, so i.i.d. random data symbols produce exactly
the same estimate statistics as LDPC-coded ones at a fraction of the cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ntnlink import channel as ch
from ntnlink.nn.optim import LrSchedule
from ntnlink.phy import chain
from ntnlink.phy import grid as rg
from ntnlink.phy.qam import make_constellation, qam_map
from ntnlink.predictor import norm_scale_of

STREAM_TRAIN = 1
STREAM_VAL = 2
STREAM_HELDOUT = 3

_SLOT0_LAYOUT = rg.GridLayout(n_slots=1, pilot_slots=(0,))


@dataclass
class TrainConfig:
    batch_size: int = 1024
    eb_n0_grid_db: tuple = tuple(float(v) for v in range(0, 11))
    lr_schedule: LrSchedule = field(default_factory=LrSchedule)
    l2: float = 1e-6
    early_stop_patience_cycles: int = 3
    channel_profile: str = "NTN-TDL-C"
    ue_speed_kmh: float = 5.0
    data_mod_order: int = 16
    code_rate: float = 0.75
    carrier_hz: float = 2e9
    seed: int = 0
    max_epochs: int = 2000
    steps_per_epoch: int = 4

    @property
    def patience_epochs(self) -> int:
        return self.early_stop_patience_cycles * self.lr_schedule.annealing_period_epochs


@dataclass
class TrainingSample:
    input_estimate: np.ndarray   # complex (48, 14), data-aided LS of slot n
    target_truth: np.ndarray     # complex (48, 14), true CFR of slot n+1
    norm_scale: float
    eb_n0_db: float


def generate_sample(config: TrainConfig, rng: np.random.Generator) -> TrainingSample:
    profile = ch.load_profile(config.channel_profile)
    doppler = ch.doppler_from_speed(config.ue_speed_kmh, config.carrier_hz)
    fading = ch.TdlFading(profile, doppler, rng)
    eps_d = ch.CfoProcess(ch.cfo_sigma_hz(config.carrier_hz)).draw(rng)
    h_burst = ch.cfr_matrix(fading, eps_d, rg.N_SC, ch.symbol_centers(2 * rg.N_SYM_SLOT))

    eb_n0 = float(rng.choice(np.asarray(config.eb_n0_grid_db)))
    es_n0 = chain.es_n0_from_eb_n0(eb_n0, config.data_mod_order, config.code_rate)
    n0 = ch.noise_variance(es_n0)

    const = make_constellation(config.data_mod_order)
    layout = _SLOT0_LAYOUT
    nbits = layout.data_capacity(0) * const.bits_per_symbol
    symbols = qam_map(rng.integers(0, 2, nbits), const)
    pilots = rg.pilot_symbols(layout)
    x0 = rg.build_grid([symbols], pilots, layout).entries

    y0 = ch.awgn(h_burst[:, :rg.N_SYM_SLOT] * x0, es_n0, rng)
    est = chain.pilot_slot_estimate(y0, pilots)
    est = chain.data_aided_estimate(y0, est, pilots, layout, const, 0)

    h_in = est.entries
    return TrainingSample(input_estimate=h_in,
                          target_truth=h_burst[:, rg.N_SYM_SLOT:],
                          norm_scale=float(norm_scale_of(h_in[None])[0]),
                          eb_n0_db=eb_n0)


def _sample_chunk(args, lo: int, hi: int) -> list[TrainingSample]:
    """Vectorized across the chunk; draws every random in exactly the order
    generate_sample consumes its per-sample stream, so the output matches the
    per-sample reference path to float round-off (summation order differs).
    This path is itself deterministic: reruns and any thread count give
    bit-identical datasets."""
    config, stream, epoch = args
    b = hi - lo
    profile = ch.load_profile(config.channel_profile)
    doppler = ch.doppler_from_speed(config.ue_speed_kmh, config.carrier_hz)
    sigma_cfo = ch.cfo_sigma_hz(config.carrier_hz)
    const = make_constellation(config.data_mod_order)
    layout = _SLOT0_LAYOUT
    nsym = rg.N_SYM_SLOT
    nbits = layout.data_capacity(0) * const.bits_per_symbol
    grid_db = np.asarray(config.eb_n0_grid_db)
    n_taps, n_sin = profile.n_taps, 64
    los = profile.los_index

    arrival = np.empty((b, n_taps, n_sin))
    phase = np.empty((b, n_taps, n_sin))
    los_phase = np.empty(b)
    eps = np.empty(b)
    ebn0 = np.empty(b)
    bits = np.empty((b, nbits), dtype=np.int64)
    noise = np.zeros((b, rg.N_SC, nsym), dtype=np.complex128)
    for j, i in enumerate(range(lo, hi)):
        rng = np.random.default_rng((config.seed, stream, epoch, i))
        arrival[j] = rng.uniform(0.0, 2.0 * np.pi, size=(n_taps, n_sin))
        phase[j] = rng.uniform(0.0, 2.0 * np.pi, size=(n_taps, n_sin))
        if los is not None:
            los_phase[j] = rng.uniform(0.0, 2.0 * np.pi)
        eps[j] = rng.normal(0.0, sigma_cfo)
        ebn0[j] = float(rng.choice(grid_db))
        bits[j] = rng.integers(0, 2, nbits)
        es = chain.es_n0_from_eb_n0(ebn0[j], config.data_mod_order, config.code_rate)
        if not np.isinf(es):
            sig = np.sqrt(ch.noise_variance(es) / 2.0)
            noise[j] = rng.normal(0.0, sig, size=(rg.N_SC, nsym)) \
                + 1j * rng.normal(0.0, sig, size=(rg.N_SC, nsym))

    # per-tap gains over the burst, (b, taps, 28)
    times = ch.symbol_centers(2 * nsym)
    omega = 2.0 * np.pi * doppler * np.cos(arrival)
    g = np.exp(1j * (omega[..., None] * times + phase[..., None])).sum(axis=2)
    g /= np.sqrt(n_sin)
    if los is not None:
        k_lin = 10.0 ** (profile.rician_k_db / 10.0)
        los_omega = 2.0 * np.pi * ch.LOS_DOPPLER_FRACTION * doppler
        det = np.sqrt(k_lin / (k_lin + 1.0)) * np.exp(
            1j * (los_omega * times[None, :] + los_phase[:, None]))
        g[:, los] = np.sqrt(1.0 / (k_lin + 1.0)) * g[:, los] + det
    g *= np.sqrt(profile.powers_lin)[None, :, None]
    freqs = np.arange(rg.N_SC) * ch.SUBCARRIER_SPACING_HZ
    steering = np.exp(-2j * np.pi * np.outer(freqs, profile.delays_s))
    h = np.einsum("fn,bnl->bfl", steering, g)
    h *= np.exp(2j * np.pi * eps[:, None] * times)[:, None, :]

    # slot-0 transmit grid and receive cascade
    pilots = rg.pilot_symbols(layout)
    cols = layout.data_cols(0)
    pcols = np.asarray(layout.pilot_cols)
    syms = qam_map(bits.ravel(), const).reshape(b, cols.size, rg.N_SC)
    x0 = np.empty((b, rg.N_SC, nsym), dtype=np.complex128)
    x0[:, :, cols] = syms.transpose(0, 2, 1)
    x0[:, :, pcols] = pilots
    y0 = h[:, :, :nsym] * x0 + noise

    ls = y0[:, :, pcols] / pilots
    left, right, frac = rg._interp_weights(tuple(layout.pilot_cols), nsym)
    dense = ls[:, :, left] * (1.0 - frac) + ls[:, :, right] * frac
    eq = np.zeros_like(y0)
    np.divide(y0, dense, out=eq, where=np.abs(dense) >= rg.EQ_ERASURE_GAIN)
    # nearest constellation point per axis (same tables as the hard demapper)
    lv = const.axis_levels
    re_hat = lv[np.abs(eq[:, :, cols][..., None].real - lv).argmin(axis=3)]
    im_hat = lv[np.abs(eq[:, :, cols][..., None].imag - lv).argmin(axis=3)]
    x_tilde = x0.copy()
    x_tilde[:, :, cols] = re_hat + 1j * im_hat
    da = y0 / x_tilde

    scales = np.sqrt(np.maximum(np.mean(np.abs(da) ** 2, axis=(1, 2)) / 2.0, 1e-300))
    return [TrainingSample(input_estimate=da[j], target_truth=h[j, :, nsym:],
                           norm_scale=float(scales[j]), eb_n0_db=float(ebn0[j]))
            for j in range(b)]


def make_dataset(config: TrainConfig, n_samples: int, stream: int, epoch: int = 0,
                 eb_n0_override: float | None = None, threads: int = 1
                 ) -> list[TrainingSample]:
    """Independent per-sample RNG streams keyed by (seed, stream, epoch, i):
    regenerated epochs never share randomness and the result is independent
    of the thread count."""
    from ntnlink.parallel import run_chunked

    if eb_n0_override is not None:
        config = _with_grid(config, (float(eb_n0_override),))
    chunks = run_chunked(_sample_chunk, (config, stream, epoch), n_samples, threads)
    out: list[TrainingSample] = []
    for c in chunks:
        out.extend(c)
    return out


def _with_grid(config: TrainConfig, grid: tuple) -> TrainConfig:
    from dataclasses import replace

    return replace(config, eb_n0_grid_db=grid)


def stack_batch(samples: list[TrainingSample]):
    """Normalized stacked tensors (input, target) plus the shared scales.

    Both tensors are scaled by the input's norm_scale, so the training MSE is
    the squared error normalized by input power.
    """
    h_in = np.stack([s.input_estimate for s in samples])
    h_tg = np.stack([s.target_truth for s in samples])
    scales = np.array([s.norm_scale for s in samples])
    from ntnlink.predictor import stack_complex

    x = stack_complex(h_in / scales[:, None, None])
    t = stack_complex(h_tg / scales[:, None, None])
    return x, t, scales


def persistence_nmse(samples: list[TrainingSample]) -> float:
    """NMSE of reusing slot n's estimate as the slot n+1 prediction."""
    num = 0.0
    den = 0.0
    for s in samples:
        num += float(np.sum(np.abs(s.input_estimate - s.target_truth) ** 2))
        den += float(np.sum(np.abs(s.target_truth) ** 2))
    return num / den
