"""Time-varying NTN tapped-delay-line channel, CFO process, and AWGN.

Per-tap fading gains are generated with a sum-of-sinusoids Clarke model:
each non-LoS tap is a sum of `n_sinusoids` unit phasors with i.i.d. uniform
arrival angles and phases, yielding a complex-Gaussian process with the
classical Jakes autocorrelation J0(2*pi*fd*tau). A LoS-flagged tap carries a
deterministic phasor rotating at a fixed fraction of the maximum Doppler on
top of a scattered component, split by the profile's Rician K factor.

The channel is evaluated at OFDM symbol centers and held constant within a
symbol; the residual frequency error enters as a common per-symbol phase
ramp (inter-carrier leakage at <=200 Hz offset against 15 kHz spacing is
~-40 dB and is neglected).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from ntnlink.backend import kernels
from ntnlink.errors import ConfigurationError, UsageError

C_LIGHT = 299_792_458.0
SUBCARRIER_SPACING_HZ = 15_000.0
SLOT_DURATION_S = 1e-3
SYMBOLS_PER_SLOT = 14
DELAY_SPREAD_S = 30e-9
LOS_DOPPLER_FRACTION = 0.7


@dataclass(frozen=True)
class TapRow:
    delay_s: float
    power_lin: float
    is_los: bool


@dataclass(frozen=True)
class TdlProfile:
    name: str
    taps: tuple[TapRow, ...]
    delay_spread_s: float
    rician_k_db: float | None

    @property
    def n_taps(self) -> int:
        return len(self.taps)

    @property
    def delays_s(self) -> np.ndarray:
        return np.array([t.delay_s for t in self.taps])

    @property
    def powers_lin(self) -> np.ndarray:
        return np.array([t.power_lin for t in self.taps])

    @property
    def los_index(self) -> int | None:
        for i, t in enumerate(self.taps):
            if t.is_los:
                return i
        return None


@lru_cache(maxsize=1)
def _profile_table() -> dict:
    with resources.files("ntnlink.data").joinpath("ntn_tdl_profiles.json").open() as f:
        return json.load(f)["profiles"]


def load_profile(name: str, delay_spread_s: float = DELAY_SPREAD_S) -> TdlProfile:
    """Load a TDL profile by name, delays scaled by the RMS delay spread and
    linear tap powers normalized to unit total."""
    table = _profile_table()
    if name not in table:
        raise ConfigurationError(
            f"unknown channel profile {name!r} (available: {sorted(table)})"
        )
    raw = table[name]
    powers = np.array([10.0 ** (t["power_db"] / 10.0) for t in raw["taps"]])
    powers /= powers.sum()
    los_flags = [bool(t["los"]) for t in raw["taps"]]
    if sum(los_flags) > 1:
        raise ConfigurationError(f"profile {name!r} flags more than one LoS tap")
    taps = tuple(
        TapRow(delay_s=t["normalized_delay"] * delay_spread_s, power_lin=p, is_los=f)
        for t, p, f in zip(raw["taps"], powers, los_flags)
    )
    if taps[0].delay_s != 0.0:
        raise ConfigurationError(f"profile {name!r}: first tap delay must be 0")
    return TdlProfile(name=name, taps=taps, delay_spread_s=delay_spread_s,
                      rician_k_db=raw["rician_k_db"])


def doppler_from_speed(v_ue_kmh: float, fc_hz: float) -> float:
    """Maximum Doppler frequency for a terminal moving at v km/h."""
    if v_ue_kmh < 0:
        raise UsageError("speed must be >= 0")
    return (v_ue_kmh / 3.6) * fc_hz / C_LIGHT


class TdlFading:
    """Evolving per-tap complex gains h_n(t) for one burst.

    One instance owns one realization; time queries must move forward.
    Independent Monte Carlo iterations should build independent instances
    from per-iteration RNG streams.
    """

    def __init__(self, profile: TdlProfile, doppler_hz: float,
                 rng: np.random.Generator, n_sinusoids: int = 64,
                 rician_k_db: float | None = None):
        if doppler_hz < 0:
            raise UsageError("doppler_hz must be >= 0")
        self.profile = profile
        self.doppler_hz = float(doppler_hz)
        self.n_sinusoids = int(n_sinusoids)
        self.time_s = 0.0
        n = profile.n_taps
        arrival = rng.uniform(0.0, 2.0 * np.pi, size=(n, n_sinusoids))
        self.omega = 2.0 * np.pi * doppler_hz * np.cos(arrival)
        self.phase = rng.uniform(0.0, 2.0 * np.pi, size=(n, n_sinusoids))
        self.los_index = profile.los_index
        k_db = profile.rician_k_db if rician_k_db is None else rician_k_db
        if self.los_index is not None:
            if k_db is None:
                raise ConfigurationError(
                    f"profile {profile.name!r} has a LoS tap but no Rician K factor"
                )
            k_lin = 10.0 ** (k_db / 10.0)
            self.los_amp = np.sqrt(k_lin / (k_lin + 1.0))
            self.scatter_scale_los = np.sqrt(1.0 / (k_lin + 1.0))
            self.los_omega = 2.0 * np.pi * LOS_DOPPLER_FRACTION * doppler_hz
            self.los_phase = rng.uniform(0.0, 2.0 * np.pi)

    def tap_gains(self, times_s) -> np.ndarray:
        """Complex gains, shape (n_taps, len(times)). Times must not precede
        the last query (state advances monotonically within a burst)."""
        times = np.atleast_1d(np.asarray(times_s, dtype=np.float64))
        if times.size and times[0] < self.time_s - 1e-15:
            raise UsageError("fading state cannot move backwards in time")
        if times.size > 1 and np.any(np.diff(times) < 0):
            raise UsageError("times must be non-decreasing")
        g = kernels.sos_mix(self.omega, self.phase, times)
        g /= np.sqrt(self.n_sinusoids)
        if self.los_index is not None:
            i = self.los_index
            los = self.los_amp * np.exp(1j * (self.los_omega * times + self.los_phase))
            g[i] = self.scatter_scale_los * g[i] + los
        g *= np.sqrt(self.profile.powers_lin)[:, None]
        if times.size:
            self.time_s = float(times[-1])
        return g


@dataclass
class CfoProcess:
    """Residual frequency synchronization error, redrawn per burst."""

    sigma_hz: float

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.normal(0.0, self.sigma_hz))


def cfo_sigma_hz(fc_hz: float, ppm: float = 0.1) -> float:
    """Standard deviation putting 3 sigma at the ppm-of-carrier limit."""
    return ppm * 1e-6 * fc_hz / 3.0


def symbol_centers(n_symbols: int, slot_duration_s: float = SLOT_DURATION_S,
                   symbols_per_slot: int = SYMBOLS_PER_SLOT) -> np.ndarray:
    t_sym = slot_duration_s / symbols_per_slot
    return (np.arange(n_symbols) + 0.5) * t_sym


def cfr_matrix(fading: TdlFading, eps_d_hz: float, n_sc: int,
               symbol_times_s, subcarrier_spacing_hz: float = SUBCARRIER_SPACING_HZ
               ) -> np.ndarray:
    """Channel frequency response (n_sc x n_symbols).

    H[k, l] = exp(j 2 pi eps_d t_l) * sum_n h_n(t_l) exp(-j 2 pi k df tau_n)
    """
    times = np.asarray(symbol_times_s, dtype=np.float64)
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise UsageError("symbol times must be strictly increasing")
    gains = fading.tap_gains(times)
    freqs = np.arange(n_sc) * subcarrier_spacing_hz
    steering = np.exp(-2j * np.pi * np.outer(freqs, fading.profile.delays_s))
    h = steering @ gains
    h *= np.exp(2j * np.pi * eps_d_hz * times)[None, :]
    return h


def awgn(entries: np.ndarray, es_n0_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise for unit-energy symbols.

    es_n0_db = +inf returns the input unchanged.
    """
    if np.isinf(es_n0_db):
        return entries.copy()
    n0 = 10.0 ** (-es_n0_db / 10.0)
    sigma = np.sqrt(n0 / 2.0)
    noise = rng.normal(0.0, sigma, size=entries.shape) \
        + 1j * rng.normal(0.0, sigma, size=entries.shape)
    return entries + noise


def noise_variance(es_n0_db: float) -> float:
    return 0.0 if np.isinf(es_n0_db) else 10.0 ** (-es_n0_db / 10.0)
