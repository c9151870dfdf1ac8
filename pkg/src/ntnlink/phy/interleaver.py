"""Seeded pseudo-random bit interleaver; the permutation depends only on
(length, seed)."""

from __future__ import annotations

import numpy as np

from ntnlink.errors import UsageError


def _permutation(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng((int(seed), int(n))).permutation(n)


def interleave(bits, seed: int) -> np.ndarray:
    bits = np.asarray(bits)
    return bits[_permutation(bits.size, seed)]


def deinterleave(values, seed: int, expected_length: int | None = None) -> np.ndarray:
    values = np.asarray(values)
    if expected_length is not None and values.size != expected_length:
        raise UsageError(
            f"deinterleave length mismatch: got {values.size}, expected {expected_length}"
        )
    out = np.empty_like(values)
    out[_permutation(values.size, seed)] = values
    return out
