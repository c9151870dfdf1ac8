import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ntnlink.errors import UsageError
from ntnlink.phy.interleaver import deinterleave, interleave


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5000), st.integers(0, 2**31))
def test_deinterleave_inverts_interleave(n, seed):
    bits = np.random.default_rng(n).integers(0, 2, n)
    np.testing.assert_array_equal(deinterleave(interleave(bits, seed), seed), bits)


def test_permutation_depends_only_on_length_and_seed():
    a = np.arange(257)
    assert np.array_equal(interleave(a, 7), interleave(a, 7))
    assert not np.array_equal(interleave(a, 7), interleave(a, 8))


def test_singleton_unchanged():
    np.testing.assert_array_equal(interleave(np.array([1]), 3), [1])


def test_interleave_actually_permutes():
    a = np.arange(512)
    out = interleave(a, 1)
    assert not np.array_equal(out, a)
    assert sorted(out) == list(a)


def test_deinterleave_length_check():
    with pytest.raises(UsageError):
        deinterleave(np.zeros(10), 0, expected_length=12)
