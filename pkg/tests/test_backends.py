"""The numba kernels and the numpy fallback must agree on every kernel, and
conv/tconv must be exact adjoints when they share weights."""

import numpy as np
import pytest

from ntnlink import _kernels_numba as knb
from ntnlink import _kernels_numpy as knp


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(42)


def test_conv2d_kernels_agree(rng):
    x = rng.normal(size=(3, 48, 16, 2))
    w = rng.normal(size=(6, 3, 2, 8))
    y0 = knp.conv2d_fwd(x, w, 12, 1)
    y1 = knb.conv2d_fwd(x, w, 12, 1)
    np.testing.assert_allclose(y0, y1, atol=1e-12)
    gy = rng.normal(size=y0.shape)
    np.testing.assert_allclose(knp.conv2d_bwd_input(gy, w, 12, 1, 48, 16),
                               knb.conv2d_bwd_input(gy, w, 12, 1, 48, 16), atol=1e-12)
    gw0, gb0 = knp.conv2d_bwd_params(gy, x, 6, 3, 12, 1)
    gw1, gb1 = knb.conv2d_bwd_params(gy, x, 6, 3, 12, 1)
    np.testing.assert_allclose(gw0, gw1, atol=1e-11)
    np.testing.assert_allclose(gb0, gb1, atol=1e-11)


def test_tconv2d_kernels_agree(rng):
    x = rng.normal(size=(3, 4, 14, 8))
    w = rng.normal(size=(12, 3, 8, 2))
    y0 = knp.tconv2d_fwd(x, w, 12, 1)
    y1 = knb.tconv2d_fwd(x, w, 12, 1)
    np.testing.assert_allclose(y0, y1, atol=1e-12)
    gy = rng.normal(size=y0.shape)
    np.testing.assert_allclose(knp.tconv2d_bwd_input(gy, w, 12, 1, 4, 14),
                               knb.tconv2d_bwd_input(gy, w, 12, 1, 4, 14), atol=1e-12)
    np.testing.assert_allclose(knp.tconv2d_bwd_params(gy, x, 12, 3, 12, 1),
                               knb.tconv2d_bwd_params(gy, x, 12, 3, 12, 1), atol=1e-11)


def test_lstm_kernels_agree(rng):
    x = rng.normal(size=(4, 14, 32))
    w = rng.normal(size=(32, 64)) * 0.2
    r = rng.normal(size=(16, 64)) * 0.2
    b = rng.normal(size=64) * 0.1
    h0, c0, g0 = knp.lstm_fwd(x, w, r, b)
    h1, c1, g1 = knb.lstm_fwd(x, w, r, b)
    np.testing.assert_allclose(h0, h1, atol=1e-12)
    gh = rng.normal(size=h0.shape)
    out0 = knp.lstm_bwd(gh, x, w, r, h0, c0, g0)
    out1 = knb.lstm_bwd(gh, x, w, r, h1, c1, g1)
    for a, b_ in zip(out0, out1):
        np.testing.assert_allclose(a, b_, atol=1e-10)


def test_sos_kernels_agree(rng):
    om = rng.normal(size=(3, 64)) * 50
    ph = rng.uniform(0, 2 * np.pi, size=(3, 64))
    t = np.sort(rng.uniform(0, 2e-3, size=28))
    np.testing.assert_allclose(knp.sos_mix(om, ph, t), knb.sos_mix(om, ph, t),
                               atol=1e-10)


def test_minsum_kernels_agree(rng):
    from ntnlink.phy.ldpc import load_code, ldpc_encode

    code = load_code(1152)
    for trial in range(5):
        trng = np.random.default_rng(trial)
        info = trng.integers(0, 2, code.k).astype(np.uint8)
        cw = ldpc_encode(info, code)
        llr = (1.0 - 2.0 * cw) * 2.0 + trng.normal(0, 1.6, code.n)
        p0, ok0, it0 = knp.minsum_decode(llr, code.chk_ptr, code.chk_idx, 0.75, 25)
        p1, ok1, it1 = knb.minsum_decode(llr, code.chk_ptr, code.chk_idx, 0.75, 25)
        assert ok0 == ok1 and it0 == it1
        np.testing.assert_array_equal(p0 < 0, p1 < 0)
        np.testing.assert_allclose(p0, p1, atol=1e-9)


def test_backend_env_flag_selects_numpy(tmp_path):
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c",
         "from ntnlink.backend import BACKEND; print(BACKEND)"],
        env={"PATH": "/usr/bin:/bin", "NTNLINK_BACKEND": "numpy"},
        capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


# -- adjointness: <conv(x), y> == <x, tconv(y)> with shared kernels ----------

def _inner(a, b):
    return float((a * b).sum())


def test_conv_tconv_adjointness_strided(rng):
    # mirror of the full-frequency expansion stage: kernel 12x3, stride (12,1)
    x = rng.normal(size=(2, 48, 16, 2))     # already padded view
    w = rng.normal(size=(12, 3, 2, 8))
    y = rng.normal(size=(2, 4, 14, 8))
    cx = knp.conv2d_fwd(x, w, 12, 1)
    ty = knp.tconv2d_fwd(y, np.ascontiguousarray(w.transpose(0, 1, 3, 2)), 12, 1)
    assert abs(_inner(cx, y) - _inner(x, ty)) < 1e-9
    cxb = knb.conv2d_fwd(x, w, 12, 1)
    tyb = knb.tconv2d_fwd(y, np.ascontiguousarray(w.transpose(0, 1, 3, 2)), 12, 1)
    assert abs(_inner(cxb, y) - _inner(x, tyb)) < 1e-9


def test_conv_tconv_adjointness_unit_stride(rng):
    # mirror of the first expansion stage: kernel 4x3, stride (1,1)
    x = rng.normal(size=(2, 4, 16, 8))
    w = rng.normal(size=(4, 3, 8, 16))
    y = rng.normal(size=(2, 1, 14, 16))
    cx = knp.conv2d_fwd(x, w, 1, 1)
    ty = knp.tconv2d_fwd(y, np.ascontiguousarray(w.transpose(0, 1, 3, 2)), 1, 1)
    assert abs(_inner(cx, y) - _inner(x, ty)) < 1e-9
