#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallback on working shapes.

Usage: python benchmarks/bench_backends.py [--repeats N]

Covers the layer kernels at training batch size, the LDPC min-sum decoder at
its two 16-QAM codeword lengths, and the fading mixer. Each kernel is run
once for warmup (numba compilation) before timing.
"""

import argparse
import time

import numpy as np

from ntnlink import _kernels_numba as knb
from ntnlink import _kernels_numpy as knp
from ntnlink.phy.ldpc import ldpc_encode, load_code

BATCH = 256  # quarter of the training batch keeps the run short


def _timeit(fn, repeats):
    fn()  # warmup / JIT
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def build_cases():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(BATCH, 48, 16, 2))
    w = rng.normal(size=(6, 3, 2, 8))
    gy = rng.normal(size=(BATCH, 4, 14, 8))
    xt = rng.normal(size=(BATCH, 4, 14, 8))
    wt = rng.normal(size=(12, 3, 8, 2))
    gyt = rng.normal(size=(BATCH, 48, 16, 2))
    xs = rng.normal(size=(BATCH, 14, 32))
    wl = rng.normal(size=(32, 64)) * 0.2
    rl = rng.normal(size=(16, 64)) * 0.2
    bl = rng.normal(size=64) * 0.1
    hs, cs, gs = knp.lstm_fwd(xs, wl, rl, bl)
    gh = rng.normal(size=hs.shape)
    om = rng.normal(size=(3, 64)) * 60
    ph = rng.uniform(0, 2 * np.pi, size=(3, 64))
    ts = np.sort(rng.uniform(0, 2e-3, size=28))

    cases = [
        ("conv2d_fwd (B,48,16,2)", lambda k: k.conv2d_fwd(x, w, 12, 1)),
        ("conv2d_bwd_input", lambda k: k.conv2d_bwd_input(gy, w, 12, 1, 48, 16)),
        ("conv2d_bwd_params", lambda k: k.conv2d_bwd_params(gy, x, 6, 3, 12, 1)),
        ("tconv2d_fwd (B,4,14,8)", lambda k: k.tconv2d_fwd(xt, wt, 12, 1)),
        ("tconv2d_bwd_input", lambda k: k.tconv2d_bwd_input(gyt, wt, 12, 1, 4, 14)),
        ("lstm_fwd (B,14,32)->16", lambda k: k.lstm_fwd(xs, wl, rl, bl)),
        ("lstm_bwd", lambda k: k.lstm_bwd(gh, xs, wl, rl, hs, cs, gs)),
        ("sos_mix (3 taps x 64 x 28)", lambda k: k.sos_mix(om, ph, ts)),
    ]
    for n in (2304, 2688):
        code = load_code(n)
        info = rng.integers(0, 2, code.k).astype(np.uint8)
        cw = ldpc_encode(info, code)
        llr = (1.0 - 2.0 * cw) * 2.0 + rng.normal(0, 1.2, code.n)
        cases.append((
            f"minsum_decode n={n}",
            lambda k, llr=llr, code=code: k.minsum_decode(
                llr, code.chk_ptr, code.chk_idx, 0.75, 25),
        ))
    return cases


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    cases = build_cases()
    width = max(len(name) for name, _ in cases)
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for name, fn in cases:
        t_np = _timeit(lambda: fn(knp), args.repeats)
        t_nb = _timeit(lambda: fn(knb), args.repeats)
        print(f"{name:<{width}}  {t_np*1e3:>8.2f}ms  {t_nb*1e3:>8.2f}ms  "
              f"{t_np/t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
