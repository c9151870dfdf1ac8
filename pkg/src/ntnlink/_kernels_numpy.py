"""Pure-numpy reference implementations of the hot kernels.

Same call signatures as `_kernels_numba`; selected via NTNLINK_BACKEND=numpy
(see `ntnlink.backend`). All float arrays are C-contiguous float64, complex
arrays complex128. Tensor layout for conv kernels is (batch, freq, time,
channel); weights are (kf, kt, in_ch, out_ch).
"""

import numpy as np


# ---------------------------------------------------------------------------
# 2D convolution (cross-correlation, no kernel flip)
# ---------------------------------------------------------------------------

def conv2d_fwd(xpad, w, sf, st):
    b, fp, tp, n = xpad.shape
    wf, wt, _, c = w.shape
    fo = (fp - wf) // sf + 1
    to = (tp - wt) // st + 1
    y = np.zeros((b, fo, to, c))
    for kf in range(wf):
        for kt in range(wt):
            xs = xpad[:, kf:kf + (fo - 1) * sf + 1:sf, kt:kt + (to - 1) * st + 1:st, :]
            y += np.tensordot(xs, w[kf, kt], axes=([3], [0]))
    return y


def conv2d_bwd_input(gy, w, sf, st, fp, tp):
    b, fo, to, c = gy.shape
    wf, wt, n, _ = w.shape
    gx = np.zeros((b, fp, tp, n))
    for kf in range(wf):
        for kt in range(wt):
            gx[:, kf:kf + (fo - 1) * sf + 1:sf, kt:kt + (to - 1) * st + 1:st, :] += \
                np.tensordot(gy, w[kf, kt], axes=([3], [1]))
    return gx


def conv2d_bwd_params(gy, xpad, wf, wt, sf, st):
    b, fo, to, c = gy.shape
    n = xpad.shape[3]
    gw = np.zeros((wf, wt, n, c))
    for kf in range(wf):
        for kt in range(wt):
            xs = xpad[:, kf:kf + (fo - 1) * sf + 1:sf, kt:kt + (to - 1) * st + 1:st, :]
            gw[kf, kt] = np.tensordot(xs, gy, axes=([0, 1, 2], [0, 1, 2]))
    gb = gy.sum(axis=(0, 1, 2))
    return gw, gb


# ---------------------------------------------------------------------------
# 2D transposed convolution (adjoint of conv2d with the same weights)
# ---------------------------------------------------------------------------

def tconv2d_fwd(x, w, sf, st):
    b, fi, ti, n = x.shape
    wf, wt, _, c = w.shape
    fo = (fi - 1) * sf + wf
    to = (ti - 1) * st + wt
    y = np.zeros((b, fo, to, c))
    for kf in range(wf):
        for kt in range(wt):
            y[:, kf:kf + (fi - 1) * sf + 1:sf, kt:kt + (ti - 1) * st + 1:st, :] += \
                np.tensordot(x, w[kf, kt], axes=([3], [0]))
    return y


def tconv2d_bwd_input(gyfull, w, sf, st, fi, ti):
    wf, wt, n, c = w.shape
    b = gyfull.shape[0]
    gx = np.zeros((b, fi, ti, n))
    for kf in range(wf):
        for kt in range(wt):
            gs = gyfull[:, kf:kf + (fi - 1) * sf + 1:sf, kt:kt + (ti - 1) * st + 1:st, :]
            gx += np.tensordot(gs, w[kf, kt], axes=([3], [1]))
    return gx


def tconv2d_bwd_params(gyfull, x, wf, wt, sf, st):
    b, fi, ti, n = x.shape
    c = gyfull.shape[3]
    gw = np.zeros((wf, wt, n, c))
    for kf in range(wf):
        for kt in range(wt):
            gs = gyfull[:, kf:kf + (fi - 1) * sf + 1:sf, kt:kt + (ti - 1) * st + 1:st, :]
            gw[kf, kt] = np.tensordot(x, gs, axes=([0, 1, 2], [0, 1, 2]))
    return gw


# ---------------------------------------------------------------------------
# LSTM (single layer, zero initial state, gate packing [i, f, g, o])
# ---------------------------------------------------------------------------

def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_fwd(x, w, r, b):
    bs, t_len, _ = x.shape
    u = r.shape[0]
    h = np.zeros((bs, t_len, u))
    c = np.zeros((bs, t_len, u))
    gates = np.zeros((bs, t_len, 4 * u))
    hprev = np.zeros((bs, u))
    cprev = np.zeros((bs, u))
    for t in range(t_len):
        z = x[:, t] @ w + hprev @ r + b
        i = _sigmoid(z[:, 0 * u:1 * u])
        f = _sigmoid(z[:, 1 * u:2 * u])
        g = np.tanh(z[:, 2 * u:3 * u])
        o = _sigmoid(z[:, 3 * u:4 * u])
        cprev = f * cprev + i * g
        hprev = o * np.tanh(cprev)
        gates[:, t, 0 * u:1 * u] = i
        gates[:, t, 1 * u:2 * u] = f
        gates[:, t, 2 * u:3 * u] = g
        gates[:, t, 3 * u:4 * u] = o
        c[:, t] = cprev
        h[:, t] = hprev
    return h, c, gates


def lstm_bwd(gh, x, w, r, h, c, gates):
    bs, t_len, n = x.shape
    u = r.shape[0]
    gx = np.zeros_like(x)
    gw = np.zeros_like(w)
    gr = np.zeros_like(r)
    gb = np.zeros(4 * u)
    dh = np.zeros((bs, u))
    dc = np.zeros((bs, u))
    for t in range(t_len - 1, -1, -1):
        i = gates[:, t, 0 * u:1 * u]
        f = gates[:, t, 1 * u:2 * u]
        g = gates[:, t, 2 * u:3 * u]
        o = gates[:, t, 3 * u:4 * u]
        tc = np.tanh(c[:, t])
        dht = gh[:, t] + dh
        dct = dht * o * (1.0 - tc * tc) + dc
        cm1 = c[:, t - 1] if t > 0 else np.zeros((bs, u))
        hm1 = h[:, t - 1] if t > 0 else np.zeros((bs, u))
        dz = np.empty((bs, 4 * u))
        dz[:, 0 * u:1 * u] = dct * g * i * (1.0 - i)
        dz[:, 1 * u:2 * u] = dct * cm1 * f * (1.0 - f)
        dz[:, 2 * u:3 * u] = dct * i * (1.0 - g * g)
        dz[:, 3 * u:4 * u] = dht * tc * o * (1.0 - o)
        gw += x[:, t].T @ dz
        gr += hm1.T @ dz
        gb += dz.sum(axis=0)
        gx[:, t] = dz @ w.T
        dh = dz @ r.T
        dc = dct * f
    return gx, gw, gr, gb


# ---------------------------------------------------------------------------
# Sum-of-sinusoids mixer for fading taps
# ---------------------------------------------------------------------------

def sos_mix(omega, phase, times):
    """Sum over sinusoids: out[n, l] = sum_k exp(j*(omega[n,k]*t[l] + phase[n,k]))."""
    arg = omega[:, :, None] * times[None, None, :] + phase[:, :, None]
    return np.exp(1j * arg).sum(axis=1)


# ---------------------------------------------------------------------------
# Normalized min-sum LDPC decoding over a CSR check-node adjacency
# ---------------------------------------------------------------------------

def minsum_decode(llr, chk_ptr, chk_idx, alpha, max_iters):
    """Flooding min-sum. Returns (posterior llr, parity_ok, iterations_run)."""
    n = llr.shape[0]
    m = chk_ptr.shape[0] - 1
    deg = np.diff(chk_ptr)
    dmax = int(deg.max())
    cols = np.arange(dmax)
    valid = cols[None, :] < deg[:, None]
    dense_idx = np.zeros((m, dmax), dtype=np.int64)
    dense_idx[valid] = chk_idx

    msg = np.zeros((m, dmax))
    posterior = llr.copy()
    it = 0
    for it in range(max_iters + 1):
        posterior = llr + np.bincount(chk_idx, weights=msg[valid], minlength=n)
        hard = (posterior < 0).astype(np.uint8)
        parity = np.bitwise_xor.reduceat(hard[chk_idx], chk_ptr[:-1])
        ok = not parity.any()
        if ok or it == max_iters:
            return posterior, ok, it
        q = posterior[dense_idx] - msg
        sgn = np.where(q < 0, -1.0, 1.0)
        sgn[~valid] = 1.0
        absq = np.abs(q)
        absq[~valid] = np.inf
        amin = absq.argmin(axis=1)
        min1 = absq[np.arange(m), amin]
        absq2 = absq.copy()
        absq2[np.arange(m), amin] = np.inf
        min2 = absq2.min(axis=1)
        total_sign = sgn.prod(axis=1)
        others_min = np.where(cols[None, :] == amin[:, None], min2[:, None], min1[:, None])
        msg = alpha * total_sign[:, None] * sgn * others_min
        msg[~valid] = 0.0
    return posterior, False, it
