"""Numba-jitted implementations of the hot kernels.

Mirrors `_kernels_numpy` exactly (same signatures, same math); the loops here
are what the simulator spends its time in. Kernels are serial on purpose so
results do not depend on a thread count.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def conv2d_fwd(xpad, w, sf, st):
    b, fp, tp, n = xpad.shape
    wf, wt, _, c = w.shape
    fo = (fp - wf) // sf + 1
    to = (tp - wt) // st + 1
    y = np.zeros((b, fo, to, c))
    for kf in range(wf):
        for kt in range(wt):
            for ib in range(b):
                for of in range(fo):
                    fr = of * sf + kf
                    for ot in range(to):
                        xrow = xpad[ib, fr, ot * st + kt]
                        yrow = y[ib, of, ot]
                        for ic in range(n):
                            xv = xrow[ic]
                            if xv != 0.0:
                                for oc in range(c):
                                    yrow[oc] += xv * w[kf, kt, ic, oc]
    return y


@njit(cache=True)
def conv2d_bwd_input(gy, w, sf, st, fp, tp):
    b, fo, to, c = gy.shape
    wf, wt, n, _ = w.shape
    gx = np.zeros((b, fp, tp, n))
    for kf in range(wf):
        for kt in range(wt):
            for ib in range(b):
                for of in range(fo):
                    fr = of * sf + kf
                    for ot in range(to):
                        grow = gy[ib, of, ot]
                        xrow = gx[ib, fr, ot * st + kt]
                        for ic in range(n):
                            acc = 0.0
                            for oc in range(c):
                                acc += grow[oc] * w[kf, kt, ic, oc]
                            xrow[ic] += acc
    return gx


@njit(cache=True)
def conv2d_bwd_params(gy, xpad, wf, wt, sf, st):
    b, fo, to, c = gy.shape
    n = xpad.shape[3]
    gw = np.zeros((wf, wt, n, c))
    gb = np.zeros(c)
    for ib in range(b):
        for of in range(fo):
            for ot in range(to):
                grow = gy[ib, of, ot]
                for oc in range(c):
                    gb[oc] += grow[oc]
    for kf in range(wf):
        for kt in range(wt):
            panel = gw[kf, kt]
            for ib in range(b):
                for of in range(fo):
                    fr = of * sf + kf
                    for ot in range(to):
                        xrow = xpad[ib, fr, ot * st + kt]
                        grow = gy[ib, of, ot]
                        for ic in range(n):
                            xv = xrow[ic]
                            if xv != 0.0:
                                for oc in range(c):
                                    panel[ic, oc] += xv * grow[oc]
    return gw, gb


@njit(cache=True)
def tconv2d_fwd(x, w, sf, st):
    b, fi, ti, n = x.shape
    wf, wt, _, c = w.shape
    fo = (fi - 1) * sf + wf
    to = (ti - 1) * st + wt
    wt_t = np.ascontiguousarray(w.transpose(0, 1, 3, 2))  # (wf, wt, c, n)
    y = np.zeros((b, fo, to, c))
    for kf in range(wf):
        for kt in range(wt):
            panel = wt_t[kf, kt]
            for ib in range(b):
                for i in range(fi):
                    fr = i * sf + kf
                    for t in range(ti):
                        xrow = x[ib, i, t]
                        yrow = y[ib, fr, t * st + kt]
                        for oc in range(c):
                            wrow = panel[oc]
                            s = 0.0
                            for ic in range(n):
                                s += xrow[ic] * wrow[ic]
                            yrow[oc] += s
    return y


@njit(cache=True)
def tconv2d_bwd_input(gyfull, w, sf, st, fi, ti):
    wf, wt, n, c = w.shape
    b = gyfull.shape[0]
    gx = np.zeros((b, fi, ti, n))
    for kf in range(wf):
        for kt in range(wt):
            for ib in range(b):
                for i in range(fi):
                    fr = i * sf + kf
                    for t in range(ti):
                        grow = gyfull[ib, fr, t * st + kt]
                        xrow = gx[ib, i, t]
                        for ic in range(n):
                            acc = 0.0
                            for oc in range(c):
                                acc += grow[oc] * w[kf, kt, ic, oc]
                            xrow[ic] += acc
    return gx


@njit(cache=True)
def tconv2d_bwd_params(gyfull, x, wf, wt, sf, st):
    b, fi, ti, n = x.shape
    c = gyfull.shape[3]
    gw = np.zeros((wf, wt, n, c))
    for kf in range(wf):
        for kt in range(wt):
            panel = gw[kf, kt]
            for ib in range(b):
                for i in range(fi):
                    fr = i * sf + kf
                    for t in range(ti):
                        xrow = x[ib, i, t]
                        grow = gyfull[ib, fr, t * st + kt]
                        for ic in range(n):
                            xv = xrow[ic]
                            if xv != 0.0:
                                for oc in range(c):
                                    panel[ic, oc] += xv * grow[oc]
    return gw


@njit(cache=True)
def _sigmoid_scalar(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


@njit(cache=True)
def lstm_fwd(x, w, r, b):
    bs, t_len, _ = x.shape
    u = r.shape[0]
    h = np.zeros((bs, t_len, u))
    c = np.zeros((bs, t_len, u))
    gates = np.zeros((bs, t_len, 4 * u))
    hprev = np.zeros((bs, u))
    cprev = np.zeros((bs, u))
    xt = np.empty((bs, x.shape[2]))
    for t in range(t_len):
        xt[:, :] = x[:, t]
        z = np.dot(xt, w) + np.dot(hprev, r)
        for ib in range(bs):
            for j in range(u):
                zi = z[ib, j] + b[j]
                zf = z[ib, u + j] + b[u + j]
                zg = z[ib, 2 * u + j] + b[2 * u + j]
                zo = z[ib, 3 * u + j] + b[3 * u + j]
                ig = _sigmoid_scalar(zi)
                fg = _sigmoid_scalar(zf)
                gg = math.tanh(zg)
                og = _sigmoid_scalar(zo)
                cv = fg * cprev[ib, j] + ig * gg
                hv = og * math.tanh(cv)
                gates[ib, t, j] = ig
                gates[ib, t, u + j] = fg
                gates[ib, t, 2 * u + j] = gg
                gates[ib, t, 3 * u + j] = og
                c[ib, t, j] = cv
                h[ib, t, j] = hv
                cprev[ib, j] = cv
                hprev[ib, j] = hv
    return h, c, gates


@njit(cache=True)
def lstm_bwd(gh, x, w, r, h, c, gates):
    bs, t_len, n = x.shape
    u = r.shape[0]
    gx = np.zeros_like(x)
    gw = np.zeros_like(w)
    gr = np.zeros_like(r)
    gb = np.zeros(4 * u)
    dh = np.zeros((bs, u))
    dc = np.zeros((bs, u))
    dz = np.zeros((bs, 4 * u))
    xt_t = np.empty((n, bs))
    ht_t = np.empty((u, bs))
    w_t = np.ascontiguousarray(w.T)
    r_t = np.ascontiguousarray(r.T)
    for t in range(t_len - 1, -1, -1):
        for ib in range(bs):
            for j in range(u):
                ig = gates[ib, t, j]
                fg = gates[ib, t, u + j]
                gg = gates[ib, t, 2 * u + j]
                og = gates[ib, t, 3 * u + j]
                tc = math.tanh(c[ib, t, j])
                dht = gh[ib, t, j] + dh[ib, j]
                dct = dht * og * (1.0 - tc * tc) + dc[ib, j]
                cm1 = c[ib, t - 1, j] if t > 0 else 0.0
                dz[ib, j] = dct * gg * ig * (1.0 - ig)
                dz[ib, u + j] = dct * cm1 * fg * (1.0 - fg)
                dz[ib, 2 * u + j] = dct * ig * (1.0 - gg * gg)
                dz[ib, 3 * u + j] = dht * tc * og * (1.0 - og)
                dc[ib, j] = dct * fg
        xt_t[:, :] = x[:, t].T
        gw += np.dot(xt_t, dz)
        if t > 0:
            ht_t[:, :] = h[:, t - 1].T
            gr += np.dot(ht_t, dz)
        for j in range(4 * u):
            s = 0.0
            for ib in range(bs):
                s += dz[ib, j]
            gb[j] += s
        gx[:, t] = np.dot(dz, w_t)
        dh = np.dot(dz, r_t)
    return gx, gw, gr, gb


@njit(cache=True)
def sos_mix(omega, phase, times):
    ntap, ns = omega.shape
    lt = times.shape[0]
    out = np.zeros((ntap, lt), dtype=np.complex128)
    for n in range(ntap):
        for l in range(lt):
            re = 0.0
            im = 0.0
            for k in range(ns):
                a = omega[n, k] * times[l] + phase[n, k]
                re += math.cos(a)
                im += math.sin(a)
            out[n, l] = complex(re, im)
    return out


@njit(cache=True)
def minsum_decode(llr, chk_ptr, chk_idx, alpha, max_iters):
    n = llr.shape[0]
    m = chk_ptr.shape[0] - 1
    e = chk_idx.shape[0]
    msg = np.zeros(e)
    posterior = llr.copy()
    it = 0
    for it in range(max_iters + 1):
        for v in range(n):
            posterior[v] = llr[v]
        for k in range(e):
            posterior[chk_idx[k]] += msg[k]
        ok = True
        for cm in range(m):
            parity = 0
            for k in range(chk_ptr[cm], chk_ptr[cm + 1]):
                if posterior[chk_idx[k]] < 0.0:
                    parity ^= 1
            if parity != 0:
                ok = False
                break
        if ok or it == max_iters:
            return posterior, ok, it
        for cm in range(m):
            lo = chk_ptr[cm]
            hi = chk_ptr[cm + 1]
            min1 = np.inf
            min2 = np.inf
            arg1 = -1
            total_sign = 1.0
            for k in range(lo, hi):
                q = posterior[chk_idx[k]] - msg[k]
                aq = abs(q)
                if q < 0.0:
                    total_sign = -total_sign
                if aq < min1:
                    min2 = min1
                    min1 = aq
                    arg1 = k
                elif aq < min2:
                    min2 = aq
            for k in range(lo, hi):
                q = posterior[chk_idx[k]] - msg[k]
                s = -1.0 if q < 0.0 else 1.0
                om = min2 if k == arg1 else min1
                msg[k] = alpha * total_sign * s * om
    return posterior, False, it
