"""Numba-compiled twins of the kernels in ``_numpy``.

Same signatures and return conventions; loops are written out per element so
the compiled code never allocates temporaries inside the hot path.
"""
import math

import numpy as np
from numba import njit

Z_GUARD = 1e-18


@njit(cache=True)
def chi_parts(o1, o2, o3, cphi, g1, g2, pref, delta, s):
    n = delta.shape[0]
    chi_re = np.empty(n)
    chi_im = np.empty(n)
    a_out = np.empty(n)
    b_out = np.empty(n)
    z_out = np.empty(n)
    cross = 2.0 * o1 * o2 * o3 * cphi
    base = o2 * o2 + o3 * o3
    for i in range(n):
        d = delta[i]
        si = s[i]
        d2 = d * d
        o1s2 = o1 * o1 * si * si
        a = -8.0 * d * d2 + 2.0 * d * (o1s2 + base) + 2.0 * g1 * g2 * d + cross * si
        b = 4.0 * d2 * (g1 + g2) - g1 * o2 * o2 - g2 * o1s2
        z = a * a + b * b
        w = o2 * o2 - 4.0 * d2
        a_out[i] = a
        b_out[i] = b
        z_out[i] = z
        if z > Z_GUARD:
            sc = pref / z
            chi_re[i] = sc * (w * a + 2.0 * g2 * d * b)
            chi_im[i] = sc * (2.0 * g2 * d * a - w * b)
        else:
            chi_re[i] = np.nan
            chi_im[i] = np.nan
    return chi_re, chi_im, a_out, b_out, z_out


@njit(cache=True)
def _cubic_val(x, p, q):
    return (4.0 * x * x - p) * x - q


@njit(cache=True)
def cubic_roots(p, q):
    n = p.shape[0]
    out = np.empty((n, 3))
    args = np.empty(n)
    k = 2.0 * math.pi / 3.0
    rt3 = math.sqrt(3.0)
    r = np.empty(3)
    for i in range(n):
        pi_ = p[i]
        qi = q[i]
        sp = math.sqrt(pi_) if pi_ > 0.0 else 0.0
        if pi_ > 0.0:
            # divide in two steps so p**1.5 cannot underflow to zero
            arg = 3.0 * rt3 * (qi / pi_) / sp
        else:
            arg = 0.0
        args[i] = arg
        if qi == 0.0:
            out[i, 0] = -0.5 * sp
            out[i, 1] = 0.0
            out[i, 2] = 0.5 * sp
            continue
        c = min(1.0, max(-1.0, arg))
        theta = math.acos(c) / 3.0
        m = sp / rt3
        for j in range(3):
            x = m * math.cos(theta - j * k)
            f = _cubic_val(x, pi_, qi)
            fp = 12.0 * x * x - pi_
            if abs(fp) > 1e-12 * max(pi_, 1.0):
                xn = x - f / fp
                # large steps only happen next to a double root, where they
                # trade a tiny residual for a broken root sum
                if abs(xn - x) <= 1e-11 * max(sp, 1.0) and abs(_cubic_val(xn, pi_, qi)) < abs(f):
                    x = xn
            r[j] = x
        # three-element sort
        if r[0] > r[1]:
            r[0], r[1] = r[1], r[0]
        if r[1] > r[2]:
            r[1], r[2] = r[2], r[1]
        if r[0] > r[1]:
            r[0], r[1] = r[1], r[0]
        out[i, 0] = r[0]
        out[i, 1] = r[1]
        out[i, 2] = r[2]
    return out, args


@njit(cache=True)
def solve3(m, b):
    n = m.shape[0]
    x = np.empty((n, 3), dtype=np.complex128)
    resid = np.empty(n)
    a = np.empty((3, 4), dtype=np.complex128)
    for t in range(n):
        for i in range(3):
            for j in range(3):
                a[i, j] = m[t, i, j]
            a[i, 3] = b[t, i]
        singular = False
        for col in range(3):
            piv = col
            best = abs(a[col, col])
            for r in range(col + 1, 3):
                v = abs(a[r, col])
                if v > best:
                    best = v
                    piv = r
            if not best > 0.0:
                singular = True
                break
            if piv != col:
                for j in range(4):
                    tmp = a[col, j]
                    a[col, j] = a[piv, j]
                    a[piv, j] = tmp
            for r in range(col + 1, 3):
                f = a[r, col] / a[col, col]
                for j in range(col, 4):
                    a[r, j] -= f * a[col, j]
        if singular:
            for i in range(3):
                x[t, i] = np.nan
            resid[t] = np.inf
            continue
        for i in range(2, -1, -1):
            acc = a[i, 3]
            for j in range(i + 1, 3):
                acc -= a[i, j] * x[t, j]
            x[t, i] = acc / a[i, i]
        rn = 0.0
        bn = 0.0
        for i in range(3):
            acc = -b[t, i]
            for j in range(3):
                acc += m[t, i, j] * x[t, j]
            rn += acc.real * acc.real + acc.imag * acc.imag
            bn += b[t, i].real * b[t, i].real + b[t, i].imag * b[t, i].imag
        rr = math.sqrt(rn) / (math.sqrt(bn) if bn > 0.0 else 1.0)
        resid[t] = rr if math.isfinite(rr) else np.inf
    return x, resid


@njit(cache=True)
def rk4_relax(prop, shift, max_steps, tol):
    n = prop.shape[0]
    v_out = np.zeros((n, 3), dtype=np.complex128)
    steps = np.zeros(n, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    change = np.full(n, np.inf)
    for t in range(n):
        p00 = prop[t, 0, 0]; p01 = prop[t, 0, 1]; p02 = prop[t, 0, 2]
        p10 = prop[t, 1, 0]; p11 = prop[t, 1, 1]; p12 = prop[t, 1, 2]
        p20 = prop[t, 2, 0]; p21 = prop[t, 2, 1]; p22 = prop[t, 2, 2]
        q0 = shift[t, 0]; q1 = shift[t, 1]; q2 = shift[t, 2]
        v0 = 0j; v1 = 0j; v2 = 0j
        limit = max_steps[t]
        k = 0
        while k < limit:
            w0 = p00 * v0 + p01 * v1 + p02 * v2 + q0
            w1 = p10 * v0 + p11 * v1 + p12 * v2 + q1
            w2 = p20 * v0 + p21 * v1 + p22 * v2 + q2
            d0 = w0 - v0; d1 = w1 - v1; d2 = w2 - v2
            ch = math.sqrt(d0.real * d0.real + d0.imag * d0.imag
                           + d1.real * d1.real + d1.imag * d1.imag
                           + d2.real * d2.real + d2.imag * d2.imag)
            nr = math.sqrt(w0.real * w0.real + w0.imag * w0.imag
                           + w1.real * w1.real + w1.imag * w1.imag
                           + w2.real * w2.real + w2.imag * w2.imag)
            v0 = w0; v1 = w1; v2 = w2
            k += 1
            if ch <= tol[t] * nr:
                done[t] = True
                change[t] = ch / nr if nr > 0.0 else 0.0
                break
            change[t] = ch / nr if nr > 0.0 else ch
        v_out[t, 0] = v0
        v_out[t, 1] = v1
        v_out[t, 2] = v2
        steps[t] = k
    return v_out, steps, done, change


@njit(cache=True)
def eigvecs(h, lam, degen_tol):
    n = h.shape[0]
    vecs = np.zeros((n, 3, 3), dtype=np.complex128)
    flags = np.zeros((n, 3), dtype=np.bool_)
    r = np.empty((3, 3), dtype=np.complex128)
    c = np.empty(3, dtype=np.complex128)
    best = np.empty(3, dtype=np.complex128)
    pairs = ((0, 1), (0, 2), (1, 2))
    for t in range(n):
        hn = 0.0
        for i in range(3):
            for j in range(3):
                hn += abs(h[t, i, j]) ** 2
        hn = math.sqrt(hn)
        for j in range(3):
            gap = np.inf
            for i in range(3):
                if i != j:
                    gap = min(gap, abs(lam[t, j] - lam[t, i]))
            flags[t, j] = gap <= degen_tol * max(hn, 1e-300)
            for a in range(3):
                for b in range(3):
                    r[a, b] = h[t, a, b]
                r[a, a] -= lam[t, j]
            bn = -1.0
            for pa, pb in pairs:
                c[0] = r[pa, 1] * r[pb, 2] - r[pa, 2] * r[pb, 1]
                c[1] = r[pa, 2] * r[pb, 0] - r[pa, 0] * r[pb, 2]
                c[2] = r[pa, 0] * r[pb, 1] - r[pa, 1] * r[pb, 0]
                cn = math.sqrt(abs(c[0]) ** 2 + abs(c[1]) ** 2 + abs(c[2]) ** 2)
                if cn > bn:
                    bn = cn
                    best[0] = c[0]
                    best[1] = c[1]
                    best[2] = c[2]
            if bn > 0.0:
                for a in range(3):
                    vecs[t, a, j] = best[a] / bn
            else:
                flags[t, j] = True
    return vecs, flags
