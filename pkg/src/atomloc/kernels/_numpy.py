"""Pure-numpy implementations of the hot kernels.

Every function takes flat, equal-length 1-D arrays (the dispatcher in
``atomloc.kernels`` takes care of broadcasting) and mirrors the signature of
its twin in ``_numba``.
"""
import numpy as np

Z_GUARD = 1e-18


def chi_parts(o1, o2, o3, cphi, g1, g2, pref, delta, s):
    s2 = s * s
    d2 = delta * delta
    o1s2 = o1 * o1 * s2
    a = (-8.0 * delta * d2 + 2.0 * delta * (o1s2 + o2 * o2 + o3 * o3)
         + 2.0 * g1 * g2 * delta + 2.0 * o1 * o2 * o3 * cphi * s)
    b = 4.0 * d2 * (g1 + g2) - g1 * o2 * o2 - g2 * o1s2
    z = a * a + b * b
    w = o2 * o2 - 4.0 * d2
    ok = z > Z_GUARD
    scale = np.full_like(z, np.nan)
    np.divide(pref, z, out=scale, where=ok)
    chi_re = scale * (w * a + 2.0 * g2 * delta * b)
    chi_im = scale * (2.0 * g2 * delta * a - w * b)
    return chi_re, chi_im, a, b, z


def cubic_roots(p, q):
    """Ascending real roots of 4x^3 - p x - q = 0 for p >= 0.

    Returns ``(roots, arg)`` where ``arg`` is the unclipped arccos argument;
    ``|arg| > 1`` means the cubic does not have three real roots.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    sp = np.sqrt(np.maximum(p, 0.0))
    pos = p > 0.0
    arg = np.zeros_like(p)
    # divide in two steps so p**1.5 cannot underflow to zero
    np.divide(3.0 * np.sqrt(3.0) * q, p, out=arg, where=pos)
    np.divide(arg, sp, out=arg, where=pos)
    theta = np.arccos(np.clip(arg, -1.0, 1.0)) / 3.0
    m = sp / np.sqrt(3.0)
    k = np.arange(3) * (2.0 * np.pi / 3.0)
    r = m[:, None] * np.cos(theta[:, None] - k[None, :])

    # one guarded Newton step per root
    pp = p[:, None]
    qq = q[:, None]
    f = (4.0 * r * r - pp) * r - qq
    fp = 12.0 * r * r - pp
    usable = np.abs(fp) > 1e-12 * np.maximum(pp, 1.0)
    step = np.zeros_like(r)
    np.divide(f, fp, out=step, where=usable)
    r_new = r - step
    f_new = (4.0 * r_new * r_new - pp) * r_new - qq
    # large steps only happen next to a double root, where they trade a tiny
    # residual for a broken root sum
    small = np.abs(step) <= 1e-11 * np.maximum(sp, 1.0)[:, None]
    r = np.where(small & (np.abs(f_new) < np.abs(f)), r_new, r)

    odd = q == 0.0
    if odd.any():
        half = 0.5 * sp[odd]
        r[odd] = np.stack([-half, np.zeros_like(half), half], axis=1)
    r.sort(axis=1)
    return r, arg


def solve3(m, b):
    """Batched solve of m @ x = b for (n, 3, 3) complex systems.

    Returns ``(x, residual)`` with residual = ||m x - b|| / ||b||.
    """
    n = m.shape[0]
    x = np.full((n, 3), np.nan + 0j)
    resid = np.full(n, np.inf)
    finite = np.isfinite(m).all(axis=(1, 2))
    sing = np.zeros(n, dtype=bool)
    if finite.any():
        idx = np.flatnonzero(finite)
        try:
            x[idx] = np.linalg.solve(m[idx], b[idx][..., None])[..., 0]
        except np.linalg.LinAlgError:
            # fall back to one-at-a-time so a single singular system does
            # not poison the batch
            for i in idx:
                try:
                    x[i] = np.linalg.solve(m[i], b[i])
                except np.linalg.LinAlgError:
                    sing[i] = True
    r = np.einsum("nij,nj->ni", m, x) - b
    bn = np.linalg.norm(b, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        resid = np.linalg.norm(r, axis=1) / np.where(bn > 0, bn, 1.0)
    resid[~np.isfinite(resid) | sing] = np.inf
    return x, resid


def _compose(pa, qa, pb, qb):
    """(pb, qb) after (pa, qa) for affine maps v -> P v + q."""
    return (np.einsum("nij,njk->nik", pb, pa),
            np.einsum("nij,nj->ni", pb, qa) + qb)


def rk4_relax(prop, shift, max_steps, tol, leap=1024):
    """Iterate v <- prop v + shift from v = 0 until one step changes v by at
    most ``tol * ||v||`` (``tol`` is per system).

    Advances ``leap`` steps at a time using the composed affine map, then
    takes one explicit step to test the stopping rule.  Returns
    ``(v, steps, converged, last_change)``.
    """
    n = prop.shape[0]
    v = np.zeros((n, 3), dtype=np.complex128)
    steps = np.zeros(n, dtype=np.int64)
    done = np.zeros(n, dtype=bool)
    change = np.full(n, np.inf)
    max_steps = np.broadcast_to(np.asarray(max_steps, dtype=np.int64), (n,))

    # prop^leap by repeated squaring
    pl, ql = prop.copy(), shift.copy()
    span = 1
    while span < leap:
        pl, ql = _compose(pl, ql, pl, ql)
        span *= 2

    first = True
    while True:
        act = np.flatnonzero(~done & (steps < max_steps))
        if act.size == 0:
            break
        if not first:
            # leap only where it cannot overrun the step budget
            lp = act[steps[act] + span + 1 <= max_steps[act]]
            v[lp] = np.einsum("nij,nj->ni", pl[lp], v[lp]) + ql[lp]
            steps[lp] += span
        first = False
        nxt = np.einsum("nij,nj->ni", prop[act], v[act]) + shift[act]
        ch = np.linalg.norm(nxt - v[act], axis=1)
        nrm = np.linalg.norm(nxt, axis=1)
        v[act] = nxt
        steps[act] += 1
        change[act] = ch / np.where(nrm > 0, nrm, 1.0)
        done[act] = ch <= tol[act] * nrm
    return v, steps, done, change


def _cross(a, b):
    return np.stack([a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1],
                     a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2],
                     a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]], axis=1)


def eigvecs(h, lam, degen_tol):
    """Eigenvectors of Hermitian 3x3 matrices for known eigenvalues.

    Column j of the returned (n, 3, 3) array is the unit eigenvector for
    ``lam[:, j]``; ``flags[:, j]`` is True where lam[:, j] lies within
    ``degen_tol * ||h||`` of another eigenvalue and the vector is unusable.
    """
    n = h.shape[0]
    vecs = np.zeros((n, 3, 3), dtype=np.complex128)
    hn = np.sqrt(np.sum(np.abs(h) ** 2, axis=(1, 2)))
    flags = np.zeros((n, 3), dtype=bool)
    eye = np.eye(3)
    for j in range(3):
        gap = np.full(n, np.inf)
        for i in range(3):
            if i != j:
                gap = np.minimum(gap, np.abs(lam[:, j] - lam[:, i]))
        flags[:, j] = gap <= degen_tol * np.maximum(hn, 1e-300)
        r = h - lam[:, j, None, None] * eye
        cands = np.stack([_cross(r[:, 0], r[:, 1]),
                          _cross(r[:, 0], r[:, 2]),
                          _cross(r[:, 1], r[:, 2])], axis=1)
        norms = np.linalg.norm(cands, axis=2)
        best = np.argmax(norms, axis=1)
        v = cands[np.arange(n), best]
        nv = norms[np.arange(n), best]
        flags[:, j] |= ~(nv > 0)
        vecs[:, :, j] = v / np.where(nv > 0, nv, 1.0)[:, None]
    return vecs, flags
