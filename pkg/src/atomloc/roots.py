"""Factored absorption, its root sets, and the probe-detuning resonance branches.

The absorption can be written as a ratio of polynomials in ``s = sin(kx)``.
Denominator roots ``R1..R4`` mark positions of absorption maxima; solving
``sin(kx) = R_i`` for the detuning instead gives five resonance curves
``delta_1..delta_5(kx)``.  The last three are roots of the cubic
``4 d^3 - p d - q = 0`` with ``p = O1^2 s^2 + O2^2 + O3^2`` and
``q = O1 O2 O3 s cos(phi)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import ComplexBranch, ZeroDetuning, ZeroDrive
from .model import ModelParams

ARG_TOL = 1e-9
SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class RootSet:
    l1: complex
    l2: complex
    r1: float
    r2: float
    r3: complex
    r4: complex
    weight_r12: float
    weight_r34: float


def numerator_roots(params: ModelParams, delta: float) -> tuple[complex, complex]:
    o1, o2, o3 = params.omega1, params.omega2, params.omega3
    if o1 * o2 == 0:
        raise ZeroDrive("numerator roots need omega1 * omega2 > 0")
    c = params.cos_phi
    scale = 2.0 * delta * o3 / (o1 * o2)
    rad = cmath.sqrt(c * c - 1.0)
    return scale * (-c + rad), scale * (-c - rad)


def _r34(params, delta):
    # sin-quadratic a s^2 + b s + c = 0 with a = delta*O1, b = O2 O3 cos(phi),
    # c = delta (O2^2 + O3^2 - 4 delta^2) / O1; stable form for the small root
    o1, o2, o3 = params.omega1, params.omega2, params.omega3
    a = delta * o1
    b = o2 * o3 * params.cos_phi
    c = delta * (o2 * o2 + o3 * o3 - 4.0 * delta * delta) / o1
    disc = b * b - 4.0 * a * c
    if disc < 0:
        re = -b / (2.0 * a)
        im = math.sqrt(-disc) / (2.0 * a)
        return complex(re, im), complex(re, -im)
    sq = math.sqrt(disc)
    big = -0.5 * (b + math.copysign(sq, b))
    if big == 0.0:
        return 0j, 0j
    x1, x2 = big / a, c / big
    # keep the +sqrt root first, matching the closed form's ordering
    if (x1 - x2) * (1.0 if a > 0 else -1.0) < 0:
        x1, x2 = x2, x1
    return complex(x1), complex(x2)


def denominator_roots(params: ModelParams, delta: float) -> RootSet:
    """All numerator/denominator roots of the factored absorption at one detuning."""
    o1 = params.omega1
    if o1 <= 0:
        raise ZeroDrive("denominator roots need omega1 > 0")
    if delta == 0:
        raise ZeroDetuning("R3,4 are singular at delta = 0; use the branch curves instead")
    l1, l2 = numerator_roots(params, delta)
    r1, r2 = -2.0 * delta / o1, 2.0 * delta / o1
    r3, r4 = _r34(params, delta)
    return RootSet(l1, l2, r1, r2, r3, r4,
                   weight_r12=params.gamma2 ** 2 * o1 ** 4,
                   weight_r34=4.0 * delta ** 2 * o1 ** 4)


def chi_im_factored(params: ModelParams, delta: float, kx) -> np.ndarray:
    """Absorption (in prefactor units) evaluated through the root factorisation."""
    o1, o2, o3 = params.omega1, params.omega2, params.omega3
    g1, g2 = params.gamma1, params.gamma2
    if o1 * o2 == 0:
        raise ZeroDrive("factored form needs omega1 * omega2 > 0")
    s = np.sin(np.asarray(kx, dtype=float))
    c = params.cos_phi
    w = o2 * o2 - 4.0 * delta * delta
    const = g1 * (4.0 * delta * delta * g2 * g2 + w * w)
    l1, l2 = numerator_roots(params, delta)
    pos = g2 * o1 * o1 * o2 * o2 * ((s - l1) * (s - l2)).real
    r1, r2 = -2.0 * delta / o1, 2.0 * delta / o1
    den = g1 * (const + 2.0 * pos) + g2 * g2 * o1 ** 4 * ((s - r1) * (s - r2)) ** 2
    if delta == 0:
        # the R3,4 quadratic degenerates to its linear term
        den = den + (2.0 * o1 * o2 * o3 * c * s) ** 2
    else:
        r3, r4 = _r34(params, delta)
        den = den + 4.0 * delta ** 2 * o1 ** 4 * (((s - r3) * (s - r4)).real) ** 2
    return params.prefactor * (const + pos) / den


# --- detuning branches ------------------------------------------------------

class CubicRoots(NamedTuple):
    delta5: float
    delta3: float
    delta4: float


def cubic_coefficients(params: ModelParams, s):
    s = np.asarray(s, dtype=float)
    p = params.omega1 ** 2 * s * s + params.omega2 ** 2 + params.omega3 ** 2
    q = params.omega1 * params.omega2 * params.omega3 * params.cos_phi * s
    return p, q


def _crossing_symmetric(params: ModelParams) -> bool:
    # branches of the cubic can only touch when O2 == O3 and |cos phi| == 1
    o2, o3 = params.omega2, params.omega3
    big = max(o2, o3)
    return (params.omega1 > 0 and big > 0 and abs(o2 - o3) <= SYMMETRY_RTOL * big
            and abs(abs(params.cos_phi) - 1.0) <= SYMMETRY_RTOL)


def label_branches(params: ModelParams, s, roots):
    """Reorder ascending cubic roots (..., 3) into (delta5, delta3, delta4).

    Generic parameters never produce degenerate roots, so ascending order is
    already continuous in kx.  For O2 == O3 with cos(phi) = +-1 one branch is
    exactly ``-cos(phi) O1 s / 2`` and crosses a neighbour; that branch is
    tracked explicitly.
    """
    roots = np.asarray(roots, dtype=float)
    if not _crossing_symmetric(params):
        return roots.copy()
    s = np.asarray(s, dtype=float)
    target = -0.5 * math.copysign(1.0, params.cos_phi) * params.omega1 * s
    mid = np.argmin(np.abs(roots - target[..., None]), axis=-1)
    out = np.empty_like(roots)
    out[..., 1] = np.take_along_axis(roots, mid[..., None], axis=-1)[..., 0]
    lo = np.where(mid == 0, 1, 0)
    hi = np.where(mid == 2, 1, 2)
    out[..., 0] = np.take_along_axis(roots, lo[..., None], axis=-1)[..., 0]
    out[..., 2] = np.take_along_axis(roots, hi[..., None], axis=-1)[..., 0]
    return out


def branch_permutation(params: ModelParams, s, roots):
    """Index into the ascending roots for each label (delta5, delta3, delta4)."""
    labeled = label_branches(params, s, roots)
    return np.argmin(np.abs(np.asarray(roots)[..., None, :] - labeled[..., :, None]), axis=-1)


def sorted_cubic_roots(p, q, backend=None):
    """Ascending roots of 4 d^3 - p d - q with a three-real-root check."""
    roots, arg = kernels.cubic_roots(p, q, backend=backend)
    worst = np.max(np.abs(arg)) if np.size(arg) else 0.0
    if worst > 1.0 + ARG_TOL:
        raise ComplexBranch(f"cubic has a complex pair (|arccos argument| = {worst:.12g})")
    return roots


def solve_delta_cubic(params: ModelParams, kx: float) -> CubicRoots:
    s = math.sin(kx)
    p, q = cubic_coefficients(params, s)
    roots = sorted_cubic_roots(np.atleast_1d(p), np.atleast_1d(q))
    lab = label_branches(params, np.atleast_1d(s), roots)[0]
    return CubicRoots(float(lab[0]), float(lab[1]), float(lab[2]))


def root_residual_scale(p) -> np.ndarray:
    return np.maximum(1.0, np.asarray(p, dtype=float) ** 1.5)


@dataclass(frozen=True)
class DetuningBranches:
    kx: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray
    delta3: np.ndarray
    delta4: np.ndarray
    delta5: np.ndarray

    def as_columns(self) -> dict:
        return {"kx": self.kx, "delta1": self.delta1, "delta2": self.delta2,
                "delta3": self.delta3, "delta4": self.delta4, "delta5": self.delta5}

    def branch(self, index: int) -> np.ndarray:
        return getattr(self, f"delta{index}")


def branch_curves(params: ModelParams, kx_grid, backend=None) -> DetuningBranches:
    kx = np.asarray(kx_grid, dtype=float)
    if kx.ndim != 1:
        raise ValueError("kx_grid must be one-dimensional")
    if kx.size > 1 and not (np.all(np.diff(kx) > 0) or np.all(np.diff(kx) < 0)):
        raise ValueError("kx_grid must be strictly monotone")
    s = np.sin(kx)
    p, q = cubic_coefficients(params, s)
    lab = label_branches(params, s, sorted_cubic_roots(p, q, backend=backend))
    half = 0.5 * params.omega1 * s
    return DetuningBranches(kx, -half, half, lab[:, 1], lab[:, 2], lab[:, 0])


def level_crossings(kx, curve, level) -> np.ndarray:
    """Positions where a sampled periodic curve crosses ``level`` (linear interpolation)."""
    kx = np.asarray(kx, dtype=float)
    f = np.asarray(curve, dtype=float) - level
    period_step = (kx[0] + 2 * np.pi) - kx[-1]
    x_next = np.append(kx[1:], kx[-1] + period_step)
    f_next = np.append(f[1:], f[0])
    hits = []
    for x0, x1, f0, f1 in zip(kx, x_next, f, f_next):
        if f0 == 0.0:
            hits.append(x0)
        elif f0 * f1 < 0:
            hits.append(x0 + (x1 - x0) * f0 / (f0 - f1))
    out = np.asarray(hits, dtype=float)
    return (out + np.pi) % (2 * np.pi) - np.pi
