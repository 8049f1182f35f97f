"""Dressed states of the three strongly driven levels {a1, a2, b}.

Energies are the roots of the same cubic that fixes the resonance branches;
eigenvectors come from cross products of rows of ``H - lambda I`` and are
only handed to LAPACK at exact degeneracies.  A dressed state decays at
``|c_a1|^2 gamma1 + |c_a2|^2 gamma2`` since ``b`` is stable.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateEigenvalueWarning
from .model import ModelParams
from .roots import branch_permutation, cubic_coefficients, sorted_cubic_roots

DEGEN_TOL = 1e-9

# Propagation angles of fields 2 and 3 relative to the cavity axis.  The
# default matches the susceptibility; Geometry.swapped gives the other common
# labelling.  Only cos(theta2) = -cos(theta3) matters for the
# traveling-wave phases to cancel around the loop.
THETA2 = 3 * math.pi / 4
THETA3 = math.pi / 4


@dataclass(frozen=True)
class Geometry:
    theta2: float = THETA2
    theta3: float = THETA3
    k_over_kappa: float = 1.0

    @classmethod
    def swapped(cls, k_over_kappa: float = 1.0) -> "Geometry":
        return cls(theta2=THETA3, theta3=THETA2, k_over_kappa=k_over_kappa)


@dataclass(frozen=True)
class DressedState:
    energy: float
    c_a1: complex
    c_a2: complex
    c_b: complex
    decay: float
    degenerate: bool = False

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([self.c_a1, self.c_a2, self.c_b])


def hamiltonians(params: ModelParams, kx, geometry: Geometry = Geometry()) -> np.ndarray:
    """Effective drive Hamiltonians, shape ``kx.shape + (3, 3)``."""
    kx = np.asarray(kx, dtype=float)
    s = np.sin(kx)
    trav = geometry.k_over_kappa * kx
    t2 = np.exp(1j * trav * math.cos(geometry.theta2))
    t3 = np.exp(1j * trav * math.cos(geometry.theta3))
    h = np.zeros(kx.shape + (3, 3), dtype=np.complex128)
    h[..., 0, 1] = 0.5 * params.omega3 * np.exp(-1j * params.phi) * t3
    h[..., 0, 2] = 0.5 * params.omega1 * s
    h[..., 1, 2] = 0.5 * params.omega2 * t2
    h[..., 1, 0] = np.conj(h[..., 0, 1])
    h[..., 2, 0] = np.conj(h[..., 0, 2])
    h[..., 2, 1] = np.conj(h[..., 1, 2])
    return h


def build_hamiltonian(params: ModelParams, kx: float, geometry: Geometry = Geometry()) -> np.ndarray:
    return hamiltonians(params, float(kx), geometry)


def _fix_phase(vecs):
    # make c_b real and non-negative; fall back to the largest component
    n = vecs.shape[0]
    ref = vecs[:, 2, :].copy()
    weak = np.abs(ref) < 1e-8
    if weak.any():
        big = np.argmax(np.abs(vecs), axis=1)
        alt = np.take_along_axis(vecs, big[:, None, :], axis=1)[:, 0, :]
        ref = np.where(weak, alt, ref)
    ph = np.where(np.abs(ref) > 0, np.conj(ref) / np.where(np.abs(ref) > 0, np.abs(ref), 1.0), 1.0)
    return vecs * ph[:, None, :]


def dressed_grid(params: ModelParams, kx, geometry: Geometry = Geometry(), backend=None):
    """Energies (n, 3) ascending, amplitudes (n, 3, 3) with states in columns,
    decays (n, 3) and degeneracy flags (n, 3) on a 1-D kx array."""
    kx = np.atleast_1d(np.asarray(kx, dtype=float))
    s = np.sin(kx)
    p, q = cubic_coefficients(params, s)
    lam = sorted_cubic_roots(p, q, backend=backend)
    h = hamiltonians(params, kx, geometry)
    vecs, flags = kernels.eigvecs(h, lam, DEGEN_TOL, backend=backend)
    bad = np.flatnonzero(flags.any(axis=1))
    if bad.size:
        warnings.warn(f"{bad.size} point(s) with degenerate dressed energies",
                      DegenerateEigenvalueWarning, stacklevel=2)
        _, v_ref = np.linalg.eigh(h[bad])
        vecs[bad] = v_ref
    vecs = _fix_phase(vecs)
    pops = np.abs(vecs) ** 2
    decay = pops[:, 0, :] * params.gamma1 + pops[:, 1, :] * params.gamma2
    return lam, vecs, decay, flags


def eigensystem(params: ModelParams, kx: float, geometry: Geometry = Geometry(),
                backend=None) -> tuple[DressedState, DressedState, DressedState]:
    lam, vecs, decay, flags = dressed_grid(params, [kx], geometry, backend=backend)
    return tuple(
        DressedState(float(lam[0, j]), complex(vecs[0, 0, j]), complex(vecs[0, 1, j]),
                     complex(vecs[0, 2, j]), float(decay[0, j]), bool(flags[0, j]))
        for j in range(3))


_BRANCH_SLOT = {5: 0, 3: 1, 4: 2, "delta5": 0, "delta3": 1, "delta4": 2}


def branch_decays(params: ModelParams, kx, geometry: Geometry = Geometry(), backend=None):
    """Decay rates on a kx array for the dressed states resonant with
    (delta5, delta3, delta4), shape (n, 3)."""
    kx = np.atleast_1d(np.asarray(kx, dtype=float))
    lam, _, decay, _ = dressed_grid(params, kx, geometry, backend=backend)
    perm = branch_permutation(params, np.sin(kx), lam)
    return np.take_along_axis(decay, perm, axis=1)


def predict_peak_sharpness(params: ModelParams, kx: float, branch) -> float:
    """Decay rate of the dressed state resonant with ``branch`` (3, 4 or 5).

    Larger values mean a lower, wider absorption peak on that branch.
    """
    try:
        slot = _BRANCH_SLOT[branch]
    except KeyError:
        raise ValueError(f"branch must be one of 3, 4, 5, got {branch!r}") from None
    return float(branch_decays(params, kx)[0, slot])


def equal_drive_spectrum(omega1: float, omega: float, kx: float, phi: float):
    """Closed-form energies and bare populations for O2 = O3 = omega at phi = 0 or pi/2.

    Returns a list of ``(energy, |c_a1|^2, |c_a2|^2, |c_b|^2)`` tuples; the
    first entry is the state resonant with delta3.
    """
    x = omega1 * math.sin(kx)
    if math.isclose(math.cos(phi), 1.0, abs_tol=1e-12):
        root = math.sqrt(8 * omega * omega + x * x)
        out = [(-0.5 * x, 0.5, 0.0, 0.5)]
        for sign in (1.0, -1.0):
            lam = 0.25 * (x + sign * root)
            c2 = (lam - 0.5 * x) / (0.5 * omega)
            norm = 2.0 + c2 * c2
            out.append((lam, 1.0 / norm, c2 * c2 / norm, 1.0 / norm))
        return out
    if math.isclose(math.cos(phi), 0.0, abs_tol=1e-12):
        root = math.sqrt(2 * omega * omega + x * x)
        c2 = (x / omega) ** 2
        norm = 2.0 + c2
        out = [(0.0, 1.0 / norm, c2 / norm, 1.0 / norm)]
        for sign in (1.0, -1.0):
            lam = sign * 0.5 * root
            # |c1| = 1 for both states; |c2|^2 = 4 omega^2 / (x^2 + root^2)
            c2p = 4 * omega * omega / (x * x + root * root)
            norm = 2.0 + c2p
            out.append((lam, 1.0 / norm, c2p / norm, 1.0 / norm))
        return out
    raise ValueError("closed forms exist only for phi = 0 or pi/2")
