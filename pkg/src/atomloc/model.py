"""Closed-form probe susceptibility of the loop-driven four-level atom.

All rates and frequencies are in units of the upper-level decay gamma1, and
susceptibilities are reported in units of the density/dipole prefactor
``N = 2 n |p|^2 / (hbar eps0)`` (``ModelParams.prefactor``, default 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import (DegenerateDenominator, InvalidParameters, InvalidReduction,
                     InvalidScheme)

Z_GUARD = 1e-18


@dataclass(frozen=True)
class ModelParams:
    """Drive amplitudes, collective phase and decays of the four-level loop."""

    omega1: float
    omega2: float
    omega3: float
    phi: float = 0.0
    gamma1: float = 1.0
    gamma2: float = 0.0
    prefactor: float = 1.0

    def __post_init__(self):
        for name in ("omega1", "omega2", "omega3", "phi", "gamma1", "gamma2", "prefactor"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidParameters(f"{name} must be finite, got {v!r}")
        for name in ("omega1", "omega2", "omega3", "gamma2"):
            if getattr(self, name) < 0:
                raise InvalidParameters(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if self.gamma1 <= 0:
            raise InvalidParameters(f"gamma1 must be > 0, got {self.gamma1!r}")
        if self.prefactor <= 0:
            raise InvalidParameters(f"prefactor must be > 0, got {self.prefactor!r}")

    @property
    def cos_phi(self) -> float:
        return math.cos(self.phi)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in
                ("omega1", "omega2", "omega3", "phi", "gamma1", "gamma2", "prefactor")}


@dataclass(frozen=True)
class ProbeContext:
    """Probe detuning and dimensionless standing-wave position kappa*x."""

    delta: float
    kx: float

    @property
    def sin_kx(self) -> float:
        return math.sin(self.kx)


@dataclass(frozen=True)
class Susceptibility:
    chi_re: float
    chi_im: float
    a_part: float
    b_part: float
    z_part: float


def _parts(params, delta, s, backend=None):
    return kernels.chi_parts(params.omega1, params.omega2, params.omega3,
                             params.cos_phi, params.gamma1, params.gamma2,
                             params.prefactor, delta, s, backend=backend)


def compute_denominator(params: ModelParams, ctx: ProbeContext) -> tuple[float, float, float]:
    """Real and imaginary parts A, B of the response denominator and Z = A^2 + B^2."""
    _, _, a, b, z = _parts(params, ctx.delta, ctx.sin_kx)
    return float(a), float(b), float(z)


def compute_chi(params: ModelParams, ctx: ProbeContext) -> Susceptibility:
    """Dispersive and absorptive susceptibility at one (delta, kx) point.

    Raises DegenerateDenominator when Z <= 1e-18 (in gamma1^4 units).
    """
    re, im, a, b, z = (float(v) for v in _parts(params, ctx.delta, ctx.sin_kx))
    if not z > Z_GUARD:
        raise DegenerateDenominator(
            f"Z = {z:.3e} <= {Z_GUARD:g} at delta={ctx.delta!r}, kx={ctx.kx!r}")
    return Susceptibility(re, im, a, b, z)


def chi_grid(params: ModelParams, delta, kx, backend=None):
    """Vectorised susceptibility on broadcast (delta, kx) arrays.

    Returns ``(chi_re, chi_im)``; degenerate points are NaN rather than an
    exception.
    """
    re, im, _, _, _ = _parts(params, delta, np.sin(np.asarray(kx, dtype=float)),
                             backend=backend)
    return re, im


def chi_im_gamma2zero(params: ModelParams, delta, kx):
    """Absorption from the reduced gamma2 = 0 closed form (array version)."""
    if params.gamma2 != 0:
        raise InvalidReduction(f"reduced form needs gamma2 = 0, got {params.gamma2!r}")
    delta = np.asarray(delta, dtype=float)
    s = np.sin(np.asarray(kx, dtype=float))
    g1 = params.gamma1
    w = params.omega2 ** 2 - 4.0 * delta ** 2
    shift = (8.0 * delta ** 3
             - 2.0 * delta * (params.omega1 ** 2 * s ** 2 + params.omega2 ** 2 + params.omega3 ** 2)
             - 2.0 * params.omega1 * params.omega2 * params.omega3 * params.cos_phi * s)
    den = g1 ** 2 * w ** 2 + shift ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > Z_GUARD, params.prefactor * g1 * w ** 2 / den, np.nan)


def compute_chi_gamma2zero(params: ModelParams, ctx: ProbeContext) -> Susceptibility:
    """Susceptibility through the reduced form valid only for gamma2 = 0.

    Only the absorptive part has an independent reduced expression; the
    dispersive part and A, B, Z come from the general formula.
    """
    if params.gamma2 != 0:
        raise InvalidReduction(f"reduced form needs gamma2 = 0, got {params.gamma2!r}")
    full = compute_chi(params, ctx)
    im = float(chi_im_gamma2zero(params, ctx.delta, ctx.kx))
    return Susceptibility(full.chi_re, im, full.a_part, full.b_part, full.z_part)


# --- level-scheme mappings ---------------------------------------------------

_RATES = ("a1b", "a1c", "a2b", "a2c", "a2a1", "a1a2")

_SCHEME_TERMS = {
    "a": (("a1b", "a1c"), ("a2b", "a2c")),
    "b": (("a1b", "a1c"), ("a2a1", "a2b", "a2c")),
    "c": (("a1a2", "a1b", "a1c"), ()),
    "d": (("a1a2", "a1b", "a1c"), ("a2b",)),
}


@dataclass(frozen=True)
class LevelScheme:
    """One of the four equivalent level arrangements with per-transition rates.

    ``rates`` maps transition names (``a1b``, ``a1c``, ``a2b``, ``a2c``,
    ``a2a1``, ``a1a2``; first level decays into the second) to rates.
    """

    variant: str
    rates: dict = field(default_factory=dict)


class SchemeMapping(NamedTuple):
    gamma1: float
    gamma2: float
    phase_sign: int  # -1: the scheme needs phi -> -phi (Omega3 -> Omega3*)


def map_level_scheme(scheme: LevelScheme) -> SchemeMapping:
    if scheme.variant not in _SCHEME_TERMS:
        raise InvalidScheme(f"unknown variant {scheme.variant!r}; expected one of a, b, c, d")
    unknown = set(scheme.rates) - set(_RATES)
    if unknown:
        raise InvalidScheme(f"unknown transitions {sorted(unknown)}")
    rates = {k: float(scheme.rates.get(k, 0.0)) for k in _RATES}
    bad = [k for k, v in rates.items() if not (math.isfinite(v) and v >= 0)]
    if bad:
        raise InvalidScheme(f"rates must be finite and >= 0: {bad}")
    up1, up2 = _SCHEME_TERMS[scheme.variant]
    stray = [k for k in _RATES if k not in up1 + up2 and rates[k] != 0.0]
    if stray:
        raise InvalidScheme(
            f"variant {scheme.variant} has no decay channel(s) {stray}; they must be zero")
    gamma1 = sum(rates[k] for k in up1)
    gamma2 = sum(rates[k] for k in up2)
    if gamma1 <= 0:
        raise InvalidScheme("the probed upper level must decay (gamma1 > 0)")
    return SchemeMapping(gamma1, gamma2, -1 if scheme.variant == "b" else 1)


def apply_level_scheme(params: ModelParams, scheme: LevelScheme) -> ModelParams:
    """Model parameters equivalent to ``params`` driven in ``scheme``."""
    g1, g2, sign = map_level_scheme(scheme)
    return params.with_(gamma1=g1, gamma2=g2, phi=sign * params.phi)
