"""Independent steady state of the weak-probe coherence equations.

The three probe coherences ``v = (rho_a1c, rho_a2c, rho_bc)`` obey
``dv/dt = M v + b`` once the ground state is frozen at unit population.  The
steady state is found two ways: a direct 3x3 solve, and fixed-step RK4 time
integration from ``v = 0``.  Neither path uses the closed-form susceptibility.

The susceptibility follows as ``chi = N rho_a1c / eps_p`` where ``eps_p`` is
the probe Rabi amplitude entering the source term ``b = (i eps_p / 2, 0, 0)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dressed import THETA2, THETA3
from .errors import InvalidParameters, NoConvergence, SingularSystem
from .model import ModelParams, ProbeContext

DEFAULT_PROBE = 1e-3
RESIDUAL_TOL = 1e-8
DEFAULT_T_MAX = 1e5
STEP_TOL = 1e-12


@dataclass(frozen=True)
class FieldPhases:
    """Individual drive phases and propagation geometry.

    Field j enters with the complex Rabi frequency ``|O_j| exp(-i phi_j)``.
    """

    phi1: float = 0.0
    phi2: float = 0.0
    phi3: float = 0.0
    theta2: float = THETA2
    theta3: float = THETA3
    k_over_kappa: float = 1.0

    @property
    def collective(self) -> float:
        return self.phi2 + self.phi3 - self.phi1

    @classmethod
    def from_params(cls, params: ModelParams, **geometry) -> "FieldPhases":
        return cls(phi3=params.phi, **geometry)


@dataclass(frozen=True)
class CoherenceVector:
    rho_a1c: complex
    rho_a2c: complex
    rho_bc: complex
    probe: float = DEFAULT_PROBE

    def as_array(self) -> np.ndarray:
        return np.array([self.rho_a1c, self.rho_a2c, self.rho_bc])

    def chi(self, prefactor: float = 1.0) -> complex:
        return prefactor * self.rho_a1c / self.probe


def linear_systems(omega1, omega2, omega3, gamma1, gamma2, delta, kx,
                   phi1=0.0, phi2=0.0, phi3=0.0, theta2=THETA2, theta3=THETA3,
                   k_over_kappa=1.0, probe=DEFAULT_PROBE):
    """Vectorised (M, b) for broadcast parameter arrays; shapes (n, 3, 3), (n, 3)."""
    arrs = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (
        omega1, omega2, omega3, gamma1, gamma2, delta, kx, phi1, phi2, phi3,
        theta2, theta3, k_over_kappa, probe)))
    o1, o2, o3, g1, g2, d, kx, f1, f2, f3, th2, th3, kr, eps = (a.ravel() for a in arrs)
    n = d.size
    s = np.sin(kx)
    c1 = o1 * np.exp(-1j * f1)
    c2 = o2 * np.exp(-1j * f2) * np.exp(1j * kr * kx * np.cos(th2))
    c3 = o3 * np.exp(-1j * f3) * np.exp(1j * kr * kx * np.cos(th3))
    m = np.zeros((n, 3, 3), dtype=np.complex128)
    m[:, 0, 0] = -(1j * d + 0.5 * g1)
    m[:, 1, 1] = -(1j * d + 0.5 * g2)
    m[:, 2, 2] = -1j * d
    m[:, 0, 1] = 0.5j * c3
    m[:, 1, 0] = 0.5j * np.conj(c3)
    m[:, 0, 2] = 0.5j * c1 * s
    m[:, 2, 0] = 0.5j * np.conj(c1) * s
    m[:, 1, 2] = 0.5j * c2
    m[:, 2, 1] = 0.5j * np.conj(c2)
    b = np.zeros((n, 3), dtype=np.complex128)
    b[:, 0] = 0.5j * eps
    return m, b


def _phases(params, phases):
    return phases if phases is not None else FieldPhases.from_params(params)


def build_linear_system(params: ModelParams, ctx: ProbeContext,
                        phases: FieldPhases | None = None, probe: float = DEFAULT_PROBE):
    """System matrix M and probe source b of dv/dt = M v + b.

    ``phases`` overrides ``params.phi``; by default field 3 carries the whole
    collective phase.
    """
    ph = _phases(params, phases)
    m, b = linear_systems(params.omega1, params.omega2, params.omega3, params.gamma1,
                          params.gamma2, ctx.delta, ctx.kx, ph.phi1, ph.phi2, ph.phi3,
                          ph.theta2, ph.theta3, ph.k_over_kappa, probe)
    return m[0], b[0]


def solve_batch(m, b, backend=None):
    """Steady states -M^-1 b; returns ``(v, residual)`` with residual relative to ||b||."""
    return kernels.solve3(m, -np.asarray(b), backend=backend)


def steady_state_solve(params: ModelParams, ctx: ProbeContext,
                       phases: FieldPhases | None = None,
                       probe: float = DEFAULT_PROBE) -> CoherenceVector:
    m, b = build_linear_system(params, ctx, phases, probe)
    v, resid = solve_batch(m[None], b[None])
    if not resid[0] <= RESIDUAL_TOL:
        raise SingularSystem(
            f"steady-state solve residual {resid[0]:.3e} exceeds {RESIDUAL_TOL:g} "
            f"at delta={ctx.delta!r}, kx={ctx.kx!r}")
    return CoherenceVector(complex(v[0, 0]), complex(v[0, 1]), complex(v[0, 2]), probe)


def rk4_step(m, b, v, dt):
    """One textbook classical RK4 step of dv/dt = m v + b."""
    f = lambda x: m @ x + b  # noqa: E731
    k1 = f(v)
    k2 = f(v + 0.5 * dt * k1)
    k3 = f(v + 0.5 * dt * k2)
    k4 = f(v + dt * k3)
    return v + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_propagator(m, b, dt):
    """Affine map (P, q) with rk4_step(m, b, v, dt) == P v + q for every v.

    For a linear autonomous system RK4 is exactly
    ``P = I + hM + (hM)^2/2 + (hM)^3/6 + (hM)^4/24`` and
    ``q = h (I + hM/2 + (hM)^2/6 + (hM)^3/24) b``.
    """
    m = np.asarray(m, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    dt = np.asarray(dt, dtype=float)[..., None, None]
    hm = dt * m
    eye = np.broadcast_to(np.eye(3), hm.shape)
    hm2 = hm @ hm
    hm3 = hm2 @ hm
    hm4 = hm3 @ hm
    prop = eye + hm + hm2 / 2 + hm3 / 6 + hm4 / 24
    acc = eye + hm / 2 + hm2 / 6 + hm3 / 24
    shift = dt[..., 0] * np.einsum("...ij,...j->...i", acc, b)
    return prop, shift


def default_dt(omega_max, gamma_max, delta_abs):
    return 0.05 / np.maximum.reduce([np.ones_like(np.asarray(omega_max, dtype=float)),
                                     np.asarray(omega_max, dtype=float),
                                     np.asarray(gamma_max, dtype=float),
                                     np.asarray(delta_abs, dtype=float)])


def slowest_rate(m) -> np.ndarray:
    """Smallest decay rate min |Re lambda(M)| per system."""
    return np.min(np.abs(np.linalg.eigvals(np.asarray(m)).real), axis=-1)


def min_t_max(gamma1: float, gamma2: float) -> float:
    """Shortest accepted integration window: 20 times the slowest bare decay time."""
    return 20.0 / min(x for x in (0.5 * gamma1, 0.5 * gamma2) if x > 0)


def default_t_max(rate) -> np.ndarray:
    rate = np.asarray(rate, dtype=float)
    with np.errstate(divide="ignore"):
        need = np.where(rate > 0, 40.0 / rate, DEFAULT_T_MAX)
    return np.maximum(DEFAULT_T_MAX, need)


def integrate_batch(m, b, dt, t_max=None, tol=STEP_TOL, backend=None):
    """RK4 relaxation for a batch of systems from v = 0.

    Returns ``(v, steps, converged, last_change)``.
    """
    rate = slowest_rate(m)
    if t_max is None:
        t_max = default_t_max(rate)
    prop, shift = rk4_propagator(m, b, dt)
    max_steps = np.ceil(np.asarray(t_max, dtype=float) / np.asarray(dt, dtype=float)).astype(np.int64)
    return kernels.rk4_relax(prop, shift, max_steps, tol, backend=backend)


def steady_state_integrate(params: ModelParams, ctx: ProbeContext,
                           phases: FieldPhases | None = None, t_max: float | None = None,
                           dt: float | None = None, probe: float = DEFAULT_PROBE,
                           tol: float = STEP_TOL) -> CoherenceVector:
    """Steady state by fixed-step RK4 integration from v(0) = 0.

    Stops once a single step changes v by at most ``tol * ||v||``; raises
    NoConvergence if that has not happened by ``t_max``.  The default ``t_max`` is at least 1e5 and
    grows with the slowest relaxation time.
    """
    om = max(params.omega1, params.omega2, params.omega3)
    gm = max(params.gamma1, params.gamma2)
    dt_cap = 0.05 / max(1.0, om, gm)
    if dt is None:
        dt = float(default_dt(om, gm, abs(ctx.delta)))
    elif not 0 < dt <= dt_cap:
        raise InvalidParameters(f"dt must be in (0, {dt_cap:.4g}], got {dt!r}")
    t_min = min_t_max(params.gamma1, params.gamma2)
    if t_max is not None and t_max < t_min:
        raise InvalidParameters(f"t_max must be >= {t_min:.4g}, got {t_max!r}")
    m, b = build_linear_system(params, ctx, phases, probe)
    v, steps, ok, change = integrate_batch(m[None], b[None], dt, t_max, tol)
    if not ok[0]:
        raise NoConvergence(
            f"no steady state after {int(steps[0])} steps (t = {steps[0] * dt:.4g}); "
            f"last relative change {change[0]:.3e}", residual=float(change[0]))
    return CoherenceVector(complex(v[0, 0]), complex(v[0, 1]), complex(v[0, 2]), probe)


def oracle_chi(params: ModelParams, ctx: ProbeContext, phases: FieldPhases | None = None,
               method: str = "solve") -> complex:
    if method == "solve":
        vec = steady_state_solve(params, ctx, phases)
    elif method == "integrate":
        vec = steady_state_integrate(params, ctx, phases)
    else:
        raise ValueError(f"unknown method {method!r}")
    return vec.chi(params.prefactor)


def oracle_profile(params: ModelParams, delta: float, kx, phases: FieldPhases | None = None,
                   backend=None) -> np.ndarray:
    """Complex susceptibility from the direct solve on a kx array; NaN where singular."""
    ph = _phases(params, phases)
    kx = np.asarray(kx, dtype=float)
    m, b = linear_systems(params.omega1, params.omega2, params.omega3, params.gamma1,
                          params.gamma2, delta, kx, ph.phi1, ph.phi2, ph.phi3,
                          ph.theta2, ph.theta3, ph.k_over_kappa, DEFAULT_PROBE)
    v, resid = solve_batch(m, b, backend=backend)
    chi = params.prefactor * v[:, 0] / DEFAULT_PROBE
    chi[~(resid <= RESIDUAL_TOL)] = np.nan
    return chi.reshape(kx.shape)


