"""Cross-checks of every closed form against independent computations.

Each suite returns a SuiteResult with the worst error seen and its
tolerance.  Reports contain no timings so reruns with the same seed are
byte-identical.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle
from .dressed import dressed_grid, equal_drive_spectrum, hamiltonians
from .errors import ComplexBranch
from .model import ModelParams, chi_grid, chi_im_gamma2zero
from .roots import (chi_im_factored, cubic_coefficients, label_branches,
                    root_residual_scale, solve_delta_cubic, sorted_cubic_roots)
from .scan import scan_profile

FLOOR = 1e-12


@dataclass(frozen=True)
class SuiteResult:
    name: str
    checked: int
    skipped: int
    worst: float
    tol: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.checked > 0 and self.worst <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.name:<22s} {status}  checked={self.checked:<5d} skipped={self.skipped:<4d} "
                f"worst={self.worst:.3e}  tol={self.tol:.0e}"
                + (f"  [{self.detail}]" if self.detail else ""))


@dataclass(frozen=True)
class Draws:
    omega: np.ndarray  # (n, 3)
    delta: np.ndarray
    gamma2: np.ndarray
    phi: np.ndarray
    kx: np.ndarray

    def __len__(self):
        return self.delta.size

    def params(self, i, **over) -> ModelParams:
        kw = dict(omega1=self.omega[i, 0], omega2=self.omega[i, 1], omega3=self.omega[i, 2],
                  phi=self.phi[i], gamma1=1.0, gamma2=self.gamma2[i])
        kw.update(over)
        return ModelParams(**{k: float(v) for k, v in kw.items()})


def draw_parameters(n: int, seed: int) -> Draws:
    """Uniform draws: drives in [0, 50], detuning in [-30, 30], gamma2 in [0, 10],
    phase in [0, 2 pi), position in [-pi, pi)."""
    rng = np.random.default_rng(seed)
    return Draws(rng.uniform(0.0, 50.0, (n, 3)), rng.uniform(-30.0, 30.0, n),
                 rng.uniform(0.0, 10.0, n), rng.uniform(0.0, 2 * math.pi, n),
                 rng.uniform(-math.pi, math.pi, n))


def rel_err(a, b, floor=FLOOR):
    a = np.asarray(a)
    b = np.asarray(b)
    return np.abs(a - b) / np.maximum(np.abs(b), floor)


def _worst(errs) -> float:
    errs = np.asarray(errs, dtype=float)
    if errs.size == 0:
        return math.inf
    return float(np.max(np.where(np.isfinite(errs), errs, math.inf)))


def analytic_chi(draws: Draws, corrupt_a_sign: bool = False):
    """(chi_re, chi_im) of every draw from the closed form."""
    re = np.empty(len(draws))
    im = np.empty(len(draws))
    for i in range(len(draws)):
        p = draws.params(i)
        if corrupt_a_sign:
            re[i], im[i] = _chi_flipped_a(p, draws.delta[i], draws.kx[i])
        else:
            r, m = chi_grid(p, draws.delta[i], draws.kx[i])
            re[i], im[i] = float(r), float(m)
    return re, im


def _chi_flipped_a(p: ModelParams, delta, kx):
    # mutation used to prove the suites can fail
    from . import kernels
    _, _, a, b, z = kernels.chi_parts(p.omega1, p.omega2, p.omega3, p.cos_phi, p.gamma1,
                                      p.gamma2, p.prefactor, delta, math.sin(kx))
    a = -float(a)
    w = p.omega2 ** 2 - 4 * delta * delta
    return (p.prefactor * (w * a + 2 * p.gamma2 * delta * b) / z,
            p.prefactor * (2 * p.gamma2 * delta * a - w * b) / z)


def oracle_solutions(draws: Draws, backend=None):
    m, b = oracle.linear_systems(draws.omega[:, 0], draws.omega[:, 1], draws.omega[:, 2],
                                 1.0, draws.gamma2, draws.delta, draws.kx, 0.0, 0.0, draws.phi)
    v, resid = oracle.solve_batch(m, b, backend=backend)
    return m, b, v, resid


def suite_oracle(draws: Draws, backend=None) -> SuiteResult:
    _, im = analytic_chi(draws)
    _, _, v, resid = oracle_solutions(draws, backend)
    chi = v[:, 0] / oracle.DEFAULT_PROBE
    ok = np.isfinite(im) & (resid <= oracle.RESIDUAL_TOL)
    return SuiteResult("oracle-vs-analytic", int(ok.sum()), int((~ok).sum()),
                       _worst(rel_err(im[ok], chi.imag[ok])), 1e-8)


def suite_dual_oracle(draws: Draws, backend=None) -> SuiteResult:
    m, b, v, resid = oracle_solutions(draws, backend)
    ok = resid <= oracle.RESIDUAL_TOL
    om = draws.omega.max(axis=1)
    dt = oracle.default_dt(om, np.maximum(1.0, draws.gamma2), np.abs(draws.delta))
    w, steps, done, _ = oracle.integrate_batch(m[ok], b[ok], dt[ok], backend=backend)
    err = np.linalg.norm(w - v[ok], axis=1) / np.linalg.norm(v[ok], axis=1)
    err = np.where(done, err, math.inf)
    return SuiteResult("solve-vs-integrate", int(ok.sum()), int((~ok).sum()), _worst(err), 1e-7,
                       f"not converged={int((~done).sum())}")


def suite_representation(draws: Draws, corrupt_a_sign: bool = False) -> list:
    _, im = analytic_chi(draws, corrupt_a_sign)
    errs = []
    skipped = 0
    for i in range(len(draws)):
        p = draws.params(i)
        if p.omega1 * p.omega2 == 0 or not math.isfinite(im[i]):
            skipped += 1
            continue
        fac = float(chi_im_factored(p, draws.delta[i], draws.kx[i]))
        errs.append(rel_err(im[i], fac))
    full = SuiteResult("factored-form", len(errs), skipped, _worst(errs), 1e-10)

    errs = []
    skipped = 0
    for i in range(len(draws)):
        p = draws.params(i, gamma2=0.0)
        if p.omega1 * p.omega2 == 0:
            skipped += 1
            continue
        d, kx = draws.delta[i], draws.kx[i]
        if corrupt_a_sign:
            gen = _chi_flipped_a(p, d, kx)[1]
        else:
            gen = float(chi_grid(p, d, kx)[1])
        red = float(chi_im_gamma2zero(p, d, kx))
        fac = float(chi_im_factored(p, d, kx))
        errs.append(max(rel_err(gen, red), rel_err(fac, red)))
    reduced = SuiteResult("gamma2-zero-reduction", len(errs), skipped, _worst(errs), 1e-12)
    return [full, reduced]


def suite_spectral(draws: Draws, backend=None) -> list:
    eig_err, vieta_err, vec_err = [], [], []
    skipped = 0
    for i in range(len(draws)):
        p = draws.params(i)
        kx = draws.kx[i]
        s = math.sin(kx)
        pp, qq = cubic_coefficients(p, np.array([s]))
        try:
            roots = sorted_cubic_roots(pp, qq, backend=backend)
        except ComplexBranch:
            skipped += 1
            continue
        h = hamiltonians(p, np.array([kx]))
        scale = max(1.0, float(np.linalg.norm(h[0], 2)))
        ref = np.linalg.eigvalsh(h[0])
        eig_err.append(np.max(np.abs(roots[0] - ref)) / scale)
        r = roots[0]
        vs = root_residual_scale(pp)[0]
        vieta_err.append(max(abs(r.sum()) / scale,
                             abs(r[0] * r[1] + r[0] * r[2] + r[1] * r[2] + pp[0] / 4) / scale ** 2,
                             abs(r.prod() - qq[0] / 4) / vs))
        lam, vecs, _, flags = dressed_grid(p, [kx], backend=backend)
        if flags.any():
            skipped += 1
            continue
        res = np.linalg.norm(h[0] @ vecs[0] - vecs[0] * lam[0][None, :], axis=0)
        vec_err.append(float(res.max()) / scale)
    return [SuiteResult("eigen-vs-cubic", len(eig_err), skipped, _worst(eig_err), 1e-10),
            SuiteResult("vieta", len(vieta_err), skipped, _worst(vieta_err), 1e-9),
            SuiteResult("eigvec-residual", len(vec_err), skipped, _worst(vec_err), 1e-10)]


def suite_closed_forms() -> SuiteResult:
    errs = []
    base = ModelParams(30.0, 20.0, 20.0)
    r = solve_delta_cubic(base.with_(phi=math.pi / 2), math.pi / 2)
    half = 0.5 * math.sqrt(1700.0)
    errs.append(np.max(np.abs(np.array([r.delta5, r.delta3, r.delta4]) - [-half, 0.0, half])))
    r = solve_delta_cubic(base, math.pi / 2)
    exp = [0.25 * (30 - math.sqrt(4100.0)), -15.0, 0.25 * (30 + math.sqrt(4100.0))]
    errs.append(np.max(np.abs(np.array([r.delta5, r.delta3, r.delta4]) - exp)))
    # equal-drive closed forms over a sweep of positions
    for phi in (0.0, math.pi / 2):
        p = base.with_(phi=phi)
        kx = np.linspace(-3.0, 3.0, 61)
        lam, vecs, _, _ = dressed_grid(p, kx)
        pops = np.abs(vecs) ** 2
        for j, x in enumerate(kx):
            ref = sorted(equal_drive_spectrum(30.0, 20.0, x, phi))
            for k, (e, pa1, pa2, pb) in enumerate(ref):
                errs.append(abs(lam[j, k] - e))
                errs.append(np.max(np.abs(pops[j, :, k] - [pa1, pa2, pb])))
    return SuiteResult("closed-forms", len(errs), 0, _worst(errs), 1e-9)


def suite_symmetry(draws: Draws) -> list:
    exact, mirror = [], []
    for i in range(len(draws)):
        p = draws.params(i)
        d, kx = draws.delta[i], draws.kx[i]
        a = chi_grid(p, d, kx)
        b = chi_grid(p.with_(phi=-p.phi), d, kx)
        exact.append(0.0 if (a[0] == b[0] and a[1] == b[1]) else math.inf)
        pi_im = float(chi_grid(p.with_(phi=math.pi), d, kx)[1])
        zero_im = float(chi_grid(p.with_(phi=0.0), d, -kx)[1])
        mirror.append(rel_err(pi_im, zero_im))
    travel = []
    n = min(len(draws), 200)
    rng = np.random.default_rng(len(draws))
    ratios = rng.uniform(0.25, 4.0, n)
    base = oracle_solutions(Draws(draws.omega[:n], draws.delta[:n], draws.gamma2[:n],
                                  draws.phi[:n], draws.kx[:n]))[2][:, 0]
    m, b = oracle.linear_systems(draws.omega[:n, 0], draws.omega[:n, 1], draws.omega[:n, 2],
                                 1.0, draws.gamma2[:n], draws.delta[:n], draws.kx[:n],
                                 0.0, 0.0, draws.phi[:n], k_over_kappa=ratios)
    other = oracle.solve_batch(m, b)[0][:, 0]
    travel = rel_err(other, base)
    return [SuiteResult("phase-parity", len(exact), 0, _worst(exact), 0.0),
            SuiteResult("mirror-pi", len(mirror), 0, _worst(mirror), 1e-12),
            SuiteResult("traveling-phase", n, 0, _worst(travel), 1e-10)]


def suite_collective_phase(draws: Draws, n: int = 200, seed: int = 0) -> SuiteResult:
    n = min(n, len(draws))
    rng = np.random.default_rng(seed)
    ph = rng.uniform(0.0, 2 * math.pi, (n, 3))
    sl = slice(0, n)
    args = (draws.omega[sl, 0], draws.omega[sl, 1], draws.omega[sl, 2], 1.0,
            draws.gamma2[sl], draws.delta[sl], draws.kx[sl])
    m1, b1 = oracle.linear_systems(*args, ph[:, 0], ph[:, 1], ph[:, 2])
    m2, b2 = oracle.linear_systems(*args, 0.0, 0.0, ph[:, 1] + ph[:, 2] - ph[:, 0])
    v1 = oracle.solve_batch(m1, b1)[0][:, 0]
    v2 = oracle.solve_batch(m2, b2)[0][:, 0]
    return SuiteResult("collective-phase", n, 0, _worst(rel_err(v1, v2)), 1e-10)


def suite_flat(n_points: int = 4001) -> SuiteResult:
    prof = scan_profile(ModelParams(30.0, 20.0, 20.0, phi=math.pi / 2, gamma2=0.0), 0.0, n_points)
    spread = prof.spread()
    dev = abs(float(np.mean(prof.values)) - 1.0)
    return SuiteResult("flat-response", n_points, 0, max(spread, dev), 1e-12)


def run_all(samples: int = 1000, seed: int = 42, corrupt_a_sign: bool = False,
            backend=None) -> list:
    draws = draw_parameters(samples, seed)
    out = [suite_oracle(draws, backend), suite_dual_oracle(draws, backend)]
    out += suite_representation(draws, corrupt_a_sign)
    out += suite_spectral(draws, backend)
    out.append(suite_closed_forms())
    out += suite_symmetry(draws)
    out.append(suite_collective_phase(draws, seed=seed + 1))
    out.append(suite_flat())
    return out


def report_text(results: list, samples: int, seed: int) -> str:
    lines = [f"atomloc verification  samples={samples} seed={seed}"]
    lines += [r.line() for r in results]
    failed = [r.name for r in results if not r.passed]
    lines.append("overall: " + ("PASS" if not failed else "FAIL (" + ", ".join(failed) + ")"))
    return "\n".join(lines) + "\n"
