import math

import numpy as np
import pytest

from atomloc import (DegenerateDenominator, InvalidParameters, InvalidReduction, InvalidScheme,
                     LevelScheme, ModelParams, ProbeContext, apply_level_scheme, chi_grid,
                     compute_chi, compute_chi_gamma2zero, compute_denominator, map_level_scheme)
from atomloc.model import chi_im_gamma2zero
from conftest import FIG3, HALF_PI, rel

# golden values frozen from the steady-state oracle (3x3 linear solve)
GOLDEN_FIG4 = (0.02441220899508916, 0.0016619240475459127)  # (chi', chi'') / N
GOLDEN_FIG3_D5 = (0.00868628212475214, 7.545719093845242e-05)


def test_params_validation():
    with pytest.raises(InvalidParameters):
        ModelParams(-1.0, 1.0, 1.0)
    with pytest.raises(InvalidParameters):
        ModelParams(1.0, 1.0, 1.0, gamma1=0.0)
    with pytest.raises(InvalidParameters):
        ModelParams(1.0, 1.0, 1.0, gamma2=-0.1)
    with pytest.raises(InvalidParameters):
        ModelParams(1.0, 1.0, 1.0, prefactor=0.0)
    with pytest.raises(InvalidParameters):
        ModelParams(1.0, float("nan"), 1.0)


def test_denominator_antinode():
    a, b, z = compute_denominator(FIG3, ProbeContext(0.0, HALF_PI))
    assert a == pytest.approx(24000.0, rel=1e-14)
    assert b == pytest.approx(-400.0, rel=1e-14)
    assert z == pytest.approx(5.7616e8, rel=1e-14)


def test_denominator_node_and_quadrature():
    p = ModelParams(13.0, 7.0, 3.0, phi=0.4, gamma2=2.5)
    a, b, _ = compute_denominator(p, ProbeContext(0.0, 0.0))
    assert a == 0.0 and b == pytest.approx(-49.0)
    a, b, _ = compute_denominator(FIG3.with_(phi=HALF_PI), ProbeContext(0.0, 1.234))
    assert abs(a) < 1e-9 and b == pytest.approx(-400.0)


def test_z_is_sum_of_squares():
    s = compute_chi(FIG3.with_(gamma2=3.0), ProbeContext(2.7, 0.4))
    assert rel(s.z_part, s.a_part ** 2 + s.b_part ** 2) < 1e-12


def test_flat_case_chi():
    for kx in np.linspace(-3, 3, 7):
        s = compute_chi(FIG3.with_(phi=HALF_PI), ProbeContext(0.0, kx))
        assert abs(s.chi_re) < 1e-13  # cos(pi/2) is 6e-17, not 0
        assert s.chi_im == pytest.approx(1.0, rel=1e-14)


def test_antinode_value():
    s = compute_chi(FIG3, ProbeContext(0.0, HALF_PI))
    assert s.chi_im == pytest.approx(1.6e5 / 5.7616e8, rel=1e-12)


def test_golden_oracle_values():
    s = compute_chi(ModelParams(30.0, 20.0, 10.0, gamma2=1.0), ProbeContext(5.0, math.pi / 6))
    assert rel(s.chi_re, GOLDEN_FIG4[0]) < 1e-10
    assert rel(s.chi_im, GOLDEN_FIG4[1]) < 1e-10
    s = compute_chi(FIG3, ProbeContext(5.0, math.pi / 3))
    assert rel(s.chi_re, GOLDEN_FIG3_D5[0]) < 1e-10
    assert rel(s.chi_im, GOLDEN_FIG3_D5[1]) < 1e-10


def test_degenerate_denominator():
    # omega2 = 0 at delta = 0, node: A = B = 0
    p = ModelParams(10.0, 0.0, 5.0)
    with pytest.raises(DegenerateDenominator):
        compute_chi(p, ProbeContext(0.0, 0.0))
    re, im = chi_grid(p, 0.0, np.array([0.0, 1.0]))
    assert np.isnan(im[0]) and np.isnan(re[0])


def test_gamma2zero_reduction():
    kx = np.linspace(-math.pi, math.pi, 301)
    _, im = chi_grid(FIG3, 5.0, kx)
    red = chi_im_gamma2zero(FIG3, 5.0, kx)
    assert np.max(np.abs(im - red) / np.abs(red)) < 1e-12
    s = compute_chi_gamma2zero(FIG3.with_(phi=HALF_PI), ProbeContext(0.0, 0.3))
    assert s.chi_im == pytest.approx(1.0, rel=1e-14)
    # numerator vanishes at delta = omega2 / 2
    assert abs(float(chi_im_gamma2zero(FIG3, 10.0, 0.7))) < 1e-18
    with pytest.raises(InvalidReduction):
        compute_chi_gamma2zero(FIG3.with_(gamma2=1.0), ProbeContext(0.0, 0.0))


def test_phase_parity_and_mirror():
    rng = np.random.default_rng(3)
    for _ in range(50):
        o = rng.uniform(0, 40, 3)
        p = ModelParams(*o, phi=rng.uniform(-7, 7), gamma2=rng.uniform(0, 5))
        d, kx = rng.uniform(-20, 20), rng.uniform(-math.pi, math.pi)
        a = chi_grid(p, d, kx)
        b = chi_grid(p.with_(phi=-p.phi), d, kx)
        assert a[0] == b[0] and a[1] == b[1]
        m = chi_grid(p.with_(phi=math.pi - p.phi), d, -kx)[1]
        assert rel(float(m), float(a[1])) < 1e-12
        h = chi_grid(p, d, math.pi - kx)[1]
        assert rel(float(h), float(a[1])) < 1e-12


def test_prefactor_linearity():
    p = FIG3.with_(gamma2=2.0)
    a = compute_chi(p, ProbeContext(3.0, 0.5))
    b = compute_chi(p.with_(prefactor=4.0), ProbeContext(3.0, 0.5))
    assert b.chi_im == 4.0 * a.chi_im and b.chi_re == 4.0 * a.chi_re


def test_absorption_nonnegative_on_grid():
    for p in (FIG3, FIG3.with_(gamma2=10.0), FIG3.with_(phi=1.0, gamma2=1.0)):
        dd, kk = np.meshgrid(np.linspace(-30, 30, 121), np.linspace(-math.pi, math.pi, 121))
        _, im = chi_grid(p, dd, kk)
        assert np.nanmin(im) >= -1e-12 * np.nanmax(im)


def test_level_schemes():
    m = map_level_scheme(LevelScheme("a", {"a1b": 0.4, "a1c": 0.6, "a2b": 0.3, "a2c": 0.7}))
    assert m.gamma1 == pytest.approx(1.0) and m.gamma2 == pytest.approx(1.0) and m.phase_sign == 1
    m = map_level_scheme(LevelScheme("c", {"a1a2": 0.2, "a1b": 0.3, "a1c": 0.5}))
    assert m.gamma2 == 0.0 and m.gamma1 == pytest.approx(1.0)
    m = map_level_scheme(LevelScheme("b", {"a1b": 1.0, "a2a1": 0.5, "a2c": 0.5}))
    assert m == (1.0, 1.0, -1)
    m = map_level_scheme(LevelScheme("d", {"a1a2": 0.5, "a1c": 0.5, "a2b": 2.0}))
    assert m == (1.0, 2.0, 1)
    with pytest.raises(InvalidScheme):
        map_level_scheme(LevelScheme("c", {"a1c": 1.0, "a2b": 0.5}))
    with pytest.raises(InvalidScheme):
        map_level_scheme(LevelScheme("e", {}))
    with pytest.raises(InvalidScheme):
        map_level_scheme(LevelScheme("a", {"a1c": -1.0}))
    with pytest.raises(InvalidScheme):
        map_level_scheme(LevelScheme("a", {"a2c": 1.0}))


def test_scheme_b_matches_a_with_negated_phase():
    base = ModelParams(30.0, 20.0, 10.0, phi=math.pi / 3)
    pb = apply_level_scheme(base, LevelScheme("b", {"a1c": 1.0, "a2b": 1.0}))
    pa = apply_level_scheme(base.with_(phi=-math.pi / 3), LevelScheme("a", {"a1c": 1.0, "a2b": 1.0}))
    assert pb.phi == pytest.approx(-math.pi / 3)
    ctx = ProbeContext(4.0, 0.8)
    assert compute_chi(pb, ctx).chi_im == compute_chi(pa, ctx).chi_im


def test_backends_agree(backend):
    dd, kk = np.meshgrid(np.linspace(-30, 30, 61), np.linspace(-3, 3, 61))
    p = ModelParams(25.0, 18.0, 31.0, phi=0.7, gamma2=3.0)
    re, im = chi_grid(p, dd, kk, backend=backend)
    re0, im0 = chi_grid(p, dd, kk, backend="numpy")
    # chi' changes sign on the grid, so compare on the profile scale
    assert np.max(np.abs(re - re0)) <= 1e-13 * np.max(np.abs(re0))
    assert np.max(np.abs(im - im0)) <= 1e-13 * np.max(np.abs(im0))
