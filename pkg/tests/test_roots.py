import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atomloc import ComplexBranch, ModelParams, ZeroDetuning, ZeroDrive, chi_grid
from atomloc.roots import (branch_curves, chi_im_factored, cubic_coefficients,
                           denominator_roots, level_crossings, numerator_roots,
                           root_residual_scale, solve_delta_cubic, sorted_cubic_roots)
from atomloc.scan import find_peaks, scan_profile
from conftest import FIG3, FIG6, HALF_PI, rel


def test_numerator_roots_phi0():
    l1, l2 = numerator_roots(FIG3, 4.0)
    assert l1 == pytest.approx(-4 / 15, abs=1e-15) and l2 == pytest.approx(-4 / 15, abs=1e-15)


def test_numerator_roots_quadrature():
    # correct value is +-i 2 delta O3 / (O1 O2); reduces to +-2i delta / O1 for equal drives
    p = ModelParams(17.0, 17.0, 17.0, phi=HALF_PI)
    l1, l2 = numerator_roots(p, 4.0)
    assert abs(l1 - 8j / 17) < 1e-14 and abs(l2 + 8j / 17) < 1e-14
    p = ModelParams(30.0, 20.0, 10.0, phi=HALF_PI)
    l1, _ = numerator_roots(p, 4.0)
    assert abs(l1 - 1j * 2 * 4 * 10 / (30 * 20)) < 1e-14


def test_numerator_roots_zero_detuning_and_vieta():
    assert numerator_roots(FIG3, 0.0) == (0, 0)
    p = ModelParams(30.0, 20.0, 10.0, phi=0.9)
    d = 3.0
    l1, l2 = numerator_roots(p, d)
    assert rel(abs(l1 * l2), 4 * d * d * 100 / (900 * 400)) < 1e-10
    assert rel((l1 + l2).real, -4 * d * 10 * math.cos(0.9) / 600) < 1e-10
    with pytest.raises(ZeroDrive):
        numerator_roots(ModelParams(0.0, 1.0, 1.0), 1.0)


def test_denominator_roots():
    r = denominator_roots(FIG3, 5.0)
    assert r.r1 == pytest.approx(-1 / 3) and r.r2 == pytest.approx(1 / 3) and r.r1 == -r.r2
    assert r.weight_r34 == 4 * 25 * 30 ** 4
    with pytest.raises(ZeroDetuning):
        denominator_roots(FIG3, 0.0)
    with pytest.raises(ZeroDrive):
        denominator_roots(ModelParams(0.0, 1.0, 1.0), 1.0)


def test_r34_positions_match_peaks():
    r = denominator_roots(FIG3, 13.0)
    predicted = []
    for root in (r.r3, r.r4):
        assert abs(root.imag) == 0 and abs(root.real) <= 1
        x = math.asin(root.real)
        predicted += [x, -math.pi - x if x < 0 else math.pi - x]
    peaks = [p.position for p in find_peaks(scan_profile(FIG3, 13.0))]
    assert len(peaks) == 4
    step = 2 * math.pi / 4001
    for x in predicted:
        assert min(abs(x - q) for q in peaks) < step


@pytest.mark.parametrize("params", [FIG3, FIG6, FIG3.with_(phi=1.1, gamma2=4.0),
                                    ModelParams(30.0, 20.0, 10.0, phi=HALF_PI, gamma2=10.0)])
@pytest.mark.parametrize("delta", [0.0, 5.0, -13.0, 0.3])
def test_factored_form(params, delta):
    kx = np.linspace(-math.pi, math.pi, 257)
    _, im = chi_grid(params, delta, kx)
    fac = chi_im_factored(params, delta, kx)
    assert np.max(np.abs(fac - im) / np.abs(im)) < 1e-10


def test_cubic_closed_forms():
    r = solve_delta_cubic(FIG3.with_(phi=HALF_PI), HALF_PI)
    h = 0.5 * math.sqrt(1700)
    assert r.delta5 == pytest.approx(-h, abs=1e-9) and abs(r.delta3) < 1e-9
    assert r.delta4 == pytest.approx(h, abs=1e-9)
    r = solve_delta_cubic(FIG3, HALF_PI)
    assert r.delta3 == pytest.approx(-15.0, abs=1e-9)
    assert r.delta5 == pytest.approx(0.25 * (30 - math.sqrt(4100)), abs=1e-9)
    assert r.delta4 == pytest.approx(0.25 * (30 + math.sqrt(4100)), abs=1e-9)
    assert abs(sum(r)) < 1e-9
    for phi in (0.0, 0.7, 2.0):
        r = solve_delta_cubic(FIG6.with_(phi=phi), math.pi)
        h = 0.5 * math.sqrt(22 ** 2 + 25 ** 2)
        assert np.allclose(r, (-h, 0.0, h), atol=1e-9)


def test_complex_branch_diagnostic():
    with pytest.raises(ComplexBranch):
        sorted_cubic_roots(np.array([1.0]), np.array([10.0]))


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 50), st.floats(0, 50), st.floats(0, 50), st.floats(0, 2 * math.pi),
       st.floats(-math.pi, math.pi))
def test_cubic_residual_and_vieta(o1, o2, o3, phi, kx):
    p = ModelParams(o1, o2, o3, phi=phi)
    s = math.sin(kx)
    pp, qq = cubic_coefficients(p, s)
    r = np.array(solve_delta_cubic(p, kx))
    scale = float(root_residual_scale(pp))
    assert np.max(np.abs(4 * r ** 3 - pp * r - qq)) <= 1e-9 * scale
    big = max(1.0, np.max(np.abs(r)))
    assert abs(r.sum()) <= 1e-9 * big
    assert abs(r[0] * r[1] + r[0] * r[2] + r[1] * r[2] + pp / 4) <= 1e-9 * big ** 2
    assert abs(r.prod() - qq / 4) <= 1e-9 * big ** 3
    assert r[0] <= r[1] + 1e-12 or p.omega2 == p.omega3


def test_branch_parity():
    kx = np.linspace(-3.0, 3.0, 121)
    p = FIG6.with_(phi=0.8)
    a = branch_curves(p, kx)
    b = branch_curves(p, -kx[::-1])
    # sin -> -sin flips q: the sorted triple maps to its negative, reversed
    assert np.allclose(a.delta5, -b.delta4[::-1], atol=1e-12)
    assert np.allclose(a.delta3, -b.delta3[::-1], atol=1e-12)
    assert np.allclose(a.delta1, -b.delta1[::-1], atol=1e-15)


def test_branch_curves_special_cases():
    kx = np.linspace(-math.pi, math.pi, 2001, endpoint=False)
    br = branch_curves(FIG3.with_(phi=HALF_PI), kx)
    assert np.max(np.abs(br.delta3)) < 1e-9
    assert np.array_equal(br.delta1, -br.delta2)
    br = branch_curves(FIG3, kx)
    assert np.max(np.abs(br.delta3 - br.delta1)) < 1e-9
    assert np.max(np.abs(br.delta3 + br.delta4 + br.delta5)) < 1e-9
    assert np.all(br.delta4 >= -1e-9) and np.all(br.delta5 <= 1e-9)


def test_branch_continuity_through_crossing():
    # equal drives at phi = 0: delta3 crosses delta5 where sin kx = O/O1
    kx = np.linspace(-math.pi, math.pi, 20001, endpoint=False)
    br = branch_curves(FIG3, kx)
    for c in (br.delta3, br.delta4, br.delta5):
        assert np.max(np.abs(np.diff(c))) < 0.01


def test_fig6_delta3_crossings():
    kx = np.linspace(-math.pi, math.pi, 4001, endpoint=False)
    br = branch_curves(FIG6, kx)
    hits = level_crossings(kx, br.delta3, 5.0)
    assert hits.size == 2
    # the middle root has the sign of -q, so delta3 = +5 needs sin kx < 0
    assert np.all(np.sin(hits) < 0)
    hits = level_crossings(kx, branch_curves(FIG6.with_(phi=math.pi), kx).delta3, 5.0)
    assert hits.size == 2 and np.all(np.sin(hits) > 0)


def test_branch_curves_validation():
    with pytest.raises(ValueError):
        branch_curves(FIG3, np.array([0.0, 1.0, 0.5]))


def test_backends_agree_on_roots(backend):
    kx = np.linspace(-3, 3, 301)
    a = branch_curves(FIG6.with_(phi=0.3), kx, backend=backend)
    b = branch_curves(FIG6.with_(phi=0.3), kx, backend="numpy")
    for i in (3, 4, 5):
        assert np.max(np.abs(a.branch(i) - b.branch(i))) < 1e-12
