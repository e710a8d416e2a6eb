"""Quermassintegrals and sharp-inequality deficits against sphere closed forms."""

import math

import numpy as np
import pytest

from curvelab import (
    NonpositiveDensity,
    ScalarField,
    SphericalGrid,
    ball_quermass,
    ball_quermass_inverse,
    calibrate_sharp_constant,
    michael_simon_deficit_H,
    michael_simon_deficit_k,
    monotone_quantities,
    quermassintegrals,
    radial_geometry,
    support_geometry,
)
from curvelab.errors import ConeViolation
from curvelab.shapes import (
    random_starshaped,
    sphere_radial,
    sphere_support,
    spheroid_radial,
)
from curvelab.sphere_grid import sphere_area


# -- quermassintegrals ---------------------------------------------------------


def test_ball_closed_forms_unit_sphere():
    grid = SphericalGrid.full_s2(48, 96)
    quermass = quermassintegrals(radial_geometry(sphere_radial(grid, 1.0)))
    for j in range(3 + 1):
        assert quermass[j] == pytest.approx(4 * math.pi, rel=1e-10)


def test_ball_closed_forms_radius_two():
    grid = SphericalGrid.full_s2(48, 96)
    quermass = quermassintegrals(radial_geometry(sphere_radial(grid, 2.0)))
    # (V_0, V_1, V_2) = (32pi, 16pi, 8pi), V_3 = 4pi
    assert quermass[0] == pytest.approx(32 * math.pi, rel=1e-10)
    assert quermass[1] == pytest.approx(16 * math.pi, rel=1e-10)
    assert quermass[2] == pytest.approx(8 * math.pi, rel=1e-10)
    assert quermass[3] == pytest.approx(4 * math.pi, rel=1e-10)


def test_ball_quermass_helpers():
    for n in (2, 3, 5):
        for j in range(n + 1):
            v = ball_quermass(j, 1.7, n)
            assert v == pytest.approx(sphere_area(n) * 1.7 ** (n + 1 - j))
            assert ball_quermass_inverse(j, v, n) == pytest.approx(1.7)


def test_quermass_support_parametrization_matches():
    grid = SphericalGrid.axisym(3, 96)
    qr = quermassintegrals(radial_geometry(sphere_radial(grid, 1.4)))
    qs = quermassintegrals(support_geometry(sphere_support(grid, 1.4)))
    assert np.allclose(qr.values, qs.values, rtol=1e-10)


def test_quermass_nested_balls_monotone():
    grid = SphericalGrid.axisym(2, 48)
    q1 = quermassintegrals(radial_geometry(sphere_radial(grid, 1.0)))
    q2 = quermassintegrals(radial_geometry(sphere_radial(grid, 1.5)))
    assert np.all(q2.values[:-1] > q1.values[:-1])
    # the top entry is the Gauss-curvature integral, scale invariant
    assert q2[3] == pytest.approx(q1[3], rel=1e-12)


def test_quermass_spheroid_between_inscribed_and_circumscribed():
    grid = SphericalGrid.axisym(2, 96)
    quermass = quermassintegrals(radial_geometry(spheroid_radial(grid, 1.2, 1.0)))
    lo = quermassintegrals(radial_geometry(sphere_radial(grid, 1.0)))
    hi = quermassintegrals(radial_geometry(sphere_radial(grid, 1.2)))
    for j in range(3):
        assert lo[j] < quermass[j] < hi[j]


# -- mean-curvature deficit ------------------------------------------------------


def test_deficit_H_equality_sphere_f_matched():
    # radius R with f = R^-(n-1): lhs = rhs = n |S^n|
    for radius in (1.0, 1.7):
        grid = SphericalGrid.full_s2(48, 96)
        geom = radial_geometry(sphere_radial(grid, radius))
        rep = michael_simon_deficit_H(geom, radius ** (-1.0))
        assert rep.lhs == pytest.approx(2 * 4 * math.pi, rel=1e-10)
        assert abs(rep.rel_deficit) < 1e-10


def test_deficit_H_equality_sphere_constant_f():
    grid = SphericalGrid.full_s2(48, 96)
    geom = radial_geometry(sphere_radial(grid, 1.0))
    rep = michael_simon_deficit_H(geom, 1.0)
    assert rep.lhs == pytest.approx(8 * math.pi, rel=1e-10)
    assert rep.rhs == pytest.approx(8 * math.pi, rel=1e-10)


def test_deficit_H_spheroid_positive():
    grid = SphericalGrid.full_s2(48, 96)
    geom = radial_geometry(spheroid_radial(grid, 1.2, 1.0))
    rep = michael_simon_deficit_H(geom, 1.0)
    assert rep.deficit > 0
    assert rep.rel_deficit > 1e-4


def test_deficit_H_with_gradient_term():
    # f = r^(-1) exp((r-1)^2/2) via chain rule on a random starshaped body
    from curvelab.flows import SpeedProfile

    grid = SphericalGrid.full_s2(48, 96)
    field = random_starshaped(grid, np.random.default_rng(2), amp=0.2)
    geom = radial_geometry(field)
    prof = SpeedProfile.power_exp_pinned(2, 1.0)
    f = prof.f(field.values)
    grad_f = tuple(prof.df(field.values) * g for g in geom.grad)
    rep = michael_simon_deficit_H(geom, f, grad_f)
    assert rep.deficit > -1e-3 * rep.rhs


def test_deficit_H_rejects_nonpositive_density():
    grid = SphericalGrid.axisym(2, 32)
    geom = radial_geometry(sphere_radial(grid, 1.0))
    with pytest.raises(NonpositiveDensity):
        michael_simon_deficit_H(geom, 0.0)


def test_deficit_H_scaling_covariance():
    grid = SphericalGrid.full_s2(32, 64)
    rels = []
    for a in (1.0, 2.0, 0.5):
        geom = radial_geometry(sphere_radial(grid, a))
        rels.append(michael_simon_deficit_H(geom, 1.0).rel_deficit)
    assert abs(rels[0] - rels[1]) < 1e-6
    assert abs(rels[0] - rels[2]) < 1e-6


# -- k-th mean curvature deficit ---------------------------------------------------


def test_calibration_constants():
    assert calibrate_sharp_constant(2, 1) == pytest.approx(1.0, rel=1e-12)
    for n in (3, 4, 5, 6):
        assert calibrate_sharp_constant(n, 1) == pytest.approx(1.0, rel=1e-12)
    # closed form C(n,k) / (n C(n,k-1)) emerges from the sphere evaluation
    for n in (3, 4, 5, 6):
        for k in range(1, n):
            expected = math.comb(n, k) / (n * math.comb(n, k - 1))
            assert calibrate_sharp_constant(n, k) == pytest.approx(expected, rel=1e-12)


def test_deficit_k_unit_sphere_idempotent():
    # |deficit| < 1e-10 on the unit sphere with f = 1, all n <= 6
    for n in range(3, 7):
        grid = SphericalGrid.axisym(n, 48)
        geom = radial_geometry(sphere_radial(grid, 1.0))
        for k in range(1, n):
            rep = michael_simon_deficit_k(geom, 1.0, k=k)
            assert abs(rep.rel_deficit) < 1e-10, (n, k)


def test_deficit_k_matched_family_all_radii():
    # f = R^-(n-k) keeps the deficit at zero for every radius
    n, k = 3, 2
    for radius in (0.5, 1.0, 2.0):
        grid = SphericalGrid.axisym(n, 48)
        geom = radial_geometry(sphere_radial(grid, radius))
        rep = michael_simon_deficit_k(geom, radius ** (-(n - k)), k=k)
        assert abs(rep.rel_deficit) < 1e-10


def test_deficit_k_paper_literal_mode_differs():
    n, k = 3, 2
    grid = SphericalGrid.axisym(n, 48)
    geom = radial_geometry(sphere_radial(grid, 1.0))
    lit = michael_simon_deficit_k(geom, 1.0, k=k, calibration="paper-literal")
    cal = michael_simon_deficit_k(geom, 1.0, k=k)
    assert lit.mode == "paper-literal"
    # the printed binomial prefactor overshoots the sphere equality case
    assert lit.deficit < 0
    assert abs(cal.deficit) < 1e-10 * cal.rhs


def test_deficit_k_positive_off_sphere():
    grid = SphericalGrid.axisym(3, 96)
    geom = radial_geometry(spheroid_radial(grid, 1.15, 1.0))
    quermass = quermassintegrals(geom)
    radius = ball_quermass_inverse(1, quermass[1], 3)
    rep = michael_simon_deficit_k(geom, radius ** (-1.0), k=2)
    assert rep.deficit > 0


def test_deficit_k_cone_violation():
    grid = SphericalGrid.axisym(3, 64)
    # deep starshaped dimple: some node leaves Gamma_2^+
    field = ScalarField(grid, 1.0 + 0.42 * np.cos(2 * grid.theta))
    geom = radial_geometry(field)
    with pytest.raises(ConeViolation):
        michael_simon_deficit_k(geom, 1.0, k=2)


def test_deficit_k_requires_f_of_R_for_varying_density():
    grid = SphericalGrid.axisym(3, 48)
    geom = radial_geometry(sphere_radial(grid, 1.0))
    f = 1.0 + 0.1 * np.cos(grid.theta) ** 2
    with pytest.raises(ValueError):
        michael_simon_deficit_k(geom, f, k=2)
    rep = michael_simon_deficit_k(geom, f, k=2, f_of_R=1.05)
    assert np.isfinite(rep.deficit)


# -- monotone quantities -------------------------------------------------------------


def test_monotone_quantities_sphere_values():
    grid = SphericalGrid.full_s2(48, 96)
    geom = radial_geometry(sphere_radial(grid, 1.5))
    # Q with f = R^-(n-1) equals |S^2| = 4 pi
    q, _ = monotone_quantities(geom, 1.5 ** (-1.0), 1)
    assert q == pytest.approx(4 * math.pi, rel=1e-10)
    # Q with f = 1 equals the area
    q, _ = monotone_quantities(geom, 1.0, 1)
    assert q == pytest.approx(4 * math.pi * 1.5**2, rel=1e-10)


def test_monotone_quantities_mk_s3():
    # unit S^3, k = 2, f = 1: M_2 = sigma_1 |S^3| = 3 * 2 pi^2
    grid = SphericalGrid.axisym(3, 64)
    geom = radial_geometry(sphere_radial(grid, 1.0))
    _, mk = monotone_quantities(geom, 1.0, 2)
    assert mk == pytest.approx(6 * math.pi**2, rel=1e-10)


def test_monotone_quantities_k_equals_n():
    grid = SphericalGrid.full_s2(32, 64)
    geom = radial_geometry(sphere_radial(grid, 1.0))
    _, mk = monotone_quantities(geom, 1.0, 2)  # k = n = 2: constant-f regime
    assert mk == pytest.approx(2 * 4 * math.pi, rel=1e-10)
    with pytest.raises(ValueError):
        monotone_quantities(geom, 1.0 + 0.1 * np.cos(grid.theta)[:, None] ** 2, 2)
