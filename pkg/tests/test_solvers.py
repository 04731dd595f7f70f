import math

import numpy as np
import pytest
from scipy.optimize import minimize

from orbdist.critpoints import grid_local_minima, moid
from orbdist.methods import METHODS, compute
from orbdist.orbits import AnomalyPair, KeplerianElements, d2_grad_hess, mutual_geometry, to_true
from orbdist.polyalg import UniPoly
from orbdist.reference import TEN_POINT_TABLE, compare_to_table, ten_point_pair
from orbdist.solver_ordinary import (
    _second_from_line_circle,
    build_oe_system,
    build_oes_system,
    critical_set_oe,
    critical_set_oes,
    det_S_hat,
    solve_oe,
    solve_oes,
)
from orbdist.solver_trig import (
    GPoly,
    _second_angles,
    build_g_poly,
    build_h_poly,
    critical_set_te,
    critical_set_tt,
    ecc_coeffs,
    g_of_u2,
    h_of_f2,
    solve_te,
    solve_tt,
    sylvester_cos_matrix_ecc,
    sylvester_cos_matrix_true,
    true_coeffs,
)

from util import eccentric_pairs, match_one_to_one, random_geometry


@pytest.fixture(scope="module")
def ten_point():
    return mutual_geometry(*ten_point_pair())


def _table_pairs():
    return [AnomalyPair(math.radians(r.u1_deg), math.radians(r.u2_deg)) for r in TEN_POINT_TABLE]


# -- ordinary polynomials -----------------------------------------------------------

def test_oe_coefficients_unit_circles():
    el = KeplerianElements(1.0, 0.0, 0.3, 0.2, 0.1)
    g = mutual_geometry(el, el)
    A = np.concatenate([[0.0], g.A])
    sys = build_oe_system(g)
    assert np.allclose(sys.alpha.coeffs, [-A[8], 2 * A[10], 0.0, 2 * A[10], A[8]], atol=1e-15)


def test_oe_degrees_ten_point(ten_point):
    sys = build_oe_system(ten_point)
    assert UniPoly(sys.alpha.coeffs).degree == 4
    assert UniPoly(sys.A.coeffs).degree == 2


def _descend_to_minimum(geom, rng):
    _, _, mins = grid_local_minima(geom, 90)
    u0 = mins[rng.integers(len(mins))]

    def f(u):
        d2, g1, g2 = d2_grad_hess(geom, u[0], u[1])[:3]
        return d2, np.array([g1, g2])

    res = minimize(f, u0, jac=True, method="BFGS", options=dict(gtol=1e-13))
    return res.x


def test_oe_system_vanishes_at_descended_minimum():
    rng = np.random.default_rng(8)
    for _ in range(10):
        g = random_geometry(rng)
        u1, u2 = _descend_to_minimum(g, rng)
        sys = build_oe_system(g)
        t, s = math.tan(u1 / 2), math.tan(u2 / 2)
        size = g.scale * (1 + t * t) ** 2 * (1 + s * s) ** 2
        assert abs(sys.p(t, s)) <= 1e-6 * size
        assert abs(sys.q(t, s)) <= 1e-6 * size


def test_det_has_ten_real_roots(ten_point):
    p = det_S_hat(build_oe_system(ten_point))
    roots = np.roots(p.coeffs[::-1])
    assert p.degree <= 16
    assert np.sum(np.abs(roots.imag) <= 1e-7 * (1 + np.abs(roots))) >= 10


def test_concentric_circles_flagged_degenerate():
    g = mutual_geometry(KeplerianElements(1.0, 0.0, 0, 0, 0), KeplerianElements(2.0, 0.0, 0, 0, 0.5))
    for m in METHODS:
        cset = compute(g, m)
        assert cset.degenerate
        assert moid(cset)[0] == pytest.approx(1.0, abs=1e-12)


def test_solve_oe_ten_point(ten_point):
    assert match_one_to_one(solve_oe(ten_point), _table_pairs(), math.radians(1e-4))


def test_aligned_ellipses_include_apsides():
    g = mutual_geometry(KeplerianElements(1.0, 0.2, 0, 0, 0.4), KeplerianElements(2.0, 0.1, 0, 0, 0.4))
    pts = solve_oe(g)
    for target in (AnomalyPair(0.0, 0.0), AnomalyPair(math.pi, math.pi)):
        assert any(max(abs(math.remainder(p.v1 - target.v1, 2 * math.pi)),
                       abs(math.remainder(p.v2 - target.v2, 2 * math.pi))) < 1e-9 for p in pts)


def test_oe_points_are_critical():
    rng = np.random.default_rng(9)
    for _ in range(20):
        g = random_geometry(rng)
        for p in critical_set_oe(g).points:
            _, g1, g2 = d2_grad_hess(g, p.eccentric.v1, p.eccentric.v2)[:3]
            assert math.hypot(g1, g2) <= 1e-8


def test_oes_zero_shift_matches_oe():
    g = random_geometry(np.random.default_rng(10))
    a, b = build_oe_system(g), build_oes_system(g, 0.0)
    for name in ("alpha", "beta", "gamma", "A", "B", "D"):
        assert np.array_equal(getattr(a, name).coeffs, getattr(b, name).coeffs)


def test_oes_quarter_shift_matches_oe(ten_point):
    assert match_one_to_one(solve_oes(ten_point, math.pi / 4, 0.0), solve_oe(ten_point), 1e-6)


def test_oes_ten_point(ten_point):
    assert match_one_to_one(solve_oes(ten_point, 0.7, 0.7), _table_pairs(), math.radians(1e-4))


def test_line_circle_empty_exactly_when_no_solution():
    g = random_geometry(np.random.default_rng(11))
    u2 = np.linspace(0, 2 * math.pi, 4001)
    empty = solvable = 0
    for u1 in np.linspace(0, 2 * math.pi, 97):
        g1 = d2_grad_hess(g, u1, u2)[1]
        has_root = g1.min() < 0 < g1.max()
        out = _second_from_line_circle(g, u1, 0.3)
        if not has_root and g1.min() * g1.max() > 0:
            assert out == []
            empty += 1
        if has_root:
            assert out
            solvable += 1
    assert empty and solvable


def test_oes_random_shifts_match_oe():
    rng = np.random.default_rng(12)
    for _ in range(20):
        g = random_geometry(rng)
        a = critical_set_oe(g)
        b = critical_set_oes(g, *rng.uniform(0, 2 * math.pi, 2))
        if a.checks.passed and b.checks.passed:
            assert match_one_to_one(eccentric_pairs(a), eccentric_pairs(b), 1e-6)


# -- trigonometric polynomials ------------------------------------------------------

def test_g_equals_sylvester_determinant_over_beta2():
    rng = np.random.default_rng(13)
    for _ in range(10):
        g = random_geometry(rng)
        for u2 in rng.uniform(0, 2 * math.pi, 5):
            be = ecc_coeffs(g, math.cos(u2), math.sin(u2)).beta
            det = np.linalg.det(sylvester_cos_matrix_ecc(g, u2))
            assert be * be * g_of_u2(g, u2) == pytest.approx(det, rel=1e-9)


def test_g_vanishes_for_concentric_circles():
    g = mutual_geometry(KeplerianElements(1.0, 0.0, 0, 0, 0), KeplerianElements(2.0, 0.0, 0, 0, 0.5))
    assert np.allclose(g_of_u2(g, np.linspace(0, 6, 13)), 0.0, atol=1e-14)


def test_g_degree_pattern():
    rng = np.random.default_rng(14)
    for _ in range(10):
        poly = build_g_poly(random_geometry(rng))
        assert poly.degrees[:7] == (6, 6, 6, 5, 4, 3, 2)
        assert all(gj.is_zero for gj in poly.g[7:])
        assert poly.a.degree <= 7 and poly.b.degree <= 8 and poly.v.degree <= 16


def test_h_degree_pattern():
    rng = np.random.default_rng(15)
    for _ in range(10):
        poly = build_h_poly(random_geometry(rng))
        assert poly.degrees[:7] == (8, 7, 6, 5, 4, 3, 2)
        assert all(hj.is_zero for hj in poly.g[7:])


def test_g_total_degree_eight():
    from orbdist.solver_trig import g_table

    assert g_table(random_geometry(np.random.default_rng(16))).total_degree() == 8


def test_te_ten_point(ten_point):
    for cheb in (False, True):
        assert match_one_to_one(solve_te(ten_point, cheb), _table_pairs(), math.radians(1e-4))


def test_zero_a_root_discarded():
    poly = GPoly([], UniPoly([-0.5, 1.0]), UniPoly([1.0]), UniPoly([1.0]))
    assert _second_angles(poly, np.array([0.5 + 0j])).size == 0
    # a and b vanishing together hand both circle points on
    poly = GPoly([], UniPoly([-0.5, 1.0]), UniPoly([-0.5, 1.0]), UniPoly([1.0]))
    assert _second_angles(poly, np.array([0.5 + 0j])).size == 2


def test_common_cos_roots():
    from orbdist.solver_trig import common_cos_roots

    # (c - 0.2)(c + 0.5) and (c - 0.2)(c - 0.7): unique common root first, then both roots of the first
    out = common_cos_roots((1.0, 0.3, -0.1), (1.0, -0.9, 0.14), 1.0)
    assert out[0] == pytest.approx(0.2) and sorted(out[1:]) == pytest.approx([-0.5])
    # identical quadratics: elimination degenerates, both shared roots are kept
    out = common_cos_roots((1.0, 0.3, -0.1), (2.0, 0.6, -0.2), 1.0)
    assert sorted(out) == pytest.approx([-0.5, 0.2])


def test_points_sharing_second_anomaly_kept():
    # two critical points share cos f2; keeping only the eliminated root lost one of them
    g = _nth_geometry(777, 42)
    a, b = compute(g, "tt"), compute(g, "oes")
    assert a.checks.passed and len(a) == 6
    assert match_one_to_one(eccentric_pairs(a), eccentric_pairs(b), 1e-6)


def _nth_geometry(seed, n):
    rng = np.random.default_rng(seed)
    for _ in range(n + 1):
        g = random_geometry(rng)
    return g


def test_h_vanishes_at_tabulated_points(ten_point):
    f2_grid = np.linspace(0, 2 * math.pi, 721)
    size = np.abs(h_of_f2(ten_point, f2_grid)).max()
    for p in _table_pairs():
        f2 = to_true(ten_point, p).v2
        assert abs(h_of_f2(ten_point, f2)) <= 1e-5 * size


@pytest.mark.parametrize("e1", [0.0, 0.4])
def test_h_determinant_identity(e1):
    g = mutual_geometry(KeplerianElements(1.3, e1, 0.4, 0.2, 0.1), KeplerianElements(0.9, 0.3, 1.0, 2.0, 0.5))
    for f2 in np.linspace(0.1, 6.0, 7):
        c = true_coeffs(g, math.cos(f2), math.sin(f2))
        det = np.linalg.det(sylvester_cos_matrix_true(g, f2))
        xi = 1 + g.e2 * math.cos(f2)
        assert c.beta ** 2 * xi ** 2 * h_of_f2(g, f2) == pytest.approx(det, rel=1e-9, abs=1e-14)


def test_tt_ten_point(ten_point):
    from orbdist.orbits import to_eccentric

    pts = [to_eccentric(ten_point, p) for p in solve_tt(ten_point)]
    assert match_one_to_one(pts, _table_pairs(), math.radians(1e-4))


def test_back_substituted_angles_on_circle():
    g = random_geometry(np.random.default_rng(17))
    for cset in (critical_set_te(g), critical_set_tt(g), critical_set_tt(g, 0.9, 0.9)):
        for p in cset.points:
            assert p.grad_residual <= 1e-8 * g.scale


@pytest.mark.parametrize("method", METHODS)
def test_every_method_ten_point(ten_point, method):
    ok, ang, dist, kinds = compare_to_table(compute(ten_point, method))
    assert ok and kinds and ang <= 1e-4 and dist <= 1e-6
