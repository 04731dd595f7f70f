import math

import numpy as np
import pytest

from orbdist.errors import DegenerateSystem, DomainError
from orbdist.methods import compute
from orbdist.orbits import AnomalyPair, KeplerianElements, mutual_geometry, to_eccentric
from orbdist.planar import (
    PlanarPair,
    census,
    planar_critical_set,
    planar_intersections,
    planar_tangency_points,
    random_planar_pair,
)
from orbdist.reference import TEN_POINT_TABLE, compare_to_table, ten_point_pair

from util import eccentric_pairs, match_one_to_one, torus_gap


@pytest.fixture(scope="module")
def ten_point():
    return PlanarPair.from_elements(*ten_point_pair())


def _has(points, f1, f2, tol=1e-9):
    return any(torus_gap(p, AnomalyPair(f1, f2, "true")) < tol for p in points)


def test_pair_validation():
    with pytest.raises(DomainError):
        PlanarPair(1.0, 1.0, 1.0, 0.1, 0.0)
    with pytest.raises(DomainError):
        PlanarPair.from_geometry(mutual_geometry(KeplerianElements(1, 0.1, 0.3, 0, 0), KeplerianElements(1, 0.1, 0, 0, 0)))


def test_geometry_round_trip(ten_point):
    back = PlanarPair.from_geometry(ten_point.geometry())
    assert back.omega2 == pytest.approx(ten_point.omega2) and back.p1 == pytest.approx(ten_point.p1)


def test_circle_gives_apsidal_tangencies():
    pair = PlanarPair(0.8, 0.3, 1.7, 0.0, 0.4)
    tang = planar_tangency_points(pair)
    assert len(tang) == 4
    for p in tang:
        assert min(abs(math.remainder(p.v1, math.pi)), abs(math.remainder(p.v1 - math.pi, math.pi))) < 1e-9


def test_ten_point_split(ten_point):
    assert len(planar_tangency_points(ten_point)) == 8
    cross = planar_intersections(ten_point)
    g = ten_point.geometry()
    table = [AnomalyPair(math.radians(r.u1_deg), math.radians(r.u2_deg)) for r in TEN_POINT_TABLE if r.d == 0.0]
    assert match_one_to_one([to_eccentric(g, p) for p in cross], table, math.radians(1e-4))


def test_aligned_ellipses_include_apsides():
    pts = planar_tangency_points(PlanarPair(1.0, 0.2, 2.5, 0.1, 0.0))
    assert _has(pts, 0.0, 0.0) and _has(pts, math.pi, math.pi)


def test_intersections_special_cases():
    assert planar_intersections(PlanarPair(1.0, 0.0, 2.0, 0.0, 0.3)) == []
    with pytest.raises(DegenerateSystem):
        planar_intersections(PlanarPair(1.0, 0.3, 1.0, 0.3, 0.0))


def test_identical_conics_degenerate():
    cset = planar_critical_set(PlanarPair(1.0, 0.3, 1.0, 0.3, 0.0))
    assert cset.degenerate and min(p.d for p in cset.minima) == pytest.approx(0.0, abs=1e-9)


def test_ten_point_set(ten_point):
    cset = planar_critical_set(ten_point)
    ok, ang, dist, kinds = compare_to_table(cset)
    assert ok and kinds and ang <= 1e-4 and dist <= 1e-6
    assert (cset.count("minimum"), cset.count("maximum"), cset.count("saddle")) == (3, 2, 5)


def test_circle_non_crossing_four_points():
    cset = planar_critical_set(PlanarPair(0.5, 0.3, 3.0, 0.0, 1.0))
    assert len(cset) == 4 and cset.extra["n_crossings"] == 0 and cset.checks.passed


def test_retrograde_matches_general_solver():
    el1 = KeplerianElements(1.2, 0.4, 0.0, 0.0, 0.3)
    el2 = KeplerianElements(1.0, 0.3, math.pi, 0.0, 1.1)
    g = mutual_geometry(el1, el2)
    assert g.coplanar and PlanarPair.from_geometry(g).retrograde
    a, b = planar_critical_set(g), compute(g, "tts")
    assert a.checks.passed and match_one_to_one(eccentric_pairs(a), eccentric_pairs(b), 1e-6)


def test_matches_general_solver_on_random_pairs():
    rng = np.random.default_rng(0)
    for _ in range(30):
        pair = random_planar_pair(rng)
        a = planar_critical_set(pair)
        b = compute(pair.geometry(), "tts")
        assert a.checks.passed
        if b.checks.passed:
            assert match_one_to_one(eccentric_pairs(a), eccentric_pairs(b), 1e-6)


def test_small_census():
    res = census(200, seed=3)
    assert res.failures == 0
    assert res.max_count <= 12 and res.max_circular_count <= 6
    assert sum(res.counts.values()) == 200
    assert res.table().splitlines()[0] == "population\tn_points\tpairs"
