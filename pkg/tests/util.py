"""Shared helpers for the test suite."""

from __future__ import annotations

import math

import numpy as np

from orbdist.orbits import KeplerianElements, mutual_geometry

TWO_PI = 2.0 * math.pi


def random_elements(rng: np.random.Generator, e_max: float = 0.95, a_range=(0.5, 5.0), name: str = ""):
    return KeplerianElements(rng.uniform(*a_range), rng.uniform(0.0, e_max), rng.uniform(0.0, math.pi),
                             rng.uniform(0.0, TWO_PI), rng.uniform(0.0, TWO_PI), name)


def random_geometry(rng: np.random.Generator, e_max: float = 0.95):
    return mutual_geometry(random_elements(rng, e_max), random_elements(rng, e_max))


def angle_gap(a, b):
    g = np.abs(np.asarray(a) - np.asarray(b)) % TWO_PI
    return np.minimum(g, TWO_PI - g)


def torus_gap(p, q) -> float:
    """Largest per-angle separation between two anomaly pairs."""
    return float(max(angle_gap(p.v1, q.v1), angle_gap(p.v2, q.v2)))


def match_one_to_one(pairs_a, pairs_b, tol: float) -> bool:
    """True when both lists have equal length and greedy nearest matching stays within ``tol``."""
    pairs_a, pairs_b = list(pairs_a), list(pairs_b)
    if len(pairs_a) != len(pairs_b):
        return False
    free = list(range(len(pairs_b)))
    for p in pairs_a:
        if not free:
            return False
        gaps = [torus_gap(p, pairs_b[k]) for k in free]
        j = int(np.argmin(gaps))
        if gaps[j] > tol:
            return False
        free.pop(j)
    return True


def eccentric_pairs(cset):
    return [p.eccentric for p in cset.points]
