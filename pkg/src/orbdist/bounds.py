"""Analytic upper bounds on the orbit distance and grid harnesses that test solvers against them.

Two bounds are implemented:

* the optimal bound on d_min when the second orbit is a circle of radius r2,
  as a function of the first orbit's pericenter distance q and argument of
  pericenter omega (maximised over eccentricity and inclination);
* the bound on the maximal nodal distance for two ellipses, maximised over
  the first eccentricity and the second mutual argument of pericenter.

The harnesses sweep a (q, omega) grid, sample the free elements, and report
the empirical maximum next to the bound.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .errors import Coplanar, DomainError
from .orbits import KeplerianElements, orientation_frame

Q_MAX = 1.3
COPLANAR_TOL = 1e-9
HARNESS_SLACK = 1e-9


# -- circular second orbit --------------------------------------------------------

def _cubic(x, q, omega, r2):
    return x ** 3 + 4.0 * q * (q + math.cos(omega)) * x - 8.0 * r2 * q * q * math.sin(omega)


def xi_circular(q: float, omega: float, r2: float) -> float:
    """Unique real root of x^3 + 4q(q + cos w)x - 8 r2 q^2 sin w = 0 (w in [0, pi/2])."""
    c = 8.0 * r2 * q * q * math.sin(omega)
    if c <= 0.0:
        return 0.0
    hi = 2.0 * r2 + 2.0 * q
    xi = brentq(_cubic, 0.0, hi, args=(q, omega, r2), xtol=1e-15, rtol=4 * np.finfo(float).eps)
    # one Newton step removes the last bracket-width error
    lin = 4.0 * q * (q + math.cos(omega))
    slope = 3.0 * xi * xi + lin
    if slope > 0.0:
        step = _cubic(xi, q, omega, r2) / slope
        if abs(step) < 1e-8 * (1.0 + xi):
            xi -= step
    return xi


def delta_circular(q: float, omega: float, r2: float) -> float:
    """Distance between a circle of radius r2 and the orthogonal parabola (e1 = 1, i1 = pi/2)."""
    if q <= 0.0:
        return float(r2)
    xi = xi_circular(q, omega, r2)
    u = xi - r2 * math.sin(omega)
    w = (xi * xi - 4.0 * q * q) / (4.0 * q) + r2 * math.cos(omega)
    return math.hypot(u, w)


def circular_bound(q: float, omega: float, r2: float) -> float:
    """Largest d_min over e1 in [0, 1], i1 in [0, pi/2] for fixed (q, omega)."""
    return max(r2 - q, delta_circular(q, omega, r2))


# -- nodal distance ---------------------------------------------------------------

@dataclass(frozen=True)
class MutualNodalElements:
    omega1: float
    omega2: float
    r_plus: float
    r_minus: float
    r2_plus: float
    r2_minus: float
    d_plus: float
    d_minus: float
    delta_nod: float


def nodal_radii(q, e, omega_m):
    """Radii at the ascending and descending mutual nodes of an orbit."""
    p = q * (1.0 + e)
    c = e * np.cos(omega_m)
    return p / (1.0 + c), p / (1.0 - c)


def nodal_distance(q1, e1, omega1, q2, e2, omega2):
    """Minimal nodal distance from pericenter distances, eccentricities and mutual arguments."""
    rp, rm = nodal_radii(q1, e1, omega1)
    sp, sm = nodal_radii(q2, e2, omega2)
    with np.errstate(invalid="ignore"):
        return np.minimum(np.abs(sp - rp), np.abs(sm - rm))


def mutual_nodal(el1: KeplerianElements, el2: KeplerianElements) -> MutualNodalElements:
    """Mutual arguments of pericenter and nodal distances of two non-coplanar orbits.

    The node direction is n1 x n2 normalised; each argument is measured in
    its own orbit plane, counter-clockwise about that plane's normal.
    """
    P1, Q1 = orientation_frame(el1)
    P2, Q2 = orientation_frame(el2)
    n1, n2 = np.cross(P1, Q1), np.cross(P2, Q2)
    line = np.cross(n1, n2)
    s = float(np.linalg.norm(line))
    if s < COPLANAR_TOL:
        raise Coplanar(f"mutual inclination {math.asin(min(s, 1.0)):.3g} rad is below {COPLANAR_TOL}")
    line /= s
    w1 = math.atan2(float(np.cross(line, P1) @ n1), float(line @ P1))
    w2 = math.atan2(float(np.cross(line, P2) @ n2), float(line @ P2))
    rp, rm = nodal_radii(el1.q, el1.e, w1)
    sp, sm = nodal_radii(el2.q, el2.e, w2)
    dp, dm = sp - rp, sm - rm
    return MutualNodalElements(w1, w2, rp, rm, sp, sm, dp, dm, min(abs(dp), abs(dm)))


def _over(num, den):
    return num / den if den > 0.0 else math.inf


def nodal_bound_terms(q: float, omega: float, q2: float, e2: float) -> tuple[float, float, float]:
    """(u_int, u_ext, u_link) for fixed (q, omega) and second orbit (q2, e2)."""
    if not 0.0 <= e2 < 1.0:
        raise DomainError(f"e2 = {e2} outside [0, 1)")
    p2 = q2 * (1.0 + e2)
    Q2 = p2 / (1.0 - e2)
    c, s = math.cos(omega), math.sin(omega)
    u_int = p2 - q

    xi = 4.0 * q * c / (p2 * s * s + math.sqrt(p2 * p2 * s ** 4 + 16.0 * q * q * c * c)) if q > 0 else 0.0
    xi_hat = min(xi, e2)
    u_ext = min(_over(2.0 * q, 1.0 - c) - p2 / (1.0 - xi_hat), _over(2.0 * q, 1.0 + c) - q2)

    k = q * (1.0 - e2 * e2)
    den = k + math.sqrt(k * k + 4.0 * p2 * c * c * (p2 - k))
    e_star = 2.0 * (p2 - k) / den if den > 0 else 1.0
    e_hat = max(0.0, min(e_star, 1.0))
    u_link = min(Q2 - q * (1.0 + e_hat) / (1.0 + e_hat * c), _over(2.0 * q, 1.0 - c) - q2)
    return u_int, u_ext, u_link


def nodal_bound(q: float, omega: float, q2: float, e2: float) -> float:
    """Largest nodal distance over e1 in [0, 1] and second mutual argument in [0, pi]."""
    return max(nodal_bound_terms(q, omega, q2, e2))


# -- grid harness -----------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Cell-centred n_q x n_omega grid over [0, q_max] x [0, pi/2]."""

    n_q: int = 20
    n_omega: int = 20
    q_max: float = Q_MAX

    def cells(self) -> list[tuple[float, float]]:
        qs = (np.arange(self.n_q) + 0.5) * self.q_max / self.n_q
        ws = (np.arange(self.n_omega) + 0.5) * (math.pi / 2) / self.n_omega
        return [(float(q), float(w)) for q in qs for w in ws]


@dataclass(frozen=True)
class SamplerSpec:
    """n_e x n_angle samples of (e1, angle); e1 runs from 0 to e_max inclusive."""

    n_e: int = 15
    n_angle: int = 15
    e_max: float = 0.999
    angle_max: float = math.pi / 2

    def samples(self) -> list[tuple[float, float]]:
        es = np.linspace(0.0, self.e_max, self.n_e)
        ws = np.linspace(0.0, self.angle_max, self.n_angle)
        return [(float(e), float(w)) for e in es for w in ws]


@dataclass(frozen=True)
class HarnessRow:
    q: float
    omega: float
    bound: float
    empirical_max: float
    margin: float
    dmin_violations: int = 0

    def ok(self, slack: float = HARNESS_SLACK) -> bool:
        return self.empirical_max <= self.bound + slack and self.dmin_violations == 0


def _circular_cell(args) -> HarnessRow:
    (q, omega), samples, r2, method = args
    from .methods import minimum_distance

    circle = KeplerianElements(r2, 0.0, 0.0, 0.0, 0.0)
    best = 0.0
    for e1, i1 in samples:
        el1 = KeplerianElements.from_cometary(q, e1, i1, 0.0, omega)
        best = max(best, minimum_distance(el1, circle, method))
    bound = circular_bound(q, omega, r2)
    return HarnessRow(q, omega, bound, best, bound - best)


def _nodal_cell(args) -> HarnessRow:
    (q, omega), samples, q2, e2, inclination, method = args
    from .methods import minimum_distance

    es = np.array([s[0] for s in samples])
    ws = np.array([s[1] for s in samples])
    dn = nodal_distance(q, es, omega, q2, e2, ws)
    bad = 0
    if inclination is not None:
        el2s = {}
        for e1, w2, d in zip(es, ws, dn):
            if e1 >= 1.0:
                continue  # parabolic: outside the elliptic solvers' domain
            el1 = KeplerianElements.from_cometary(q, e1, 0.0, 0.0, omega)
            el2 = el2s.setdefault(w2, KeplerianElements.from_cometary(q2, e2, inclination, 0.0, w2))
            dmin = minimum_distance(el1, el2, method)
            bad += dmin > d + HARNESS_SLACK * (1.0 + d)
    bound = nodal_bound(q, omega, q2, e2)
    best = float(np.max(dn))
    return HarnessRow(q, omega, bound, best, bound - best, bad)


def _map(fn, tasks, jobs: int):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def bound_harness(kind: Literal["circular", "nodal"], grid: GridSpec | None = None,
                  sampler: SamplerSpec | None = None, *, r2: float = 1.0, q2: float | None = None,
                  e2: float = 0.2, inclination: float | None = 1.0, method: str = "auto",
                  jobs: int = 1) -> list[HarnessRow]:
    """Empirical maxima against the analytic bound on every grid cell.

    ``circular``: max of d_min over (e1, i1) with a circular second orbit of radius r2.
    ``nodal``: max of the nodal distance over (e1, second mutual argument); when
    ``inclination`` is given, every sampled elliptic pair is also built at that
    mutual inclination and its d_min compared with its nodal distance.
    """
    grid = grid or GridSpec()
    if kind == "circular":
        sampler = sampler or SamplerSpec()
        tasks = [(cell, sampler.samples(), r2, method) for cell in grid.cells()]
        return _map(_circular_cell, tasks, jobs)
    if kind == "nodal":
        sampler = sampler or SamplerSpec(11, 11, 1.0, math.pi)
        if q2 is None:
            q2 = 1.0 / (1.0 + e2)  # conic parameter 1
        tasks = [(cell, sampler.samples(), q2, e2, inclination, method) for cell in grid.cells()]
        return _map(_nodal_cell, tasks, jobs)
    raise ValueError(f"unknown harness kind {kind!r}")


def format_rows(rows: list[HarnessRow], sep: str = "\t") -> str:
    lines = [sep.join(("q", "omega", "bound", "empirical_max", "margin"))]
    for r in rows:
        lines.append(sep.join(f"{x:.10g}" for x in (r.q, r.omega, r.bound, r.empirical_max, r.margin)))
    return "\n".join(lines) + "\n"
