"""Critical points of d^2 for two coplanar conics.

Apart from trajectory crossings, a critical point needs the two tangent
vectors parallel and both orthogonal to the chord.  With the first orbit's
pericenter on the x axis this gives, for each f1,

    alpha cos f2 + beta sin f2 + alpha e2 = 0,     mu cos f2 + delta = 0,

and eliminating f2 leaves one trigonometric polynomial of degree 5 in
(cos f1, sin f1).  It is reduced on the unit circle to a(x) y + b(x) and
the resultant a^2 (x^2 - 1) + b^2 (degree <= 10) is solved for x = cos f1.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .critpoints import CriticalSet, brute_force_set, dedup_indices, finalize, polish_many, run_checks
from .errors import DegenerateSystem, DomainError
from .orbits import AnomalyPair, KeplerianElements, MutualGeometry, from_products, mutual_geometry
from .polyalg import TrigPoly, colleague_roots, cosine_roots, reduce_on_circle, shift_trigpoly, sylvester_resultant_1cubic, to_chebyshev

CIRCULAR_E = 1e-12
ZERO_RTOL = 1e-12
ALIGN_TOL = 1e-12
PLANAR_SHIFTS = (0.9, 2.1, 4.3)


@dataclass(frozen=True)
class PlanarPair:
    """Two coplanar conics; orbit 1 has its pericenter on the x axis.

    ``omega2`` is the angle from the first pericenter to the second one.
    ``retrograde`` marks a second orbit run clockwise in the first orbit's
    frame; it is solved as prograde with f2 mirrored afterwards.
    """

    p1: float
    e1: float
    p2: float
    e2: float
    omega2: float
    retrograde: bool = False

    def __post_init__(self):
        if self.p1 <= 0 or self.p2 <= 0:
            raise DomainError("conic parameters must be positive")
        if not (0.0 <= self.e1 < 1.0 and 0.0 <= self.e2 < 1.0):
            raise DomainError("planar pairs need elliptic orbits")

    @classmethod
    def from_geometry(cls, geom: MutualGeometry) -> "PlanarPair":
        if not geom.coplanar:
            raise DomainError("orbits are not coplanar")
        retro = geom.K * geom.N - geom.L * geom.M < 0.0
        return cls(geom.p1, geom.e1, geom.p2, geom.e2, math.atan2(geom.L, geom.K), retro)

    @classmethod
    def from_elements(cls, el1: KeplerianElements, el2: KeplerianElements) -> "PlanarPair":
        return cls.from_geometry(mutual_geometry(el1, el2))

    def geometry(self) -> MutualGeometry:
        c, s = math.cos(self.omega2), math.sin(self.omega2)
        sense = -1.0 if self.retrograde else 1.0
        a1 = self.p1 / (1.0 - self.e1 ** 2)
        a2 = self.p2 / (1.0 - self.e2 ** 2)
        return from_products(a1, self.e1, a2, self.e2, c, s, -s * sense, c * sense)

    def swapped(self) -> "PlanarPair":
        return PlanarPair(self.p2, self.e2, self.p1, self.e1, -self.omega2)


class PlanarCoeffs(NamedTuple):
    alpha: np.ndarray
    beta: np.ndarray
    mu: np.ndarray
    delta: np.ndarray


def _coeff_polys(pair: PlanarPair, x, y):
    """alpha, beta, mu, delta as expressions in x = cos f1, y = sin f1."""
    sw, cw = math.sin(pair.omega2), math.cos(pair.omega2)
    e1, e2, p1, p2 = pair.e1, pair.e2, pair.p1, pair.p2
    alpha = sw * x - cw * y + e1 * sw
    beta = cw * x + sw * y + e1 * cw
    mu = p1 * e1 * e2 * y
    delta = p1 * e1 * y + p2 * e2 * (1.0 + e1 * x) * (sw * x - cw * y + e1 * sw)
    return alpha, beta, mu, delta


def planar_coeffs(pair: PlanarPair, f1) -> PlanarCoeffs:
    f1 = np.asarray(f1, dtype=float)
    return PlanarCoeffs(*(np.asarray(c, dtype=float) for c in _coeff_polys(pair, np.cos(f1), np.sin(f1))))


def tangency_trigpoly(pair: PlanarPair) -> TrigPoly:
    """Degree-5 polynomial in (cos f1, sin f1) vanishing at every tangency point."""
    X = TrigPoly.linear(cx=1.0)
    Y = TrigPoly.linear(cy=1.0)
    alpha, beta, mu, delta = _coeff_polys(pair, X, Y)
    norm2 = TrigPoly.linear(1.0 + pair.e1 ** 2, 2.0 * pair.e1)  # alpha^2 + beta^2 on the circle
    a2 = alpha * alpha
    return norm2 * delta * delta - 2.0 * pair.e2 * a2 * delta * mu + mu * mu * (pair.e2 ** 2 * a2 - beta * beta)


def _f2_candidates(pair: PlanarPair, f1: float) -> list[float]:
    """f2 from cos f2 = -delta/mu and the parallel-tangent equation, plus both of
    that equation's own solutions (-delta/mu is ill-conditioned near sin f1 = 0)."""
    al, be, mu, de = (float(v) for v in planar_coeffs(pair, f1))
    size = max(abs(al), abs(be), 1.0)
    out = []
    if abs(mu) > 1e-9 * (pair.p1 + pair.p2):
        c2 = -de / mu
        if abs(c2) <= 1.0 + 1e-6 and abs(be) > ZERO_RTOL * size:
            c2 = min(1.0, max(-1.0, c2))
            out.append(math.atan2(-al / be * (c2 + pair.e2), c2))
    # alpha cos f2 + beta sin f2 = -alpha e2
    rho = math.hypot(al, be)
    if rho > ZERO_RTOL * size:
        r = -al * pair.e2 / rho
        if abs(r) <= 1.0:
            base, t = math.atan2(be, al), math.acos(r)
            out.extend([base + t, base - t])
    return out


def _tangency_candidates(pair: PlanarPair, shift: float = 0.0):
    """Raw (f1, f2) tangency candidates of a prograde pair, in the pair's own frame.

    With ``shift`` the polynomial is solved in v = f1 - shift, which moves the
    fold of x = cos v away from tangency points clustered near f1 = 0 or pi.
    """
    if pair.e1 <= CIRCULAR_E and pair.e2 <= CIRCULAR_E:
        raise DegenerateSystem("two concentric circles: every point pair along a ray is critical")
    if pair.e1 <= CIRCULAR_E:
        g1, g2 = _tangency_candidates(pair.swapped(), shift)
        return g2, g1
    if pair.e2 <= CIRCULAR_E:
        # r1 . tau1 = 0 forces f1 in {0, pi}; the circle point lies on the same ray or the opposite one
        f1 = np.array([0.0, 0.0, math.pi, math.pi])
        f2 = f1 + np.array([0.0, math.pi, 0.0, math.pi]) - pair.omega2
        return f1, f2
    F = tangency_trigpoly(pair)
    if shift:
        F = shift_trigpoly(F, shift)
    a, b = reduce_on_circle(F)
    v = sylvester_resultant_1cubic(a, b)
    if v.degree < 1:
        raise DegenerateSystem("tangency resultant vanishes identically")
    xs = cosine_roots(colleague_roots(to_chebyshev(v)))
    size = max(np.max(np.abs(a.coeffs)), np.max(np.abs(b.coeffs)))
    f1s = []
    for x in xs:
        ax, bx = a(x), b(x)
        if abs(ax) <= 1e-10 * size:
            y = math.sqrt(max(0.0, 1.0 - x * x))
            f1s.extend([math.atan2(y, x) + shift, math.atan2(-y, x) + shift])
        else:
            f1s.append(math.atan2(-bx / ax, x) + shift)
    out1, out2 = [], []
    for f1 in f1s:
        for f2 in _f2_candidates(pair, f1):
            out1.append(f1)
            out2.append(f2)
    return np.array(out1), np.array(out2)


def _to_geometry_frame(pair: PlanarPair, f2):
    return -np.asarray(f2) if pair.retrograde else np.asarray(f2)


def _prograde(pair: PlanarPair) -> PlanarPair:
    return PlanarPair(pair.p1, pair.e1, pair.p2, pair.e2, pair.omega2) if pair.retrograde else pair


def planar_tangency_points(pair: PlanarPair, shift: float = 0.0) -> list[AnomalyPair]:
    """Critical points with parallel tangents (true anomalies), polished and deduplicated."""
    f1, f2 = _tangency_candidates(_prograde(pair), shift)
    if f1.size == 0:
        return []
    geom = pair.geometry()
    w1, w2, res, ok = polish_many(geom, f1, _to_geometry_frame(pair, f2), "true")
    w1, w2, res = w1[ok], w2[ok], res[ok]
    idx = dedup_indices(w1, w2, res)
    return [AnomalyPair(w1[i], w2[i], "true") for i in idx]


def planar_intersections(pair: PlanarPair) -> list[AnomalyPair]:
    """Crossing points of the two conics (0, 1 or 2), as true-anomaly pairs.

    Raises :class:`DegenerateSystem` for identical conics.
    """
    pg = _prograde(pair)
    p1, e1, p2, e2, w = pg.p1, pg.e1, pg.p2, pg.e2, pg.omega2
    A = p2 * e1 - p1 * e2 * math.cos(w)
    B = -p1 * e2 * math.sin(w)
    C = p1 - p2
    rho = math.hypot(A, B)
    tol = ALIGN_TOL * (p1 + p2)
    if rho <= tol:
        if abs(C) <= tol:
            raise DegenerateSystem("identical conics intersect everywhere")
        return []
    r = C / rho
    if abs(r) > 1.0 + 1e-12:
        return []
    base = math.atan2(B, A)
    t = math.acos(min(1.0, max(-1.0, r)))
    thetas = [base] if t == 0.0 else [base + t, base - t]
    out = []
    for th in thetas:
        f2 = float(_to_geometry_frame(pair, th - w))
        out.append(AnomalyPair(th, f2, "true"))
    return out


def planar_critical_set(pair: PlanarPair | MutualGeometry, check: bool = True,
                        shifts: tuple[float, ...] = PLANAR_SHIFTS) -> CriticalSet:
    """All critical points of a coplanar pair: tangencies plus crossings, classified.

    The unshifted elimination is tried first; while the checks fail, the
    tangency polynomial is solved again in the shifted anomalies of ``shifts``.
    """
    if isinstance(pair, MutualGeometry):
        pair = PlanarPair.from_geometry(pair)
    geom = pair.geometry()
    try:
        cross = planar_intersections(pair)
        best = None
        # each attempt merges two elimination frames: roots folded together near
        # cos f1 = +-1 in one frame are well separated in the other
        frames = list(zip((0.0,) + tuple(shifts), tuple(shifts) + (None,)))
        for attempt, (s, s_extra) in enumerate(frames if check else frames[:1]):
            tang = planar_tangency_points(pair, s)
            if s_extra is not None:
                tang = tang + planar_tangency_points(pair, s_extra)
            pts = tang + cross
            cset = finalize(geom, [p.v1 for p in pts], [p.v2 for p in pts], "true", "planar", check)
            cset.extra.update(n_tangency=len(cset.points) - len(cross), n_crossings=len(cross), attempts=attempt + 1)
            if not check or cset.checks.passed:
                return cset
            if best is None or len(cset.checks.failures()) < len(best.checks.failures()):
                best = cset
        return best
    except DegenerateSystem:
        cset = brute_force_set(geom, "planar")
        return cset.with_checks(run_checks(geom, cset)) if check else cset


# -- census ---------------------------------------------------------------------------

@dataclass
class CensusResult:
    counts: Counter
    circular_counts: Counter
    failures: int

    @property
    def max_count(self) -> int:
        return max(self.counts, default=0)

    @property
    def max_circular_count(self) -> int:
        return max(self.circular_counts, default=0)

    def table(self, sep: str = "\t") -> str:
        lines = [sep.join(("population", "n_points", "pairs"))]
        for name, cnt in (("ellipse-ellipse", self.counts), ("circle-ellipse", self.circular_counts)):
            for k in sorted(cnt):
                lines.append(sep.join((name, str(k), str(cnt[k]))))
        return "\n".join(lines) + "\n"


def random_planar_pair(rng: np.random.Generator, e_max: float = 0.95, circular: bool = False) -> PlanarPair:
    p1, p2 = rng.uniform(0.3, 3.0, 2)
    e1 = rng.uniform(0.0, e_max)
    e2 = 0.0 if circular else rng.uniform(0.0, e_max)
    return PlanarPair(p1, e1, p2, e2, rng.uniform(-math.pi, math.pi))


def census(n: int, seed: int = 0, n_circular: int | None = None) -> CensusResult:
    """Critical-point counts over random coplanar ellipse pairs and circle-ellipse pairs."""
    rng = np.random.default_rng(seed)
    counts, circ = Counter(), Counter()
    failures = 0
    for _ in range(n):
        cs = planar_critical_set(random_planar_pair(rng))
        counts[len(cs)] += 1
        failures += not cs.checks.passed
    for _ in range(n if n_circular is None else n_circular):
        cs = planar_critical_set(random_planar_pair(rng, circular=True))
        circ[len(cs)] += 1
        failures += not cs.checks.passed
    return CensusResult(counts, circ, failures)
