"""Critical points through ordinary polynomials in half-angle tangents.

With t = tan(u1/2) and s = tan(u2/2) the gradient system of d^2 becomes
two polynomials p(t, s) (quadratic in s) and q(t, s) (quartic in s).
Their Sylvester resultant in s carries a spurious factor (1 + t^2)^2;
after removing it the t-components are the roots of a degree-16
polynomial, which is interpolated by DFT and solved by Aberth iteration.

The shifted variant replaces u1 by v1 = u1 - s1 before the substitution
and recovers u2 from a line-circle intersection with u2 = v2 + s2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .critpoints import CriticalSet, finalize
from .errors import DegenerateSystem
from .orbits import AnomalyPair, MutualGeometry, wrap_angle
from .polyalg import UniPoly, deflate_one_plus_t2, dft_interpolate, real_roots, roots_simultaneous

DEGREE = 16
INFINITE_ROOT = 1e7
# a real root whose s-companion also leaves the second equation this small is kept as well
SECOND_CANDIDATE_RTOL = 1e-6
CLUSTER_GAP = 1e-3
LINE_CIRCLE_SLACK = 1e-9


@dataclass(frozen=True)
class OePolySystem:
    """p = alpha s^2 + beta s + gamma,  q = A s^4 + B s^3 + D s - A.

    ``s1`` is the shift of the first anomaly (0 for the unshifted system).
    """

    alpha: UniPoly
    beta: UniPoly
    gamma: UniPoly
    A: UniPoly
    B: UniPoly
    D: UniPoly
    s1: float = 0.0

    def p(self, t, s):
        return (self.alpha(t) * s + self.beta(t)) * s + self.gamma(t)

    def q(self, t, s):
        a = self.A(t)
        return ((a * s + self.B(t)) * s * s + self.D(t)) * s - a


ShiftedOeSystem = OePolySystem


@dataclass(frozen=True)
class SigmaBlock:
    """Entries of the reduced 6x6 resultant matrix; the ``*_red`` members are divided by 1 + t^2."""

    s1: UniPoly
    s2: UniPoly
    s3: UniPoly
    s4: UniPoly
    s5: UniPoly
    s6: UniPoly
    s1_red: UniPoly
    s2_red: UniPoly
    s3_red: UniPoly


def build_oe_system(geom: MutualGeometry) -> OePolySystem:
    A = np.concatenate([[0.0], geom.A])  # 1-based view
    d13 = A[1] - A[3]
    d46 = A[4] - A[6]
    alpha = [A[11] - A[8], 4 * d13 + 2 * A[10] - 2 * A[12], 0.0, -4 * d13 + 2 * A[10] - 2 * A[12], A[8] - A[11]]
    beta = [2 * A[7], -4 * A[9], 0.0, -4 * A[9], -2 * A[7]]
    gamma = [A[11] + A[8], 4 * d13 - 2 * A[10] - 2 * A[12], 0.0, -4 * d13 - 2 * A[10] - 2 * A[12], -(A[8] + A[11])]
    Aq = [-(A[9] + A[13]), -2 * A[7], A[9] - A[13]]
    Bq = [-4 * d46 - 2 * A[10] - 2 * A[14], -4 * A[8], -4 * d46 + 2 * A[10] - 2 * A[14]]
    Dq = [4 * d46 - 2 * A[10] - 2 * A[14], -4 * A[8], 4 * d46 + 2 * A[10] - 2 * A[14]]
    return OePolySystem(*(UniPoly(c, trim=False) for c in (alpha, beta, gamma, Aq, Bq, Dq)))


def build_oes_system(geom: MutualGeometry, s1: float) -> OePolySystem:
    """The system in z = tan(v1/2) with v1 = u1 - s1."""
    A = np.concatenate([[0.0], geom.A])
    d13 = A[1] - A[3]
    d46 = A[4] - A[6]
    c, s = math.cos(s1), math.sin(s1)
    alpha = [
        2 * d13 * c * s + A[10] * s + A[11] * c - A[12] * s - A[8] * c,
        8 * d13 * c * c + 2 * A[10] * c - 2 * A[11] * s - 2 * A[12] * c + 2 * A[8] * s - 4 * d13,
        -12 * d13 * s * c,
        -8 * d13 * c * c + 2 * A[10] * c - 2 * A[11] * s - 2 * A[12] * c + 2 * A[8] * s + 4 * d13,
        2 * d13 * c * s - A[10] * s - A[11] * c + A[12] * s + A[8] * c,
    ]
    beta = [2 * A[7] * c - 2 * A[9] * s, -4 * A[7] * s - 4 * A[9] * c, 0.0,
            -4 * A[7] * s - 4 * A[9] * c, -2 * A[7] * c + 2 * A[9] * s]
    gamma = [
        2 * d13 * c * s - A[10] * s + A[11] * c - A[12] * s + A[8] * c,
        8 * d13 * c * c - 2 * A[10] * c - 2 * A[11] * s - 2 * A[12] * c - 2 * A[8] * s - 4 * d13,
        -12 * d13 * s * c,
        -8 * d13 * c * c - 2 * A[10] * c - 2 * A[11] * s - 2 * A[12] * c - 2 * A[8] * s + 4 * d13,
        2 * d13 * c * s + A[10] * s - A[11] * c + A[12] * s - A[8] * c,
    ]
    Aq = [-A[7] * s - A[9] * c - A[13], -2 * A[7] * c + 2 * A[9] * s, A[7] * s + A[9] * c - A[13]]
    Bq = [-2 * A[10] * c - 2 * A[8] * s - 2 * A[14] - 4 * d46, 4 * A[10] * s - 4 * A[8] * c,
          2 * A[10] * c + 2 * A[8] * s - 2 * A[14] - 4 * d46]
    Dq = [-2 * A[10] * c - 2 * A[8] * s - 2 * A[14] + 4 * d46, 4 * A[10] * s - 4 * A[8] * c,
          2 * A[10] * c + 2 * A[8] * s - 2 * A[14] + 4 * d46]
    return OePolySystem(*(UniPoly(cf, trim=False) for cf in (alpha, beta, gamma, Aq, Bq, Dq)), s1=float(s1))


def sigma_block(sys: OePolySystem) -> SigmaBlock:
    s1 = sys.alpha - sys.gamma
    s3 = sys.B - sys.D
    return SigmaBlock(s1, sys.beta, s3, sys.gamma, sys.D, sys.A,
                      deflate_one_plus_t2(s1), deflate_one_plus_t2(sys.beta), deflate_one_plus_t2(s3))


def sylvester_matrix(sys: OePolySystem, t) -> np.ndarray:
    """Sylvester matrix of p and q in s, stacked over the points ``t``."""
    t = np.atleast_1d(t)
    a, b, c = sys.alpha(t), sys.beta(t), sys.gamma(t)
    A, B, D = sys.A(t), sys.B(t), sys.D(t)
    z = np.zeros_like(a)
    rows = [[a, z, z, z, A, z], [b, a, z, z, B, A], [c, b, a, z, z, B],
            [z, c, b, a, D, z], [z, z, c, b, -A, D], [z, z, z, c, z, -A]]
    return np.moveaxis(np.array(rows), -1, 0)


def reduced_matrix(sb: SigmaBlock, t) -> np.ndarray:
    t = np.atleast_1d(t)
    s1, s2, s3, s4, s5, s6 = (p(t) for p in (sb.s1, sb.s2, sb.s3, sb.s4, sb.s5, sb.s6))
    r1, r2, r3 = sb.s1_red(t), sb.s2_red(t), sb.s3_red(t)
    z = np.zeros_like(s1)
    rows = [[r1, -r2, -r1, r2, z, -r3], [r2, r1, -r2, -r1, r3, z], [s4, s2, s1, -s2, s6, s3],
            [z, s4, s2, s1, s5, s6], [z, z, s4, s2, -s6, s5], [z, z, z, s4, z, -s6]]
    return np.moveaxis(np.array(rows), -1, 0)


def det_S_hat(sys: OePolySystem) -> UniPoly:
    """Degree-16 polynomial whose roots are the t (or z) components of the solutions."""
    sb = sigma_block(sys)
    return dft_interpolate(lambda nodes: np.linalg.det(reduced_matrix(sb, nodes)), DEGREE)


det_T_hat = det_S_hat


def _first_anomalies(poly: UniPoly) -> np.ndarray:
    """Angles 2*atan(t) of the real roots, plus pi when a root sits at infinity."""
    if poly.degree < 1:
        raise DegenerateSystem("resultant vanishes identically")
    roots = roots_simultaneous(poly)
    t = real_roots(roots)
    out = list(2.0 * np.arctan(t[np.abs(t) <= INFINITE_ROOT]))
    lead = abs(poly.coeffs[-1])
    if poly.degree < DEGREE or lead <= 1e-8 * poly.norm() or np.any(np.abs(t) > INFINITE_ROOT):
        out.append(math.pi)
    return np.array(out)


def _eq2(geom: MutualGeometry, u1, u2):
    """Second gradient equation in eccentric anomalies (proportional to d(d^2)/du2)."""
    A = geom.A
    s1, c1, s2, c2 = np.sin(u1), np.cos(u1), np.sin(u2), np.cos(u2)
    return (2 * (A[3] - A[5]) * s2 * c2 + A[6] * s1 * c2 - A[7] * s1 * s2
            + A[8] * c1 * c2 - A[9] * c1 * s2 + A[12] * c2 - A[13] * s2)


def _pick(geom, u1, cands, keep_both=False):
    """Best-residual second anomaly for each u1, plus the runner-up if it also solves.

    ``keep_both`` passes every candidate on: a clustered u1 root may stand for
    two critical points with the same first anomaly.
    """
    if keep_both:
        return list(cands)
    res = np.abs(_eq2(geom, u1, cands))
    order = np.argsort(res)
    keep = [cands[order[0]]]
    if len(cands) > 1 and res[order[1]] <= SECOND_CANDIDATE_RTOL * geom.scale:
        keep.append(cands[order[1]])
    return keep


def _second_from_quadratic(geom, sys: OePolySystem, u1: float, keep_both: bool = False) -> list[float]:
    """Roots in s of p(t, s) with t = tan(u1/2); s = inf (u2 = pi) allowed."""
    if abs(u1 - math.pi) < 1e-12:
        # t is infinite: the leading t-coefficients govern p
        a, b, c = sys.alpha.coeffs[-1], sys.beta.coeffs[-1], sys.gamma.coeffs[-1]
    else:
        t = math.tan(0.5 * u1)
        a, b, c = sys.alpha(t), sys.beta(t), sys.gamma(t)
    size = max(abs(a), abs(b), abs(c))
    if size == 0.0:
        raise DegenerateSystem("first equation vanishes identically in s")
    cands = []
    if abs(a) <= 1e-14 * size:
        cands.append(math.pi)
        if b != 0.0:
            cands.append(2.0 * math.atan(-c / b))
    else:
        disc = b * b - 4 * a * c
        if disc < -LINE_CIRCLE_SLACK * (b * b + abs(4 * a * c)):
            return []
        r = math.sqrt(max(disc, 0.0))
        q = -0.5 * (b + math.copysign(r, b))
        roots = [q / a] + ([c / q] if q != 0.0 else [0.0])
        cands.extend(2.0 * math.atan(s) for s in roots)
    return _pick(geom, u1, np.array(cands), keep_both)


def _second_from_line_circle(geom, u1: float, s2: float, keep_both: bool = False) -> list[float]:
    A = np.concatenate([[0.0], geom.A])
    c1, sn1 = math.cos(u1), math.sin(u1)
    k1 = A[8] * c1 - A[10] * sn1
    k2 = A[7] * c1 - A[9] * sn1
    cs, ss = math.cos(s2), math.sin(s2)
    a = k1 * cs + k2 * ss
    b = -k1 * ss + k2 * cs
    c = 2 * (A[1] - A[3]) * sn1 * c1 + A[11] * c1 - A[12] * sn1
    rho = math.hypot(a, b)
    if rho <= 1e-14 * geom.scale:
        if abs(c) <= 1e-14 * geom.scale:
            raise DegenerateSystem("line-circle system vanishes identically")
        return []
    ratio = -c / rho
    if abs(ratio) > 1.0 + LINE_CIRCLE_SLACK:
        return []  # the line misses the circle
    phi = math.atan2(b, a)
    delta = math.acos(min(1.0, max(-1.0, ratio)))
    cands = np.array([phi + delta, phi - delta]) + s2
    return _pick(geom, u1, cands, keep_both)


def _clustered(u: np.ndarray, gap: float = CLUSTER_GAP) -> np.ndarray:
    """Flags for angles lying within ``gap`` of another angle of the list."""
    if u.size < 2:
        return np.zeros(u.size, dtype=bool)
    diff = np.abs(wrap_angle(u[:, None] - u[None, :] + math.pi) - math.pi)
    np.fill_diagonal(diff, np.inf)
    return np.min(diff, axis=1) < gap


def candidates_oe(geom: MutualGeometry) -> tuple[np.ndarray, np.ndarray]:
    sys = build_oe_system(geom)
    u1s, u2s = [], []
    roots = _first_anomalies(det_S_hat(sys))
    for u1, near in zip(roots, _clustered(roots)):
        for u2 in _second_from_quadratic(geom, sys, u1, near):
            u1s.append(u1)
            u2s.append(u2)
    return np.array(u1s), np.array(u2s)


def candidates_oes(geom: MutualGeometry, s1: float, s2: float) -> tuple[np.ndarray, np.ndarray]:
    sys = build_oes_system(geom, s1)
    u1s, u2s = [], []
    roots = _first_anomalies(det_T_hat(sys))
    for v1, near in zip(roots, _clustered(roots)):
        u1 = v1 + s1
        for u2 in _second_from_line_circle(geom, u1, s2, near):
            u1s.append(u1)
            u2s.append(u2)
    return np.array(u1s), np.array(u2s)


def critical_set_oe(geom: MutualGeometry, check: bool = True) -> CriticalSet:
    return finalize(geom, *candidates_oe(geom), "eccentric", "oe", check)


def critical_set_oes(geom: MutualGeometry, s1: float, s2: float, check: bool = True) -> CriticalSet:
    cset = finalize(geom, *candidates_oes(geom, s1, s2), "eccentric", "oes", check)
    cset.extra.update(s1=s1, s2=s2)
    return cset


def _pairs(cset: CriticalSet) -> list[AnomalyPair]:
    return [p.eccentric for p in cset.points]


def solve_oe(geom: MutualGeometry) -> list[AnomalyPair]:
    return _pairs(critical_set_oe(geom, check=False))


def solve_oes(geom: MutualGeometry, s1: float, s2: float) -> list[AnomalyPair]:
    return _pairs(critical_set_oes(geom, s1, s2, check=False))
