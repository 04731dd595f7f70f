"""Critical points through trigonometric polynomials.

Eccentric anomalies (TE, TEC): for fixed u2 the gradient system is
    lam sin u1 cos u1 + mu cos u1 + nu sin u1 = 0,
    alpha cos u1 + beta sin u1 + gamma = 0.
Eliminating sin u1 gives two quadratics in cos u1; their resultant is
beta^2 times a degree-8 trigonometric polynomial g(u2). Writing g as
sum_j g_j(x) y^j with x = cos u2, y = sin u2 and reducing modulo
x^2 + y^2 = 1 leaves a(x) y + b(x), whose resultant with the circle is
v(x) = a^2 (x^2 - 1) + b^2 of degree 16.

True anomalies (TT, TTS) follow the same route with the analogous
polynomial h(f2), after removing (1 + e2 cos f2)^2 beta^2. The shifted
variant rotates h by s2 before the reduction and f1 by s1 in the final
back-substitution.

Coefficient formulas are written once as functions of (x, y) and work
with floats, numpy arrays and :class:`TrigPoly` tables alike.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .critpoints import CriticalSet, finalize
from .errors import DegenerateSystem
from .orbits import AnomalyPair, MutualGeometry
from .polyalg import (
    TrigPoly,
    UniPoly,
    colleague_roots,
    reduce_on_circle,
    cosine_roots,
    roots_simultaneous,
    shift_trigpoly,
    sylvester_resultant_1cubic,
    to_chebyshev,
)

X = TrigPoly.linear(0.0, 1.0, 0.0)
Y = TrigPoly.linear(0.0, 0.0, 1.0)

ZERO_A_RTOL = 1e-10
SMALL_BETA_RTOL = 1e-10
COMMON_ROOT_RTOL = 1e-12
COSINE_SLACK = 1e-9
NEWTON_SEEDS = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)


class TrigCoeffsEcc(NamedTuple):
    lam: object
    mu: object
    nu: object
    alpha: object
    beta: object
    gamma: object


class TrigCoeffsTrue(NamedTuple):
    alpha: object
    beta: object
    gamma: object
    kappa: object
    lam: object
    mu: object
    nu: object
    alpha_t: object
    beta_t: object
    xi: object
    eta: float


def ecc_coeffs(geom: MutualGeometry, x, y) -> TrigCoeffsEcc:
    """Coefficients of the eccentric-anomaly system at x = cos u2, y = sin u2."""
    a1, a2, e1, e2 = geom.a1, geom.a2, geom.e1, geom.e2
    b1, b2 = geom.b1, geom.b2
    K, L, M, N = geom.K, geom.L, geom.M, geom.N
    lam = a1 * e1 * e1
    mu = a2 * b1 * ((b2 * N) * y + L * x - e2 * L)
    nu = (a2 * e2 * K - a1 * e1) - (a2 * b2 * M) * y - (a2 * K) * x
    alpha = a1 * ((b2 * M) * x - K * y)
    beta = (a1 * b1) * ((b2 * N) * x - L * y)
    gamma = (a2 * e2 * e2) * (x * y) - (a1 * e1 * b2 * M) * x + (a1 * e1 * K - a2 * e2) * y
    return TrigCoeffsEcc(lam, mu, nu, alpha, beta, gamma)


def true_coeffs(geom: MutualGeometry, x, y) -> TrigCoeffsTrue:
    """Coefficients of the true-anomaly system at x = cos f2, y = sin f2."""
    p1, p2, e1, e2 = geom.p1, geom.p2, geom.e1, geom.e2
    K, L, M, N = geom.K, geom.L, geom.M, geom.N
    xi = 1.0 + e2 * x
    alpha_t = p1 * (K * y - M * (x + e2))
    beta_t = p1 * (L * y - N * (x + e2))
    lx = L * x + N * y
    kx = K * x + M * y
    alpha = xi * alpha_t + (p2 * e1 * e2) * y
    beta = xi * beta_t
    gamma = (p2 * e2) * y
    kappa = (-p2 * e1) * lx
    lam = (p2 * e1) * kx
    mu = (-p2 * (1.0 + e1 * e1)) * lx
    nu = (p1 * e1) * xi + p2 * kx
    eta = e1 / (1.0 + e1 * e1)
    return TrigCoeffsTrue(alpha, beta, gamma, kappa, lam, mu, nu, alpha_t, beta_t, xi, eta)


# -- degree-8 eliminants -------------------------------------------------------------

def _g_formula(c: TrigCoeffsEcc):
    lam, mu, nu, al, be, ga = c
    al2, be2, ga2 = al * al, be * be, ga * ga
    return (ga2 * ga2 * (lam * lam) - be2 * be2 * (mu * mu) - al2 * al2 * (nu * nu)
            + (2.0 * lam) * mu * ga * be * (be2 - ga2)
            + 2.0 * mu * nu * al * be * (al2 + be2)
            + (2.0 * lam) * nu * ga * al * (al2 - ga2)
            + (mu * mu + nu * nu - lam * lam) * (ga2 * (al2 + be2) - al2 * be2))


def _h_formula(c: TrigCoeffsTrue, p1: float, e1: float):
    al, be, ga, _, lam, mu, nu, alt, bet, xi, eta = c
    k = 4.0 * eta * eta - 1.0
    bet2 = bet * bet
    alt2 = alt * alt
    amg = al * al - ga * ga
    mu_bet = mu * bet
    return (bet2 * bet2 * (xi * xi) * (mu * mu) * k
            + 2.0 * bet2 * xi * mu_bet * (lam * ga + al * nu - 2.0 * eta * (al * lam + ga * nu))
            + bet2 * amg * (lam * lam - nu * nu + k * (mu * mu))
            - 2.0 * mu_bet * alt2 * (xi * xi) * (alt * (eta * lam - nu) - (3.0 * eta * e1 ** 3 * p1) * ga)
            + (mu * mu) * alt2 * _square((1.0 - 2.0 * eta * e1) * ga - eta * (alt * xi))
            - (2.0 * p1 * e1 * (1.0 - e1 * e1) * eta) * mu_bet * (ga * ga)
            * ((3.0 * e1) * (alt * xi) - (1.0 - e1 * e1) * ga)
            - amg * _square(nu * alt + (p1 * e1 * e1) * ga))


def _square(z):
    return z * z


def g_of_u2(geom: MutualGeometry, u2):
    return _g_formula(ecc_coeffs(geom, np.cos(u2), np.sin(u2)))


def h_of_f2(geom: MutualGeometry, f2):
    return _h_formula(true_coeffs(geom, np.cos(f2), np.sin(f2)), geom.p1, geom.e1)


def sylvester_cos_matrix_ecc(geom: MutualGeometry, u2) -> np.ndarray:
    """4x4 Sylvester matrix of the two quadratics in cos u1 (oracle for the beta^2 factor)."""
    lam, mu, nu, al, be, ga = ecc_coeffs(geom, math.cos(u2), math.sin(u2))
    X_ = be * mu - lam * ga - al * nu
    return np.array([[al * al + be * be, 0, -al * lam, 0],
                     [2 * al * ga, al * al + be * be, X_, -al * lam],
                     [ga * ga - be * be, 2 * al * ga, -ga * nu, X_],
                     [0, ga * ga - be * be, 0, -ga * nu]])


def sylvester_cos_matrix_true(geom: MutualGeometry, f2) -> np.ndarray:
    c = true_coeffs(geom, math.cos(f2), math.sin(f2))
    al, be, ga, ka, lam, mu, nu = c[:7]
    X_ = be * mu - lam * ga - al * nu
    t1 = be * ka - al * lam
    t2 = be * ka - ga * nu
    return np.array([[al * al + be * be, 0, t1, 0],
                     [2 * al * ga, al * al + be * be, X_, t1],
                     [ga * ga - be * be, 2 * al * ga, t2, X_],
                     [0, ga * ga - be * be, 0, t2]])


# -- reduction to a(x) y + b(x) -------------------------------------------------------

class GPoly(NamedTuple):
    """y-coefficients g_j(x), the reduced pair a, b and the resultant v."""

    g: list
    a: UniPoly
    b: UniPoly
    v: UniPoly

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(gj.degree for gj in self.g)


HPoly = GPoly

X2 = UniPoly([0.0, 0.0, 1.0])


def combine_ab(g: list) -> tuple[UniPoly, UniPoly]:
    """a = a0 + x^2 a2 + x^4 a4 and b = b0 + x^2 b2 + x^4 b4 + x^6 b6 from g_0..g_6."""
    g = list(g) + [UniPoly([0.0])] * (7 - len(g))
    a0 = g[1] + g[3] + g[5]
    a2 = -g[3] - 2.0 * g[5]
    a4 = g[5]
    b0 = g[0] + g[2] + g[4] + g[6]
    b2 = -g[2] - 2.0 * g[4] - 3.0 * g[6]
    b4 = g[4] + 3.0 * g[6]
    b6 = -g[6]
    x4 = X2 * X2
    return a0 + X2 * a2 + x4 * a4, b0 + X2 * b2 + x4 * b4 + x4 * X2 * b6


def _reduce(table: TrigPoly) -> GPoly:
    g = table.y_coefficients()
    # rotated tables reach y^8; the closed combination covers y-degree <= 6 only
    a, b = combine_ab(g) if len(g) <= 7 else reduce_on_circle(table)
    return GPoly(g, a, b, sylvester_resultant_1cubic(a, b))


def g_table(geom: MutualGeometry) -> TrigPoly:
    return _g_formula(ecc_coeffs(geom, X, Y))


def h_table(geom: MutualGeometry) -> TrigPoly:
    return _h_formula(true_coeffs(geom, X, Y), geom.p1, geom.e1)


def build_g_poly(geom: MutualGeometry) -> GPoly:
    return _reduce(g_table(geom))


def build_h_poly(geom: MutualGeometry, s2: float = 0.0) -> GPoly:
    table = h_table(geom)
    if s2:
        table = shift_trigpoly(table, s2)
    return _reduce(table)


# -- back-substitution helpers ----------------------------------------------------------

def _second_angles(poly: GPoly, roots: np.ndarray) -> np.ndarray:
    """Angles of (x, y) with x a cosine root of v and y from a(x) y + b(x) = 0."""
    xs = cosine_roots(roots)
    out = []
    a_size = max(np.max(np.abs(poly.a.coeffs)), np.max(np.abs(poly.b.coeffs)))
    for x in xs:
        ax, bx = poly.a(x), poly.b(x)
        if abs(ax) <= ZERO_A_RTOL * a_size:
            if abs(bx) <= ZERO_A_RTOL * a_size:
                # a and b vanish together: both points on the circle are candidates
                yy = math.sqrt(max(0.0, 1.0 - x * x))
                out.extend([math.atan2(yy, x), math.atan2(-yy, x)])
            continue
        out.append(math.atan2(-bx / ax, x))
    return np.array(out)


def common_cos_roots(q1, q2, scale: float) -> list[float]:
    """Candidate common roots of two quadratics given as (A, B, C) coefficient triples.

    The linear elimination gives the common root when it is unique. The real roots of
    the first quadratic are added as well: when two critical points share the second
    anomaly both roots are common, the elimination degenerates, and the second anomaly
    (a near-double root) is only accurate to ~1e-6, too loose to tell shared roots from
    residuals. Newton polishing rejects the candidates that are not critical.
    """
    A1, B1, C1 = q1
    A2, B2, C2 = q2
    out = []
    den = A1 * B2 - A2 * B1
    if abs(den) >= COMMON_ROOT_RTOL * scale:
        c = (C1 * A2 - C2 * A1) / den
        # near-tangent quadratics amplify root errors; outside [-1, 1] the elimination is not usable
        if abs(c) <= 1.0 + COSINE_SLACK:
            out.append(c)
    roots = np.roots([A1, B1, C1]) if A1 != 0.0 or B1 != 0.0 else np.array([])
    roots = roots[np.abs(roots.imag) <= 1e-7 * (1 + np.abs(roots.real))].real
    out.extend(float(r) for r in roots if all(abs(r - c) > 1e-12 for c in out))
    return out


def _first_angles(A, B, C, q2, scale) -> list[float]:
    """Solve {A cos v + B sin v + C = 0, second quadratic in cos v}; empty if no real solution."""
    q1 = (A * A + B * B, 2.0 * A * C, C * C - B * B)
    out = []
    for c in common_cos_roots(q1, q2, scale):
        if not math.isfinite(c) or abs(c) > 1.0 + 1e-6:
            continue
        c = min(1.0, max(-1.0, c))
        out.append(math.atan2(-(A * c + C) / B, c))
    return out


def _coefficient_scale(*vals) -> float:
    return max(abs(v) for v in vals) or 1.0


# -- TE / TEC -------------------------------------------------------------------------

def candidates_te(geom: MutualGeometry, use_chebyshev: bool = False):
    poly = build_g_poly(geom)
    v = poly.v
    if v.degree < 1:
        raise DegenerateSystem("resultant v vanishes identically")
    roots = colleague_roots(to_chebyshev(v)) if use_chebyshev else roots_simultaneous(v)
    u1s, u2s = [], []
    for u2 in _second_angles(poly, roots):
        lam, mu, nu, al, be, ga = ecc_coeffs(geom, math.cos(u2), math.sin(u2))
        size = _coefficient_scale(lam, mu, nu, al, be, ga)
        if abs(be) <= SMALL_BETA_RTOL * size:
            # back-substitution would divide by beta: hand seeds to the 2D Newton solve
            u1s.extend(NEWTON_SEEDS)
            u2s.extend([u2] * len(NEWTON_SEEDS))
            continue
        q2 = (-al * lam, be * mu - lam * ga - al * nu, -ga * nu)
        for u1 in _first_angles(al, be, ga, q2, size ** 4):
            u1s.append(u1)
            u2s.append(u2)
    return np.array(u1s), np.array(u2s)


def critical_set_te(geom: MutualGeometry, use_chebyshev: bool = False, check: bool = True) -> CriticalSet:
    method = "tec" if use_chebyshev else "te"
    return finalize(geom, *candidates_te(geom, use_chebyshev), "eccentric", method, check)


def solve_te(geom: MutualGeometry, use_chebyshev: bool = False) -> list[AnomalyPair]:
    return [p.eccentric for p in critical_set_te(geom, use_chebyshev, check=False).points]


# -- TT / TTS -------------------------------------------------------------------------

def shifted_true_system(c: TrigCoeffsTrue, s1: float):
    """Coefficients A..H of the true-anomaly system in v1 = f1 - s1."""
    al, be, ga, ka, lam, mu, nu = c[:7]
    cs, ss = math.cos(s1), math.sin(s1)
    A = al * cs + be * ss
    B = be * cs - al * ss
    C = ga
    D = ka * cs * cs - ka * ss * ss + 2.0 * lam * ss * cs
    E = lam * cs * cs - lam * ss * ss - 2.0 * ka * ss * cs
    F = mu * cs + nu * ss
    G = nu * cs - mu * ss
    H = ka * ss * ss - lam * ss * cs + ka
    return A, B, C, D, E, F, G, H


def candidates_tt(geom: MutualGeometry, s1: float = 0.0, s2: float = 0.0):
    poly = build_h_poly(geom, s2)
    v = poly.v
    if v.degree < 1:
        raise DegenerateSystem("resultant v vanishes identically")
    roots = roots_simultaneous(v)
    f1s, f2s = [], []
    for v2 in _second_angles(poly, roots):
        f2 = v2 + s2
        c = true_coeffs(geom, math.cos(f2), math.sin(f2))
        A, B, C, D, E, F, G, H = shifted_true_system(c, s1)
        size = _coefficient_scale(A, B, C, D, E, F, G, H)
        if abs(B) <= SMALL_BETA_RTOL * size:
            f1s.extend(NEWTON_SEEDS)
            f2s.extend([f2] * len(NEWTON_SEEDS))
            continue
        q2 = (B * D - A * E, B * F - C * E - A * G, B * H - C * G)
        for v1 in _first_angles(A, B, C, q2, size ** 4):
            f1s.append(v1 + s1)
            f2s.append(f2)
    return np.array(f1s), np.array(f2s)


def critical_set_tt(geom: MutualGeometry, s1: float = 0.0, s2: float = 0.0, check: bool = True) -> CriticalSet:
    method = "tts" if (s1 or s2) else "tt"
    cset = finalize(geom, *candidates_tt(geom, s1, s2), "true", method, check)
    cset.extra.update(s1=s1, s2=s2)
    return cset


def solve_tt(geom: MutualGeometry, s1: float = 0.0, s2: float = 0.0) -> list[AnomalyPair]:
    return [p.true for p in critical_set_tt(geom, s1, s2, check=False).points]
