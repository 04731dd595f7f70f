"""Shared post-processing of candidate critical points.

Every solver hands its raw anomaly candidates to :func:`finalize`, which
polishes them with Newton's method on the gradient of d^2, drops the ones
that do not converge, merges duplicates, classifies the survivors by the
Hessian and runs the three consistency checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit
from scipy.optimize import minimize

from .errors import NoMinimum
from .orbits import (
    TWO_PI,
    AnomalyPair,
    MutualGeometry,
    Parametrization,
    d2_grad_hess,
    d2_values,
    ecc_to_true,
    to_eccentric,
    true_to_ecc,
    wrap_angle,
)

POLISH_RTOL = 1e-12
POLISH_MAX_ITER = 25
POLISH_MAX_TRAVEL = 0.3
ACCEPT_RTOL = 1e-8
DEDUP_TOL = 1e-7
DEGENERATE_RTOL = 1e-12
CHECK_GRID = 10

MINIMUM, MAXIMUM, SADDLE, DEGENERATE = "minimum", "maximum", "saddle", "degenerate"


# -- Newton polishing ----------------------------------------------------------

@njit(cache=True)
def _conic(a, e, v, true_anomaly):
    c = math.cos(v)
    s = math.sin(v)
    if not true_anomaly:
        b = math.sqrt(1.0 - e * e)
        return a * (c - e), a * b * s, -a * s, a * b * c, -a * c, -a * b * s
    p = a * (1.0 - e * e)
    w = 1.0 + e * c
    r = p / w
    dr = p * e * s / (w * w)
    ddr = p * e * (c * w + 2.0 * e * s * s) / (w * w * w)
    return (r * c, r * s, dr * c - r * s, dr * s + r * c,
            ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s)


@njit(cache=True)
def _grad_hess(g, v1, v2, true_anomaly):
    a1, a2, e1, e2, K, L, M, N = g[0], g[1], g[2], g[3], g[4], g[5], g[6], g[7]
    x1, y1, dx1, dy1, ddx1, ddy1 = _conic(a1, e1, v1, true_anomaly)
    x2, y2, dx2, dy2, ddx2, ddy2 = _conic(a2, e2, v2, true_anomaly)
    g1 = 2.0 * (x1 * dx1 + y1 * dy1 - (dx1 * (K * x2 + M * y2) + dy1 * (L * x2 + N * y2)))
    g2 = 2.0 * (x2 * dx2 + y2 * dy2 - (x1 * (K * dx2 + M * dy2) + y1 * (L * dx2 + N * dy2)))
    h11 = 2.0 * (dx1 * dx1 + dy1 * dy1 + x1 * ddx1 + y1 * ddy1
                 - (ddx1 * (K * x2 + M * y2) + ddy1 * (L * x2 + N * y2)))
    h22 = 2.0 * (dx2 * dx2 + dy2 * dy2 + x2 * ddx2 + y2 * ddy2
                 - (x1 * (K * ddx2 + M * ddy2) + y1 * (L * ddx2 + N * ddy2)))
    h12 = -2.0 * (dx1 * (K * dx2 + M * dy2) + dy1 * (L * dx2 + N * dy2))
    return g1, g2, h11, h12, h22


@njit(cache=True)
def _polish_kernel(g, v1, v2, true_anomaly, tol, max_iter, max_travel):
    n = v1.shape[0]
    out1 = v1.copy()
    out2 = v2.copy()
    resid = np.empty(n)
    ok = np.zeros(n, dtype=np.bool_)
    for k in range(n):
        a, b = v1[k], v2[k]
        g1, g2, h11, h12, h22 = _grad_hess(g, a, b, true_anomaly)
        r = math.hypot(g1, g2)
        best_a, best_b, best_r = a, b, r
        for _ in range(max_iter):
            if r <= tol:
                break
            det = h11 * h22 - h12 * h12
            if det == 0.0:
                break
            da = -(h22 * g1 - h12 * g2) / det
            db = -(h11 * g2 - h12 * g1) / det
            step = math.hypot(da, db)
            if step > max_travel:
                da *= max_travel / step
                db *= max_travel / step
            a += da
            b += db
            g1, g2, h11, h12, h22 = _grad_hess(g, a, b, true_anomaly)
            r = math.hypot(g1, g2)
            if r < best_r:
                best_a, best_b, best_r = a, b, r
        travel = math.hypot(best_a - v1[k], best_b - v2[k])
        if travel <= max_travel:
            out1[k] = best_a
            out2[k] = best_b
            resid[k] = best_r
            ok[k] = True
        else:
            resid[k] = math.hypot(*_grad_hess(g, v1[k], v2[k], true_anomaly)[:2])
    return out1, out2, resid, ok


def _geom_vector(geom: MutualGeometry) -> np.ndarray:
    return np.array([geom.a1, geom.a2, geom.e1, geom.e2, geom.K, geom.L, geom.M, geom.N])


class PolishResult(NamedTuple):
    pair: AnomalyPair
    grad_residual: float
    converged: bool


def polish_many(geom: MutualGeometry, v1, v2, parametrization: Parametrization = "eccentric"):
    """Vectorized Newton refinement. Returns ``(v1, v2, residual, converged)``."""
    v1 = np.ascontiguousarray(v1, dtype=float)
    v2 = np.ascontiguousarray(v2, dtype=float)
    tol = POLISH_RTOL * geom.scale
    w1, w2, res, ok = _polish_kernel(_geom_vector(geom), v1, v2, parametrization == "true",
                                     tol, POLISH_MAX_ITER, POLISH_MAX_TRAVEL)
    ok &= res <= ACCEPT_RTOL * geom.scale
    return wrap_angle(w1), wrap_angle(w2), res, ok


def polish(geom: MutualGeometry, pair: AnomalyPair) -> PolishResult:
    """Newton-refine one pair; a diverging start comes back unchanged with ``converged=False``."""
    w1, w2, res, ok = polish_many(geom, [pair.v1], [pair.v2], pair.parametrization)
    if not ok[0]:
        return PolishResult(pair, float(res[0]), False)
    return PolishResult(AnomalyPair(w1[0], w2[0], pair.parametrization), float(res[0]), True)


# -- classification --------------------------------------------------------------

def classify_hessian(h11, h12, h22, scale: float):
    """Kinds for arrays of Hessian entries."""
    det = h11 * h22 - h12 * h12
    tr = h11 + h22
    kind = np.where(det < 0, SADDLE, np.where(tr > 0, MINIMUM, MAXIMUM)).astype(object)
    kind[np.abs(det) <= DEGENERATE_RTOL * scale * scale] = DEGENERATE
    return kind


def classify(geom: MutualGeometry, pair: AnomalyPair) -> str:
    _, _, _, h11, h12, h22 = d2_grad_hess(geom, pair.v1, pair.v2, pair.parametrization)
    return str(classify_hessian(np.atleast_1d(h11), np.atleast_1d(h12), np.atleast_1d(h22), geom.scale)[0])


# -- result containers -----------------------------------------------------------

@dataclass(frozen=True)
class CriticalPoint:
    eccentric: AnomalyPair
    true: AnomalyPair
    d: float
    kind: str
    grad_residual: float

    @property
    def pair(self) -> AnomalyPair:
        return self.eccentric


@dataclass(frozen=True)
class CheckReport:
    weierstrass: bool
    morse: bool | None  # None: not applicable because a degenerate point was found
    dmin_sampling: bool
    n_points: int
    n_maxima: int
    n_minima: int
    grid_floor: float

    @property
    def passed(self) -> bool:
        return self.weierstrass and self.morse is not False and self.dmin_sampling

    def failures(self) -> list[str]:
        out = []
        if not self.weierstrass:
            out.append("W")
        if self.morse is False:
            out.append("M")
        if not self.dmin_sampling:
            out.append("dmin")
        return out


@dataclass(frozen=True)
class CriticalSet:
    points: tuple[CriticalPoint, ...]
    method: str
    checks: CheckReport | None = None
    degenerate: bool = False  # continuum of critical points (identical orbits, concentric circles)
    error: str | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.points)

    def count(self, kind: str) -> int:
        return sum(p.kind == kind for p in self.points)

    @property
    def minima(self) -> list[CriticalPoint]:
        return [p for p in self.points if p.kind == MINIMUM]

    def with_checks(self, checks: CheckReport) -> "CriticalSet":
        return CriticalSet(self.points, self.method, checks, self.degenerate, self.error, self.extra)


def _torus_gap(a1, a2, b1, b2):
    d1 = np.abs(wrap_angle(a1 - b1))
    d2 = np.abs(wrap_angle(a2 - b2))
    d1 = np.minimum(d1, TWO_PI - d1)
    d2 = np.minimum(d2, TWO_PI - d2)
    return np.hypot(d1, d2)


def dedup_indices(u1: np.ndarray, u2: np.ndarray, residual: np.ndarray, tol: float = DEDUP_TOL) -> list[int]:
    """Indices of representatives after merging points closer than ``tol``; lowest residual wins."""
    keep: list[int] = []
    for i in np.argsort(residual, kind="stable"):
        if keep and np.min(_torus_gap(u1[keep], u2[keep], u1[i], u2[i])) <= tol:
            continue
        keep.append(int(i))
    return sorted(keep, key=lambda k: (u1[k], u2[k]))


def finalize(geom: MutualGeometry, v1, v2, parametrization: Parametrization, method: str,
             check: bool = True, k: int = CHECK_GRID) -> CriticalSet:
    """Polish, filter, deduplicate and classify raw candidates, then run the checks."""
    v1 = np.atleast_1d(np.asarray(v1, dtype=float))
    v2 = np.atleast_1d(np.asarray(v2, dtype=float))
    points: tuple[CriticalPoint, ...] = ()
    if v1.size:
        w1, w2, res, ok = polish_many(geom, v1, v2, parametrization)
        w1, w2, res = w1[ok], w2[ok], res[ok]
        if parametrization == "true":
            u1, u2 = true_to_ecc(w1, geom.e1), true_to_ecc(w2, geom.e2)
            f1, f2 = w1, w2
        else:
            u1, u2 = w1, w2
            f1, f2 = ecc_to_true(w1, geom.e1), ecc_to_true(w2, geom.e2)
        idx = dedup_indices(np.atleast_1d(u1), np.atleast_1d(u2), res)
        u1, u2, f1, f2, res = (np.atleast_1d(x)[idx] for x in (u1, u2, f1, f2, res))
        d2, _, _, h11, h12, h22 = d2_grad_hess(geom, u1, u2, "eccentric")
        kinds = classify_hessian(h11, h12, h22, geom.scale)
        dist = np.sqrt(np.maximum(d2, 0.0))
        points = tuple(
            CriticalPoint(AnomalyPair(u1[i], u2[i], "eccentric"), AnomalyPair(f1[i], f2[i], "true"),
                          float(dist[i]), str(kinds[i]), float(res[i]))
            for i in range(len(idx))
        )
    cset = CriticalSet(points, method)
    return cset.with_checks(run_checks(geom, cset, k)) if check else cset


# -- checks and MOID --------------------------------------------------------------

def grid_distance(geom: MutualGeometry, k: int) -> np.ndarray:
    """d on a k x k uniform grid of eccentric anomalies."""
    u = TWO_PI * np.arange(k) / k
    return np.sqrt(np.maximum(d2_values(geom, u[:, None], u[None, :]), 0.0))


def run_checks(geom: MutualGeometry, cset: CriticalSet, k: int = CHECK_GRID) -> CheckReport:
    n_max = cset.count(MAXIMUM)
    n_min = cset.count(MINIMUM)
    n = len(cset.points)
    w_ok = n_max >= 1 and n_min >= 1
    if cset.degenerate or any(p.kind == DEGENERATE for p in cset.points):
        m_ok = None
    else:
        m_ok = n == 2 * (n_max + n_min)
    floor = float(np.min(grid_distance(geom, k)))
    dmin = min((p.d for p in cset.minima), default=math.inf)
    slack = 1e-12 * (geom.a1 + geom.a2)
    return CheckReport(w_ok, m_ok, floor >= dmin - slack, n, n_max, n_min, floor)


def moid(cset: CriticalSet) -> tuple[float, AnomalyPair]:
    """Least distance over the minima of a set that passed the Weierstrass check."""
    if cset.checks is not None and not cset.checks.weierstrass or not cset.minima:
        raise NoMinimum(f"{cset.method}: no minimum available")
    best = min(cset.minima, key=lambda p: p.d)
    return best.d, best.eccentric


# -- brute force -----------------------------------------------------------------

def grid_local_minima(geom: MutualGeometry, n: int = 720):
    """Grid minimum of d and the periodic 8-neighbour local minima of an n x n eccentric grid.

    Returns ``(d_grid, min_d, minima)`` where ``minima`` is an (m, 2) array of anomaly pairs.
    """
    d = grid_distance(geom, n)
    is_min = np.ones_like(d, dtype=bool)
    for s1 in (-1, 0, 1):
        for s2 in (-1, 0, 1):
            if s1 or s2:
                is_min &= d <= np.roll(np.roll(d, s1, axis=0), s2, axis=1)
    i, j = np.nonzero(is_min)
    u = TWO_PI * np.arange(n) / n
    return d, float(d.min()), np.column_stack([u[i], u[j]])


def _descend(geom: MutualGeometry, u0, sign: float):
    """Quasi-Newton descent on sign * d^2; copes with the singular Hessians of continua."""
    def f(u):
        d2, g1, g2 = d2_grad_hess(geom, u[0], u[1])[:3]
        return sign * d2, sign * np.array([g1, g2])

    res = minimize(f, np.asarray(u0, dtype=float), jac=True, method="BFGS",
                   options=dict(gtol=1e-14 * geom.scale))
    return res.x if res.fun <= f(u0)[0] else np.asarray(u0, dtype=float)


def brute_force_set(geom: MutualGeometry, method: str, n: int = 360, n_starts: int = 8) -> CriticalSet:
    """Fallback for degenerate inputs: the refined grid minimum and maximum, flagged degenerate.

    The lowest ``n_starts`` grid local minima and the grid maximum are refined
    by Newton's method, or by quasi-Newton descent where Newton does not converge.
    """
    d, _, mins = grid_local_minima(geom, n)
    u = TWO_PI * np.arange(n) / n
    d_mins = d[np.rint(mins[:, 0] * n / TWO_PI).astype(int) % n, np.rint(mins[:, 1] * n / TWO_PI).astype(int) % n]
    starts = mins[np.argsort(d_mins, kind="stable")[:n_starts]]
    i, j = np.unravel_index(int(np.argmax(d)), d.shape)
    starts = np.vstack([starts, [u[i], u[j]]])
    w1, w2, res, ok = polish_many(geom, starts[:, 0], starts[:, 1])
    refined = []
    for k in range(len(starts)):
        sign = -1.0 if k == len(starts) - 1 else 1.0
        if ok[k] and classify_hessian(*d2_grad_hess(geom, w1[k], w2[k])[3:], geom.scale)[()] != DEGENERATE:
            refined.append((w1[k], w2[k]))
        else:
            refined.append(tuple(_descend(geom, starts[k], sign)))
    refined = np.array(refined)
    dist = np.sqrt(np.maximum(d2_values(geom, refined[:, 0], refined[:, 1]), 0.0))
    grads = d2_grad_hess(geom, refined[:, 0], refined[:, 1])[1:3]
    resid = np.hypot(*grads)
    points = []
    for k, kind in ((int(np.argmin(dist[:-1])), MINIMUM), (len(dist) - 1, MAXIMUM)):
        u1, u2 = wrap_angle(refined[k, 0]), wrap_angle(refined[k, 1])
        points.append(CriticalPoint(AnomalyPair(u1, u2),
                                    AnomalyPair(ecc_to_true(u1, geom.e1), ecc_to_true(u2, geom.e2), "true"),
                                    float(dist[k]), kind, float(resid[k])))
    return CriticalSet(tuple(points), method, None, degenerate=True)


def as_eccentric(geom: MutualGeometry, pairs: Sequence[AnomalyPair]) -> np.ndarray:
    return np.array([[q.v1, q.v2] for q in (to_eccentric(geom, p) for p in pairs)]).reshape(-1, 2)
