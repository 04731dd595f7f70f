"""One entry point for the six methods, with retries and a consensus pick."""

from __future__ import annotations

import math

from .critpoints import CheckReport, CriticalSet, brute_force_set, moid, run_checks
from .errors import NoMinimum, OrbDistError
from .orbits import KeplerianElements, MutualGeometry, mutual_geometry
from .planar import planar_critical_set
from .solver_ordinary import critical_set_oe, critical_set_oes
from .solver_trig import critical_set_te, critical_set_tt

METHODS = ("oe", "oes", "te", "tec", "tt", "tts")
CONSENSUS_ORDER = ("tts", "oes", "tec", "tt", "oe", "te")
RETRY_SHIFTS = (0.9, 2.1, 4.3)
PERPENDICULAR_TOL = 1e-10

_FAILED = CheckReport(False, False, False, 0, 0, 0, math.nan)


def continuum_of_critical_points(geom: MutualGeometry, tol: float = 1e-12) -> bool:
    """True when d^2 has non-isolated critical points.

    That happens for identical orbits, coplanar concentric circles, and a
    circle whose symmetry axis is crossed by the other orbit (perpendicular
    planes): at the crossing every point of the circle is equidistant.
    """
    if (geom.e1 <= tol or geom.e2 <= tol) and abs(geom.K * geom.N - geom.L * geom.M) <= PERPENDICULAR_TOL:
        return True
    if not geom.coplanar:
        return False
    if geom.e1 <= tol and geom.e2 <= tol:
        return True
    same_shape = abs(geom.a1 - geom.a2) <= tol * geom.a1 and abs(geom.e1 - geom.e2) <= tol
    return same_shape and abs(geom.K - 1.0) <= tol and abs(geom.N - 1.0) <= tol


def _run_once(geom: MutualGeometry, method: str, s1: float, s2: float) -> CriticalSet:
    if method == "oe":
        return critical_set_oe(geom)
    if method == "oes":
        return critical_set_oes(geom, s1, s2)
    if method in ("te", "tec"):
        return critical_set_te(geom, use_chebyshev=method == "tec")
    if method in ("tt", "tts"):
        cset = critical_set_tt(geom, s1, s2)
        return CriticalSet(cset.points, method, cset.checks, extra=cset.extra)
    raise ValueError(f"unknown method {method!r}")


def _guarded(geom, method, s1=0.0, s2=0.0) -> CriticalSet:
    try:
        return _run_once(geom, method, s1, s2)
    except (OrbDistError, ArithmeticError, ValueError, FloatingPointError) as exc:
        if isinstance(exc, ValueError) and str(exc).startswith("unknown method"):
            raise
        return CriticalSet((), method, _FAILED, error=f"{type(exc).__name__}: {exc}")


def compute(geom: MutualGeometry, method: str, shifts: tuple[float, ...] | None = None) -> CriticalSet:
    """Critical set of d^2 by one method, checks included.

    The shifted methods try each shift of ``shifts`` (s1 = s2) in turn and
    stop at the first result that passes every check; otherwise the
    attempt with the fewest failed checks is returned.
    """
    method = method.lower()
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if continuum_of_critical_points(geom):
        cset = brute_force_set(geom, method)
        return cset.with_checks(run_checks(geom, cset))
    if method not in ("oes", "tts"):
        return _guarded(geom, method)
    best = None
    for attempt, s in enumerate(shifts if shifts is not None else RETRY_SHIFTS):
        cset = _guarded(geom, method, s, s)
        cset.extra["attempts"] = attempt + 1
        if cset.checks.passed:
            return cset
        if best is None or len(cset.checks.failures()) < len(best.checks.failures()):
            best = cset
    return best


def compute_all(geom: MutualGeometry) -> dict[str, CriticalSet]:
    return {m: compute(geom, m) for m in METHODS}


def consensus(results: dict[str, CriticalSet]) -> CriticalSet | None:
    """First method in reliability order whose result passed all checks."""
    for m in CONSENSUS_ORDER:
        cset = results.get(m)
        if cset is not None and cset.checks is not None and cset.checks.passed:
            return cset
    return None


def best_set(geom: MutualGeometry, order: tuple[str, ...] = ("oes", "tts", "tec", "oe", "tt", "te")) -> CriticalSet:
    """First critical set passing every check, coplanar pairs going to the planar solver first.

    Falls back to the result with the fewest failed checks when none passes.
    """
    tried = []
    if geom.coplanar:
        try:
            cset = planar_critical_set(geom)
        except (OrbDistError, ArithmeticError, ValueError) as exc:
            cset = CriticalSet((), "planar", _FAILED, error=f"{type(exc).__name__}: {exc}")
        if cset.checks.passed:
            return cset
        tried.append(cset)
    for m in order:
        cset = compute(geom, m)
        if cset.checks.passed:
            return cset
        tried.append(cset)
    return min(tried, key=lambda c: len(c.checks.failures()))


def minimum_distance(el1: KeplerianElements | MutualGeometry, el2: KeplerianElements | None = None,
                     method: str = "auto") -> float:
    """d_min of two orbits; ``auto`` takes the first method whose result passes all checks."""
    geom = el1 if isinstance(el1, MutualGeometry) else mutual_geometry(el1, el2)
    cset = best_set(geom) if method == "auto" else compute(geom, method)
    try:
        return moid(cset)[0]
    except NoMinimum:
        return math.nan
