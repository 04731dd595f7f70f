"""Orbital elements, orientation vectors and the Keplerian distance.

Two confocal ellipses are described in their own planes by in-plane
coordinates (x, y) along the pericenter direction P and its in-plane
normal Q. Everything the distance function needs is then carried by the
semimajor axes, eccentricities and the four scalar products

    K = <P1, P2>,  L = <Q1, P2>,  M = <P1, Q2>,  N = <Q1, Q2>.

Angles are radians throughout the library; conversion to degrees happens
only at the I/O boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi
E_MAX = 1.0 - 1e-12

Parametrization = Literal["eccentric", "true"]


def wrap_angle(v):
    """Map angles to [0, 2*pi)."""
    w = np.mod(v, TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    return np.where(w >= TWO_PI, 0.0, w) if np.ndim(w) else (0.0 if w >= TWO_PI else float(w))


@dataclass(frozen=True)
class KeplerianElements:
    """Shape and orientation of one elliptic orbit.

    Use :meth:`from_keplerian` or :meth:`from_cometary`; both validate the
    eccentricity and normalize the angles.
    """

    a: float
    e: float
    inc: float
    raan: float
    argp: float
    name: str = ""
    q_given: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not (0.0 <= self.e <= E_MAX):
            raise DomainError(f"eccentricity {self.e!r} outside [0, 1) for orbit {self.name!r}")
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise DomainError(f"semimajor axis {self.a!r} must be positive for orbit {self.name!r}")
        object.__setattr__(self, "raan", wrap_angle(self.raan))
        object.__setattr__(self, "argp", wrap_angle(self.argp))

    @classmethod
    def from_keplerian(cls, a, e, inc, raan, argp, name="", degrees=False):
        if degrees:
            inc, raan, argp = map(math.radians, (inc, raan, argp))
        return cls(float(a), float(e), float(inc), float(raan), float(argp), name)

    @classmethod
    def from_cometary(cls, q, e, inc, raan, argp, name="", degrees=False):
        if not (0.0 <= e <= E_MAX):
            raise DomainError(f"eccentricity {e!r} outside [0, 1) for orbit {name!r}")
        if not q > 0.0:
            raise DomainError(f"pericenter distance {q!r} must be positive for orbit {name!r}")
        if degrees:
            inc, raan, argp = map(math.radians, (inc, raan, argp))
        return cls(q / (1.0 - e), float(e), float(inc), float(raan), float(argp), name, True)

    @property
    def q(self) -> float:
        return self.a * (1.0 - self.e)

    @property
    def p(self) -> float:
        """Conic parameter a(1 - e^2)."""
        return self.a * (1.0 - self.e * self.e)

    def replace(self, **changes) -> "KeplerianElements":
        values = dict(a=self.a, e=self.e, inc=self.inc, raan=self.raan, argp=self.argp, name=self.name)
        values.update(changes)
        return KeplerianElements(**values)


class OrbitFrame(NamedTuple):
    P: np.ndarray
    Q: np.ndarray

    @property
    def normal(self) -> np.ndarray:
        return np.cross(self.P, self.Q)


def orientation_frame(el: KeplerianElements) -> OrbitFrame:
    ci, si = math.cos(el.inc), math.sin(el.inc)
    cn, sn = math.cos(el.raan), math.sin(el.raan)
    cw, sw = math.cos(el.argp), math.sin(el.argp)
    P = np.array([cw * cn - ci * sw * sn, cw * sn + ci * sw * cn, sw * si])
    Q = np.array([-sw * cn - ci * cw * sn, -sw * sn + ci * cw * cn, cw * si])
    return OrbitFrame(P, Q)


@dataclass(frozen=True)
class MutualGeometry:
    """Everything the distance function depends on for a pair of orbits.

    ``A`` holds the fifteen coefficients A_1..A_15 of the eccentric-anomaly
    gradient system at indices 0..14.
    """

    a1: float
    a2: float
    e1: float
    e2: float
    K: float
    L: float
    M: float
    N: float
    A: np.ndarray = field(repr=False, compare=False)

    @property
    def b1(self) -> float:
        return math.sqrt(1.0 - self.e1 * self.e1)

    @property
    def b2(self) -> float:
        return math.sqrt(1.0 - self.e2 * self.e2)

    @property
    def p1(self) -> float:
        return self.a1 * (1.0 - self.e1 * self.e1)

    @property
    def p2(self) -> float:
        return self.a2 * (1.0 - self.e2 * self.e2)

    @property
    def scale(self) -> float:
        """Natural size of d^2 derivatives (au^2)."""
        return self.a1 * self.a2

    def swapped(self) -> "MutualGeometry":
        """Geometry with the roles of the two orbits exchanged."""
        return from_products(self.a2, self.e2, self.a1, self.e1, self.K, self.M, self.L, self.N)

    @property
    def coplanar(self) -> bool:
        # |P1 x Q1 . P2 x Q2| = |KN - LM| equals 1 exactly when the planes coincide
        return abs(abs(self.K * self.N - self.L * self.M) - 1.0) < 1e-12


def from_products(a1, e1, a2, e2, K, L, M, N) -> MutualGeometry:
    """Build a :class:`MutualGeometry` from shapes and the four scalar products."""
    b1 = math.sqrt(1.0 - e1 * e1)
    b2 = math.sqrt(1.0 - e2 * e2)
    A = np.empty(15)
    A[0] = a1 * a1 * (1.0 - e1 * e1)
    A[1] = 0.0
    A[2] = a1 * a1
    A[3] = a2 * a2 * (1.0 - e2 * e2)
    A[4] = 0.0
    A[5] = a2 * a2
    A[6] = -2.0 * a1 * a2 * b1 * b2 * N
    A[7] = -2.0 * a1 * a2 * b1 * L
    A[8] = -2.0 * a1 * a2 * b2 * M
    A[9] = -2.0 * a1 * a2 * K
    A[10] = 2.0 * a1 * a2 * e2 * b1 * L
    A[11] = 2.0 * a1 * (a2 * e2 * K - a1 * e1)
    A[12] = 2.0 * a1 * a2 * e1 * b2 * M
    A[13] = 2.0 * a2 * (a1 * e1 * K - a2 * e2)
    A[14] = a1 * a1 * e1 * e1 + a2 * a2 * e2 * e2 - 2.0 * a1 * a2 * e1 * e2 * K
    A.setflags(write=False)
    return MutualGeometry(float(a1), float(a2), float(e1), float(e2),
                          float(K), float(L), float(M), float(N), A)


def mutual_geometry(el1: KeplerianElements, el2: KeplerianElements) -> MutualGeometry:
    P1, Q1 = orientation_frame(el1)
    P2, Q2 = orientation_frame(el2)
    return from_products(el1.a, el1.e, el2.a, el2.e,
                         float(P1 @ P2), float(Q1 @ P2), float(P1 @ Q2), float(Q1 @ Q2))


@dataclass(frozen=True)
class AnomalyPair:
    v1: float
    v2: float
    parametrization: Parametrization = "eccentric"

    def __post_init__(self):
        object.__setattr__(self, "v1", float(wrap_angle(self.v1)))
        object.__setattr__(self, "v2", float(wrap_angle(self.v2)))


# -- anomaly conversions ---------------------------------------------------

def ecc_to_true(u, e):
    b = np.sqrt(1.0 - e * e)
    return wrap_angle(np.arctan2(b * np.sin(u), np.cos(u) - e))


def true_to_ecc(f, e):
    b = np.sqrt(1.0 - e * e)
    return wrap_angle(np.arctan2(b * np.sin(f), np.cos(f) + e))


def to_eccentric(geom: MutualGeometry, pair: AnomalyPair) -> AnomalyPair:
    if pair.parametrization == "eccentric":
        return pair
    return AnomalyPair(true_to_ecc(pair.v1, geom.e1), true_to_ecc(pair.v2, geom.e2), "eccentric")


def to_true(geom: MutualGeometry, pair: AnomalyPair) -> AnomalyPair:
    if pair.parametrization == "true":
        return pair
    return AnomalyPair(ecc_to_true(pair.v1, geom.e1), ecc_to_true(pair.v2, geom.e2), "true")


# -- positions and derivatives ----------------------------------------------

def conic_xy(a, e, v, parametrization: Parametrization = "eccentric"):
    """In-plane coordinates and their first two derivatives along the anomaly.

    Returns ``(x, y, dx, dy, ddx, ddy)``; works elementwise on arrays.
    """
    c, s = np.cos(v), np.sin(v)
    if parametrization == "eccentric":
        b = math.sqrt(1.0 - e * e)
        return a * (c - e), a * b * s, -a * s, a * b * c, -a * c, -a * b * s
    p = a * (1.0 - e * e)
    w = 1.0 + e * c
    r = p / w
    dr = p * e * s / (w * w)
    ddr = p * e * (c * w + 2.0 * e * s * s) / (w * w * w)
    return (r * c, r * s,
            dr * c - r * s, dr * s + r * c,
            ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s)


def position(el: KeplerianElements, frame: OrbitFrame | None, v, parametrization: Parametrization = "eccentric"):
    """Heliocentric (focus-centred) Cartesian position, au."""
    if frame is None:
        frame = orientation_frame(el)
    x, y = conic_xy(el.a, el.e, v, parametrization)[:2]
    return np.multiply.outer(x, frame.P) + np.multiply.outer(y, frame.Q)


def _bilinear(geom, x1, y1, x2, y2):
    # <x1 P + y1 Q, x2 p + y2 q>
    return x1 * (geom.K * x2 + geom.M * y2) + y1 * (geom.L * x2 + geom.N * y2)


def d2_grad_hess(geom: MutualGeometry, v1, v2, parametrization: Parametrization = "eccentric"):
    """Squared distance with gradient and Hessian, vectorized over anomalies.

    Returns ``(d2, g1, g2, h11, h12, h22)``.
    """
    x1, y1, dx1, dy1, ddx1, ddy1 = conic_xy(geom.a1, geom.e1, v1, parametrization)
    x2, y2, dx2, dy2, ddx2, ddy2 = conic_xy(geom.a2, geom.e2, v2, parametrization)
    d2 = x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2 - 2.0 * _bilinear(geom, x1, y1, x2, y2)
    g1 = 2.0 * (x1 * dx1 + y1 * dy1 - _bilinear(geom, dx1, dy1, x2, y2))
    g2 = 2.0 * (x2 * dx2 + y2 * dy2 - _bilinear(geom, x1, y1, dx2, dy2))
    h11 = 2.0 * (dx1 * dx1 + dy1 * dy1 + x1 * ddx1 + y1 * ddy1 - _bilinear(geom, ddx1, ddy1, x2, y2))
    h22 = 2.0 * (dx2 * dx2 + dy2 * dy2 + x2 * ddx2 + y2 * ddy2 - _bilinear(geom, x1, y1, ddx2, ddy2))
    h12 = -2.0 * _bilinear(geom, dx1, dy1, dx2, dy2)
    return d2, g1, g2, h11, h12, h22


def d2_values(geom: MutualGeometry, v1, v2, parametrization: Parametrization = "eccentric"):
    """Squared distance only (cheaper than :func:`d2_grad_hess`)."""
    x1, y1 = conic_xy(geom.a1, geom.e1, v1, parametrization)[:2]
    x2, y2 = conic_xy(geom.a2, geom.e2, v2, parametrization)[:2]
    return x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2 - 2.0 * _bilinear(geom, x1, y1, x2, y2)


def d2_and_grad(geom: MutualGeometry, pair: AnomalyPair):
    d2, g1, g2 = d2_grad_hess(geom, pair.v1, pair.v2, pair.parametrization)[:3]
    return float(max(d2, 0.0)), np.array([g1, g2])


def hessian_d2(geom: MutualGeometry, pair: AnomalyPair) -> np.ndarray:
    _, _, _, h11, h12, h22 = d2_grad_hess(geom, pair.v1, pair.v2, pair.parametrization)
    return np.array([[h11, h12], [h12, h22]])
