"""Polynomial machinery shared by all solvers.

Monomial and Chebyshev univariate polynomials, trigonometric polynomials
in (cos u, sin u), DFT interpolation of determinant polynomials, exact
deflation by 1 + t^2, Aberth simultaneous iteration, Chebyshev basis
change and colleague-matrix rootfinding.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numba import njit
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import polynomial as nppoly
from scipy.signal import convolve2d

from .errors import DegreeOverflow, EigenFailure, NoConvergence, NotDivisible

TRIM_RTOL = 1e-13
DFT_RESIDUE_RTOL = 1e-9
DEFLATE_RTOL = 1e-9
ROOT_RESIDUAL_RTOL = 1e-10
ABERTH_MAX_SWEEPS = 200
ABERTH_ANGLE_OFFSET = 0.376
REAL_ROOT_BAND = 1e-7
COSINE_BAND = 1e-9
PAIRED_REAL_ROOTS = True  # also accept unpaired near-axis roots as real
UNPAIRED_LIMIT = 1e-4
EIG_RESIDUAL_RTOL = 1e-10


def _trim(c: np.ndarray) -> np.ndarray:
    if c.size <= 1:
        return c
    a = np.abs(c)
    keep = a > TRIM_RTOL * a.max()
    if keep[-1]:
        return c
    nz = np.flatnonzero(keep)
    return c[: nz[-1] + 1] if nz.size else c[:1] * 0.0


class UniPoly:
    """Real univariate polynomial, coefficients in ascending degree."""

    __slots__ = ("coeffs",)
    __array_ufunc__ = None  # make numpy scalars defer to our reflected operators

    def __init__(self, coeffs, trim=True):
        c = np.asarray(coeffs, dtype=float).ravel()
        if c.size == 0:
            c = np.zeros(1)
        self.coeffs = _trim(c) if trim else c

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __call__(self, x):
        return nppoly.polyval(x, self.coeffs)

    def __repr__(self):
        return f"UniPoly({np.array2string(self.coeffs, precision=6)})"

    @staticmethod
    def _coerce(other):
        return other.coeffs if isinstance(other, UniPoly) else np.atleast_1d(float(other))

    def __add__(self, other):
        return UniPoly(nppoly.polyadd(self.coeffs, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return UniPoly(nppoly.polysub(self.coeffs, self._coerce(other)))

    def __rsub__(self, other):
        return UniPoly(nppoly.polysub(self._coerce(other), self.coeffs))

    def __mul__(self, other):
        if isinstance(other, UniPoly):
            return UniPoly(np.convolve(self.coeffs, other.coeffs))
        return UniPoly(self.coeffs * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return UniPoly(-self.coeffs)

    def __pow__(self, k: int):
        out = UniPoly([1.0])
        for _ in range(k):
            out = out * self
        return out

    def deriv(self) -> "UniPoly":
        return UniPoly(nppoly.polyder(self.coeffs))


X_POLY = UniPoly([0.0, 1.0])
ONE_MINUS_X2 = UniPoly([1.0, 0.0, -1.0])


class ChebPoly:
    """Polynomial in the Chebyshev basis T_0..T_n."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.array(coeffs, dtype=float).ravel()

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return npcheb.chebval(x, self.coeffs)

    def to_monomial(self) -> UniPoly:
        n = self.degree
        return UniPoly(_cheb_power_table(n).T @ self.coeffs, trim=False)


class TrigPoly:
    """Polynomial in x = cos u, y = sin u stored as a table ``c[i, j]`` of x^i y^j."""

    __slots__ = ("c",)
    __array_ufunc__ = None

    def __init__(self, table):
        self.c = np.atleast_2d(np.asarray(table, dtype=float))

    @classmethod
    def constant(cls, value):
        return cls([[float(value)]])

    @classmethod
    def linear(cls, const=0.0, cx=0.0, cy=0.0):
        """const + cx*x + cy*y"""
        return cls([[const, cy], [cx, 0.0]])

    @property
    def shape(self):
        return self.c.shape

    def total_degree(self, rtol=TRIM_RTOL) -> int:
        c = self.c
        tol = rtol * np.max(np.abs(c)) if c.size else 0.0
        i, j = np.nonzero(np.abs(c) > tol)
        return int(np.max(i + j)) if i.size else 0

    def __call__(self, x, y):
        # Horner in y with x-polynomial coefficients
        out = 0.0
        for j in range(self.c.shape[1] - 1, -1, -1):
            out = out * y + nppoly.polyval(x, self.c[:, j])
        return out

    def at_angle(self, u):
        return self(np.cos(u), np.sin(u))

    def _padded(self, other):
        a, b = self.c, other.c
        shape = (max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1]))
        pa = np.zeros(shape)
        pb = np.zeros(shape)
        pa[: a.shape[0], : a.shape[1]] = a
        pb[: b.shape[0], : b.shape[1]] = b
        return pa, pb

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(other)
        pa, pb = self._padded(other)
        return TrigPoly(pa + pb)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(other)
        pa, pb = self._padded(other)
        return TrigPoly(pa - pb)

    def __rsub__(self, other):
        return TrigPoly.constant(other) - self

    def __neg__(self):
        return TrigPoly(-self.c)

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return TrigPoly(convolve2d(self.c, other.c))
        return TrigPoly(self.c * float(other))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = TrigPoly.constant(1.0)
        for _ in range(k):
            out = out * self
        return out

    def y_coefficients(self) -> list[UniPoly]:
        """The x-polynomials g_j with p(x, y) = sum_j g_j(x) y^j."""
        return [UniPoly(self.c[:, j]) for j in range(self.c.shape[1])]


# -- DFT interpolation and deflation ---------------------------------------

def dft_interpolate(evaluator, degree_bound: int) -> UniPoly:
    """Recover a real polynomial from its values at roots of unity.

    ``evaluator`` is called once with the complex array of nodes and must
    return the polynomial's values there.
    """
    n = 1
    while n <= degree_bound:
        n *= 2
    nodes = np.exp(2j * np.pi * np.arange(n) / n)
    values = np.asarray(evaluator(nodes), dtype=complex)
    coeffs = np.fft.fft(values) / n
    scale = np.max(np.abs(coeffs))
    tol = DFT_RESIDUE_RTOL * scale
    if np.any(np.abs(coeffs[degree_bound + 1:]) > tol):
        raise DegreeOverflow(f"interpolated degree exceeds {degree_bound}")
    coeffs = coeffs[: degree_bound + 1]
    if np.any(np.abs(coeffs.imag) > tol):
        raise ValueError("evaluator does not define a real polynomial")
    return UniPoly(coeffs.real)


def deflate_one_plus_t2(p: UniPoly) -> UniPoly:
    quo, rem = nppoly.polydiv(p.coeffs, [1.0, 0.0, 1.0]) if p.degree >= 2 else (np.zeros(1), p.coeffs)
    if np.linalg.norm(rem) > DEFLATE_RTOL * max(p.norm(), np.finfo(float).tiny):
        raise NotDivisible("polynomial is not a multiple of 1 + t^2")
    return UniPoly(quo)


# -- Aberth simultaneous iteration -------------------------------------------

@njit(cache=True)
def _aberth_sweeps(c, z, max_sweeps):
    n = z.shape[0]
    eps = 2.220446049250313e-16
    ac = np.abs(c)
    done = np.zeros(n, dtype=np.bool_)
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        active = False
        for i in range(n):
            if done[i]:
                continue
            zi = z[i]
            az = abs(zi)
            pv = c[n] + 0j
            dp = 0j
            bound = ac[n]
            for k in range(n - 1, -1, -1):
                dp = dp * zi + pv
                pv = pv * zi + c[k]
                bound = bound * az + ac[k]
            # |p(z)| at the level of its own rounding error: z is a root to working precision
            if abs(pv) <= 4.0 * eps * bound:
                done[i] = True
                continue
            active = True
            sigma = 0j
            for j in range(n):
                if j != i:
                    diff = zi - z[j]
                    if diff != 0:
                        sigma += 1.0 / diff
            if dp == 0:
                ratio = pv / (eps * bound)
            else:
                ratio = pv / dp
            z[i] = zi - ratio / (1.0 - ratio * sigma)
        if not active:
            break
    return z, sweeps


def _newton_polygon_start(c: np.ndarray) -> np.ndarray:
    """Initial approximations on circles from the upper convex hull of (j, log|c_j|)."""
    n = len(c) - 1
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(c))
    pts = [j for j in range(n + 1) if np.isfinite(logs[j])]
    hull: list[int] = []
    for j in pts:
        while len(hull) >= 2:
            j0, j1 = hull[-2], hull[-1]
            # drop j1 if it lies on or below the segment j0 -> j
            if (logs[j1] - logs[j0]) * (j - j0) <= (logs[j] - logs[j0]) * (j1 - j0):
                hull.pop()
            else:
                break
        hull.append(j)
    z = np.empty(n, dtype=complex)
    pos = 0
    if hull[0] > 0:
        # zero roots: place them on a tiny circle
        k = hull[0]
        z[:k] = 1e-300 * np.exp(1j * (2 * np.pi * np.arange(k) / k + ABERTH_ANGLE_OFFSET))
        pos = k
    for j0, j1 in zip(hull[:-1], hull[1:]):
        k = j1 - j0
        r = math.exp((logs[j0] - logs[j1]) / k)
        ang = 2 * np.pi * np.arange(k) / k + 2 * np.pi * pos / n + ABERTH_ANGLE_OFFSET
        z[pos: pos + k] = r * np.exp(1j * ang)
        pos += k
    return z


def roots_simultaneous(p: UniPoly) -> np.ndarray:
    """All complex roots of ``p`` by Aberth-Ehrlich iteration."""
    c = np.asarray(p.coeffs, dtype=float)
    n = len(c) - 1
    if n < 1:
        raise ValueError("degree must be at least 1")
    z0 = _newton_polygon_start(c)
    z, _ = _aberth_sweeps(c.astype(complex), z0, ABERTH_MAX_SWEEPS)
    norm = np.linalg.norm(c)
    resid = np.abs(nppoly.polyval(z, c))
    bound = ROOT_RESIDUAL_RTOL * norm * np.maximum(1.0, np.abs(z)) ** n
    if not np.all(np.isfinite(z)) or np.any(resid > bound):
        raise NoConvergence(f"Aberth iteration did not converge in {ABERTH_MAX_SWEEPS} sweeps")
    return z


# -- Chebyshev basis ----------------------------------------------------------

@lru_cache(maxsize=None)
def _cheb_power_table(n: int) -> np.ndarray:
    """Lower-triangular A with T_i(x) = sum_k A[i, k] x^k (float copy)."""
    return np.array(_cheb_int_rows(n), dtype=float)


@lru_cache(maxsize=None)
def _cheb_int_rows(n: int) -> tuple[tuple[int, ...], ...]:
    rows = [[1] + [0] * n, [0, 1] + [0] * (n - 1)]
    for k in range(1, n):
        nxt = [0] * (n + 1)
        for i in range(n):
            nxt[i + 1] += 2 * rows[k][i]
        for i in range(n + 1):
            nxt[i] -= rows[k - 1][i]
        rows.append(nxt)
    return tuple(tuple(r) for r in rows[: n + 1])


@lru_cache(maxsize=None)
def monomial_to_chebyshev_matrix(n: int) -> np.ndarray:
    """The matrix D * inv(Atilde)^T mapping monomial to Chebyshev coefficients.

    inv(Atilde) is summed from its nilpotent series I - N + N^2 - ... .
    The series is evaluated exactly: with S = diag(2^i) the conjugate
    S N S^-1 has integer entries, so the alternating sum carries no
    cancellation error even for high degree.
    """
    a = _cheb_int_rows(n)
    nn = n + 1
    diag = [a[i][i] for i in range(nn)]
    nprime = np.zeros((nn, nn), dtype=object)
    for i in range(1, nn):
        for k in range(i):
            num = a[i][k] * 2 ** (i - k)
            q, r = divmod(num, diag[i])
            if r:
                raise AssertionError("scaled nilpotent part is not integral")
            nprime[i, k] = q
    total = np.identity(nn, dtype=int).astype(object)
    term = total.copy()
    for _ in range(1, nn):
        term = -(term @ nprime)
        if not term.any():
            break
        total = total + term
    out = np.empty((nn, nn))
    # inv(Atilde)[k, i] = 2^(i-k) * total[k, i]; result[i, k] = inv(Atilde)[k, i] / a_ii
    for i in range(nn):
        for k in range(nn):
            t = total[k, i]
            out[i, k] = 0.0 if t == 0 else math.ldexp(float(t), i - k) / diag[i]
    out.setflags(write=False)
    return out


def to_chebyshev(p: UniPoly) -> ChebPoly:
    if p.degree > 64:
        raise ValueError("Chebyshev conversion supports degree <= 64")
    return ChebPoly(monomial_to_chebyshev_matrix(p.degree) @ p.coeffs)


def colleague_matrix(c: ChebPoly) -> np.ndarray:
    coeffs = c.coeffs
    n = len(coeffs) - 1
    if n < 1:
        raise ValueError("degree must be at least 1")
    if coeffs[-1] == 0.0:
        raise ValueError("leading Chebyshev coefficient is zero")
    if n == 1:
        return np.array([[-coeffs[0] / coeffs[1]]])
    T = np.zeros((n, n))
    idx = np.arange(n - 1)
    T[idx, idx + 1] = 1.0
    T[idx + 1, idx] = 1.0
    T[n - 2, n - 1] = T[n - 1, n - 2] = math.sqrt(2.0)
    row = coeffs[n - 1::-1].copy()
    row[-1] *= math.sqrt(2.0)
    C = 0.5 * T
    C[0, :] -= row / (2.0 * coeffs[-1])
    return C


def colleague_roots(c: ChebPoly) -> np.ndarray:
    C = colleague_matrix(c)
    try:
        lam, vec = np.linalg.eig(C)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    resid = np.linalg.norm(C @ vec - vec * lam, axis=0)
    if np.any(~np.isfinite(lam)) or np.any(resid > EIG_RESIDUAL_RTOL * np.linalg.norm(C, 2)):
        raise EigenFailure("colleague eigenpairs failed the residual test")
    return lam


# -- root filtering -------------------------------------------------------------

def _unpaired(roots: np.ndarray, limit: float) -> np.ndarray:
    """Mask of off-axis roots (|Im| <= limit (1 + |Re|)) that have no conjugate partner.

    Non-real roots of a real polynomial come in conjugate pairs, so a near-axis root whose
    mirror image is not matched by another root is a real root displaced by rounding.
    """
    out = np.zeros(roots.shape, dtype=bool)
    near = np.nonzero((np.abs(roots.imag) <= limit * (1.0 + np.abs(roots.real))) & (roots.imag != 0.0))[0]
    for i in near:
        others = np.delete(roots, i)
        gap = np.min(np.abs(others - np.conj(roots[i]))) if others.size else np.inf
        out[i] = gap > abs(roots[i].imag)
    return out


def real_roots(roots: np.ndarray, band: float = REAL_ROOT_BAND, paired: bool | None = None) -> np.ndarray:
    """Real parts of the roots within ``band`` of the real axis, plus (``paired``) unpaired near-axis roots."""
    roots = np.asarray(roots, dtype=complex)
    keep = np.abs(roots.imag) <= band * (1.0 + np.abs(roots.real))
    if PAIRED_REAL_ROOTS if paired is None else paired:
        keep |= _unpaired(roots, UNPAIRED_LIMIT)
    return np.sort(roots.real[keep])


def cosine_roots(roots: np.ndarray, paired: bool | None = None) -> np.ndarray:
    """Real roots usable as cosines, clamped to [-1, 1]."""
    x = real_roots(roots, paired=paired)
    x = x[np.abs(x) <= 1.0 + COSINE_BAND]
    return np.clip(x, -1.0, 1.0)


# -- trigonometric polynomial shift ---------------------------------------------

@lru_cache(maxsize=None)
def _shift_plan(m: int, n: int):
    """Index/weight tables for the closed-form shift sums over (i, j, l, h)."""
    I, J, Lr, H = np.meshgrid(np.arange(m + 1), np.arange(n + 1), np.arange(m + n + 1),
                              np.arange(m + 1), indexing="ij")
    valid = (Lr <= I + J) & (H >= np.maximum(Lr - J, 0)) & (H <= np.minimum(Lr, I))
    binom = np.vectorize(math.comb)
    weight = np.where(valid, binom(I, np.clip(H, 0, None)) * binom(J, np.clip(Lr - H, 0, None))
                      * np.where((I - H) % 2, -1.0, 1.0), 0.0)
    exp_c = np.where(valid, 2 * H + J - Lr, 0)
    exp_s = np.where(valid, I - 2 * H + Lr, 0)
    ii, jj, ll = np.nonzero(valid.any(axis=3))
    return weight, exp_c, exp_s, (ii, jj, ll)


def shift_trigpoly(p: TrigPoly, alpha: float) -> TrigPoly:
    """Coefficients of q with q(cos v, sin v) = p(cos(v + alpha), sin(v + alpha))."""
    m, n = p.c.shape[0] - 1, p.c.shape[1] - 1
    weight, exp_c, exp_s, (ii, jj, ll) = _shift_plan(m, n)
    ca, sa = math.cos(alpha), math.sin(alpha)
    C = np.sum(weight * ca ** exp_c * sa ** exp_s, axis=3)
    out = np.zeros((m + n + 1, m + n + 1))
    np.add.at(out, (ll, ii + jj - ll), p.c[ii, jj] * C[ii, jj, ll])
    return TrigPoly(out)


@lru_cache(maxsize=None)
def _one_minus_x2_power(k: int) -> np.ndarray:
    out = np.zeros(2 * k + 1)
    out[::2] = [(-1) ** i * math.comb(k, i) for i in range(k + 1)]
    return out


def reduce_on_circle(p: TrigPoly) -> tuple[UniPoly, UniPoly]:
    """Polynomials a, b with p(x, y) = a(x) y + b(x) whenever x^2 + y^2 = 1."""
    m, n = p.c.shape[0] - 1, p.c.shape[1] - 1
    acc = np.zeros((2, m + n + 1))
    for j in range(n + 1):
        term = np.convolve(p.c[:, j], _one_minus_x2_power(j // 2))
        acc[j % 2, : term.size] += term
    return UniPoly(acc[1]), UniPoly(acc[0])


def sylvester_resultant_1cubic(a: UniPoly, b: UniPoly) -> UniPoly:
    """Resultant in y of a(x) y + b(x) and x^2 + y^2 - 1, i.e. a^2 (x^2 - 1) + b^2."""
    return a * a * UniPoly([-1.0, 0.0, 1.0]) + b * b
