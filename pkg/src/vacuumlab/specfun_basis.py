"""Bessel functions of the first kind, their zeros, the sine and Bessel
eigenbases used by the smoothing operators, and Gauss-Jacobi quadrature on
[0, 1] for weights x^p (1-x)^q.
"""
from dataclasses import dataclass
from functools import lru_cache
from math import lgamma, pi

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln

from .errors import DomainError, PreconditionError, RangeError

__all__ = [
    "NU_MAX",
    "Z_MAX",
    "QuadratureRule",
    "BesselBasis",
    "TimeBasis",
    "bessel_j",
    "bessel_j_scaled",
    "bessel_zero",
    "bessel_zeros",
    "gauss_jacobi_rule",
    "gauss_legendre_rule",
    "jacobi_recurrence",
    "orthonormal_jacobi",
    "space_basis",
    "time_basis",
]

NU_MAX = 200.0
Z_MAX = 1.0e4
_RESCALE = 1.0e250


def _check_range(nu, z):
    if not (0.0 <= nu <= NU_MAX):
        raise RangeError(f"Bessel order {nu} outside [0, {NU_MAX}]")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0.0) or np.any(z > Z_MAX) or not np.all(np.isfinite(z)):
        raise RangeError(f"Bessel argument outside [0, {Z_MAX}]")
    return z


def _series_scaled(nu, z):
    # J_nu(z) / (z/2)^nu by its power series; used where the terms are
    # bounded by a small multiple of the first one.
    q = -0.25 * z * z
    term = np.full_like(z, np.exp(-lgamma(nu + 1.0)))
    total = term.copy()
    for k in range(1, 400):
        term = term * q / (k * (nu + k))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _miller(nu, z):
    # Backward recurrence for J_{f+k}, f = frac(nu), normalised with
    # (z/2)^f = sum_k (f+2k) Gamma(f+k)/k! J_{f+2k}(z).
    n0 = int(np.floor(nu))
    f = nu - n0
    zmax = float(np.max(z))
    start = int(max(nu, zmax) + 30 + 12 * zmax ** (1.0 / 3.0))
    start += start % 2
    j_next = np.zeros_like(z)
    j_cur = np.full_like(z, 1e-300)
    target = np.zeros_like(z)
    norm = np.zeros_like(z)
    for k in range(start, -1, -1):
        mu = f + k
        if k == n0:
            target = j_cur.copy()
        if k % 2 == 0:
            m = k // 2
            if f == 0.0:
                coef = 1.0 if m == 0 else 2.0
            else:
                coef = np.exp(np.log(f + 2 * m) + lgamma(f + m) - lgamma(m + 1.0))
            norm = norm + coef * j_cur
        if k == 0:
            break
        j_prev = (2.0 * mu / z) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        big = np.abs(j_cur) > _RESCALE
        if np.any(big):
            s = np.where(big, 1.0 / _RESCALE, 1.0)
            j_cur = j_cur * s
            j_next = j_next * s
            target = target * s
            norm = norm * s
    return target * (0.5 * z) ** f / norm


def _use_series(nu, z):
    return 0.25 * z * z <= 2.0 * (nu + 1.0)


def _use_hankel(nu, z):
    return z >= max(40.0, 2.0 * nu * nu)


def _hankel(nu, z):
    # Large-argument expansion J = sqrt(2/(pi z)) (P cos chi - Q sin chi),
    # truncated at its smallest term.
    mu = 4.0 * nu * nu
    p = np.ones_like(z)
    q = np.zeros_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    last = np.full_like(z, np.inf)
    for k in range(1, 60):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        mag = np.abs(term)
        active &= mag < last
        last = np.where(active, mag, last)
        contrib = np.where(active, term, 0.0)
        if k % 2 == 1:
            q = q + (-1) ** ((k - 1) // 2) * contrib
        else:
            p = p + (-1) ** (k // 2) * contrib
        if not np.any(active & (mag > 1e-17)):
            break
    phase = (0.5 * nu + 0.25) * pi
    cos_chi = np.cos(z) * np.cos(phase) + np.sin(z) * np.sin(phase)
    sin_chi = np.sin(z) * np.cos(phase) - np.cos(z) * np.sin(phase)
    return np.sqrt(2.0 / (pi * z)) * (p * cos_chi - q * sin_chi)


def bessel_j(nu, z):
    """Bessel function of the first kind J_nu(z) for real nu >= 0, z >= 0.

    Power series where 2(nu+1) >= z^2/4, Hankel expansion for
    z >= max(40, 2 nu^2), Miller backward recurrence in between.
    Working range nu <= 200, z <= 1e4.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(_check_range(nu, z)).astype(float)
    out = np.empty_like(z)
    small = _use_series(nu, z)
    if np.any(small):
        zs = z[small]
        with np.errstate(divide="ignore", invalid="ignore"):
            # log form: halving a subnormal z underflows to zero
            scale = np.where(zs > 0, np.exp(nu * (np.log(zs) - np.log(2.0))), 1.0 if nu == 0 else 0.0)
        out[small] = _series_scaled(nu, zs) * scale
    large = _use_hankel(nu, z) & ~small
    if np.any(large):
        out[large] = _hankel(nu, z[large])
    mid = ~small & ~large
    if np.any(mid):
        out[mid] = _miller(nu, z[mid])
    return float(out[0]) if scalar else out


def bessel_j_scaled(nu, z):
    """J_nu(z) / (z/2)^nu, finite at z = 0 where it equals 1/Gamma(nu+1)."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(_check_range(nu, z)).astype(float)
    out = np.empty_like(z)
    small = _use_series(nu, z)
    if np.any(small):
        out[small] = _series_scaled(nu, z[small])
    if np.any(~small):
        zb = z[~small]
        vals = np.empty_like(zb)
        large = _use_hankel(nu, zb)
        if np.any(large):
            vals[large] = _hankel(nu, zb[large])
        if np.any(~large):
            vals[~large] = _miller(nu, zb[~large])
        out[~small] = vals / (0.5 * zb) ** nu
    return float(out[0]) if scalar else out


def _bessel_jprime(nu, z):
    return (nu / z) * bessel_j(nu, z) - bessel_j(nu + 1.0, z)


def _refine_zeros(nu, lo, hi):
    # Vectorised bisection on all brackets, then Newton polish.
    flo = bessel_j(nu, lo)
    for _ in range(22):
        mid = 0.5 * (lo + hi)
        fm = bessel_j(nu, mid)
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    z = 0.5 * (lo + hi)
    for _ in range(6):
        step = bessel_j(nu, z) / _bessel_jprime(nu, z)
        z_new = z - step
        ok = (z_new >= lo - 1e-6) & (z_new <= hi + 1e-6)
        z = np.where(ok, z_new, z)
        if np.all(np.abs(step) < 1e-15 * z):
            break
    return z


@lru_cache(maxsize=256)
def _zeros_cached(nu, count):
    # Scan in steps of pi/8 (consecutive zeros are about pi apart), then
    # refine every bracket at once.
    step = pi / 8.0
    z_end = (count + 0.5 * nu - 0.25) * pi + nu + 10.0
    z0 = 1e-3
    lo, hi = [], []
    while len(lo) < count:
        if z0 > Z_MAX:
            raise RangeError("zero search left the working range")
        grid = np.arange(z0, min(z_end, Z_MAX) + step, step)
        grid = grid[grid <= Z_MAX]
        vals = bessel_j(nu, grid)
        idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        lo.extend(grid[idx])
        hi.extend(grid[idx + 1])
        z0 = grid[-1]
        z_end = z0 + (count - len(lo)) * pi + 10.0
    zeros = _refine_zeros(nu, np.array(lo[:count]), np.array(hi[:count]))
    return tuple(float(z) for z in zeros)


def bessel_zeros(nu, count):
    """First `count` positive zeros of J_nu, strictly increasing."""
    if count < 1:
        raise DomainError("count must be >= 1")
    _check_range(nu, 0.0)
    return np.array(_zeros_cached(float(nu), int(count)))


def bessel_zero(nu, b):
    """The b-th positive zero j_{nu,b} of J_nu (b >= 1)."""
    if int(b) != b or b < 1:
        raise DomainError("zero index must be an integer >= 1")
    return float(bessel_zeros(nu, int(b))[-1])


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule on (0, 1) for the measure x^p (1-x)^q dx."""

    nodes: np.ndarray
    weights: np.ndarray
    weight_exponents: tuple

    def integrate(self, values):
        return np.tensordot(self.weights, values, axes=(0, 0))

    def rows(self):
        return [(i, x, w) for i, (x, w) in enumerate(zip(self.nodes, self.weights))]


def jacobi_recurrence(n, p, q):
    """Monic recurrence coefficients (alpha_k, beta_k), k < n, on [0, 1].

    beta_0 holds the total mass B(p+1, q+1) of the measure.
    """
    if p <= -1 or q <= -1:
        raise DomainError(f"non-integrable exponents p={p}, q={q}")
    a, b = float(q), float(p)
    k = np.arange(n, dtype=float)
    s = 2.0 * k + a + b
    alpha = np.empty(n)
    alpha[0] = (b - a) / (a + b + 2.0)
    if n > 1:
        alpha[1:] = (b * b - a * a) / (s[1:] * (s[1:] + 2.0))
    beta = np.empty(n)
    beta[0] = np.exp(betaln(p + 1.0, q + 1.0))
    if n > 1:
        beta[1] = 4.0 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
    if n > 2:
        kk = k[2:]
        ss = s[2:]
        beta[2:] = 4.0 * kk * (kk + a) * (kk + b) * (kk + a + b) / (ss**2 * (ss + 1.0) * (ss - 1.0))
    alpha_x = 0.5 * (1.0 + alpha)
    beta_x = beta.copy()
    beta_x[1:] = 0.25 * beta[1:]
    return alpha_x, beta_x


@lru_cache(maxsize=128)
def _gauss_jacobi_cached(n, p, q):
    alpha, beta = jacobi_recurrence(n, p, q)
    if n == 1:
        nodes = alpha.copy()
        vecs = np.ones((1, 1))
    else:
        nodes, vecs = eigh_tridiagonal(alpha, np.sqrt(beta[1:n]))
    weights = beta[0] * vecs[0, :] ** 2
    order = np.argsort(nodes)
    return nodes[order], weights[order]


def gauss_jacobi_rule(n, p, q):
    """n-point Gauss rule for x^p (1-x)^q dx on (0, 1) via Golub-Welsch."""
    if int(n) != n or n < 1:
        raise DomainError("node count must be a positive integer")
    if p <= -1 or q <= -1:
        raise DomainError(f"non-integrable exponents p={p}, q={q}")
    nodes, weights = _gauss_jacobi_cached(int(n), float(p), float(q))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, (float(p), float(q)))


@lru_cache(maxsize=64)
def _legendre_cached(n):
    t, w = np.polynomial.legendre.leggauss(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def gauss_legendre_rule(n, a=0.0, b=1.0):
    """n-point Gauss-Legendre nodes and weights on [a, b]."""
    t, w = _legendre_cached(int(n))
    half = 0.5 * (b - a)
    return a + half * (t + 1.0), half * w


def orthonormal_jacobi(n, p, q, x, deriv=0):
    """Values of the first n orthonormal polynomials for x^p (1-x)^q dx.

    Returns an array of shape (deriv+1, len(x), n): derivative order,
    point, degree.
    """
    alpha, beta = jacobi_recurrence(max(n, 1) + 1, p, q)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sb = np.sqrt(beta)
    out = np.zeros((deriv + 1, x.size, n))
    prev = [np.zeros_like(x) for _ in range(deriv + 1)]
    cur = [np.full_like(x, 1.0 / np.sqrt(beta[0]))] + [np.zeros_like(x) for _ in range(deriv)]
    for k in range(n):
        for d in range(deriv + 1):
            out[d, :, k] = cur[d]
        if k == n - 1:
            break
        nxt = []
        for d in range(deriv + 1):
            val = (x - alpha[k]) * cur[d] - (sb[k] if k > 0 else 0.0) * prev[d]
            if d > 0:
                val = val + d * cur[d - 1]
            nxt.append(val / sb[k + 1])
        prev, cur = cur, nxt
    return out


@dataclass(frozen=True)
class BesselBasis:
    """Dirichlet eigenbasis of -(X d^2/dX^2 + (N/2) d/dX) on [0, 1].

    psi_b(X) = J_nu(j_b sqrt X) X^(-nu/2) / |J_{nu+1}(j_b)|, nu = N/2 - 1,
    orthonormal in L^2(X^nu dX) with eigenvalue mu_b = (j_b/2)^2.
    """

    N: float
    nu: float
    zeros: np.ndarray
    eigenvalues: np.ndarray
    norms: np.ndarray

    @property
    def size(self):
        return len(self.zeros)

    def evaluate(self, X, modes=None):
        """Matrix of psi_b(X_i); shape (len(X), B)."""
        X = np.atleast_1d(np.asarray(X, dtype=float))
        if np.any(X < 0) or np.any(X > 1):
            raise DomainError("Bessel basis is defined on [0, 1]")
        zs = self.zeros if modes is None else self.zeros[:modes]
        cs = self.norms if modes is None else self.norms[:modes]
        arg = np.sqrt(X)[:, None] * zs[None, :]
        vals = bessel_j_scaled(self.nu, arg.ravel()).reshape(arg.shape)
        return vals * cs[None, :]

    def derivative(self, X, order=1, modes=None):
        """Matrix of d^k psi_b / dX^k at X, from d/dX f_nu = -(j^2/4) f_(nu+1)."""
        X = np.atleast_1d(np.asarray(X, dtype=float))
        if np.any(X < 0) or np.any(X > 1):
            raise DomainError("Bessel basis is defined on [0, 1]")
        zs = self.zeros if modes is None else self.zeros[:modes]
        cs = self.norms if modes is None else self.norms[:modes]
        arg = np.sqrt(X)[:, None] * zs[None, :]
        vals = bessel_j_scaled(self.nu + order, arg.ravel()).reshape(arg.shape)
        return vals * (cs * (-0.25 * zs**2) ** order)[None, :]

    def laplacian(self, X, modes=None):
        """(X d^2/dX^2 + (N/2) d/dX) psi_b evaluated from the derivative formula."""
        X = np.atleast_1d(np.asarray(X, dtype=float))
        return X[:, None] * self.derivative(X, 2, modes) + 0.5 * self.N * self.derivative(X, 1, modes)

    def rows(self):
        return [(b + 1, z, m) for b, (z, m) in enumerate(zip(self.zeros, self.eigenvalues))]


def space_basis(N, B):
    """Bessel eigenbasis with order N/2 - 1 and B modes.

    N/2 must not be an integer (the excluded integer-index case).
    """
    if N <= 4:
        raise PreconditionError("space basis requires N > 4")
    if float(N / 2).is_integer():
        raise PreconditionError(f"N/2 = {N / 2} is an integer; integer-index case is excluded")
    if int(B) != B or B < 1:
        raise DomainError("mode count must be a positive integer")
    nu = N / 2.0 - 1.0
    zeros = bessel_zeros(nu, int(B))
    jn1 = np.abs(bessel_j(nu + 1.0, zeros))
    norms = (0.5 * zeros) ** nu / jn1
    return BesselBasis(float(N), nu, zeros, 0.25 * zeros**2, norms)


@dataclass(frozen=True)
class TimeBasis:
    """Odd Dirichlet sine modes phi_a(t) = sin(a pi t / 2T) / sqrt(2T) on (-2T, 2T)."""

    T: float
    count: int

    @property
    def eigenvalues(self):
        a = np.arange(1, self.count + 1)
        return (a * pi / (2.0 * self.T)) ** 2

    def evaluate(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        a = np.arange(1, self.count + 1)
        return np.sin(np.outer(t, a) * pi / (2.0 * self.T)) / np.sqrt(2.0 * self.T)

    def rows(self):
        return [(a + 1, 0.0, lam) for a, lam in enumerate(self.eigenvalues)]


def time_basis(T, count):
    if T <= 0:
        raise DomainError("half-period T must be positive")
    if int(count) != count or count < 1:
        raise DomainError("mode count must be a positive integer")
    return TimeBasis(float(T), int(count))
