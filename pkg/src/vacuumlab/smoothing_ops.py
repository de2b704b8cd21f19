"""Spectral smoothing operators on time-dependent chart fields.

A chart component u(t, X) on [0, T] is extended to (-2T, 2T) (odd in t, with
a tapered reflection beyond T), expanded in the product basis
phi_a(t) psi_b(X) and truncated to a^2 <= theta, b^2 <= theta.  The time
modes are sines, so the extension must be odd about t = 0.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import DomainError, PreconditionError, RangeError
from .jacobi_space import jacobi_space
from .specfun_basis import gauss_jacobi_rule, gauss_legendre_rule, orthonormal_jacobi, space_basis, time_basis
from .weighted_calculus import PairField, norm2_nu, scalar_norm2_nu, split

__all__ = [
    "ExtendedField",
    "chart_basis",
    "extend",
    "proof_constant_check",
    "restrict",
    "single_mode_ratio",
    "slope_within",
    "smooth",
    "smooth_component",
    "verify_smoothing_estimates",
]

REFLECTION_TERMS = 8


def chart_basis(N, tag, B):
    """Bessel basis of the chart Laplacian: order 3/2 on the left chart
    (the N = 5 operator), order N/2 - 1 on the right chart."""
    return space_basis(5.0 if tag == 0 else float(N), int(B))


@dataclass(frozen=True)
class ExtendedField:
    """Coefficients c[a-1, b-1] of sum c_ab phi_a(t) psi_b(X) on (-2T, 2T)."""

    coeffs: np.ndarray
    tag: int
    N: float
    T: float

    @property
    def A_max(self):
        return self.coeffs.shape[0]

    @property
    def B_max(self):
        return self.coeffs.shape[1]

    @property
    def cap(self):
        return float(min(self.A_max, self.B_max) ** 2)

    @classmethod
    def from_mode(cls, a, b, A, B, tag=1, N=7.0, T=1.0, amplitude=1.0):
        c = np.zeros((A, B))
        c[a - 1, b - 1] = amplitude
        return cls(c, tag, float(N), float(T))

    def time_eigenvalues(self):
        return time_basis(self.T, self.A_max).eigenvalues

    def space_eigenvalues(self):
        return chart_basis(self.N, self.tag, self.B_max).eigenvalues

    def truncate(self, theta):
        """Coefficient-space S(theta): keep a^2 <= theta and b^2 <= theta."""
        if theta < 0:
            raise DomainError("theta must be >= 0")
        a = np.arange(1, self.A_max + 1)
        b = np.arange(1, self.B_max + 1)
        mask = (a[:, None] ** 2 <= theta) & (b[None, :] ** 2 <= theta)
        return ExtendedField(self.coeffs * mask, self.tag, self.N, self.T)

    def sharp_norm(self, nu):
        """(sum_{i+k<=nu} int ||(-d_t^2)^i Lap^k u||^2 dt)^(1/2) by Parseval."""
        lam = self.time_eigenvalues()
        mu = self.space_eigenvalues()
        weight = np.zeros((self.A_max, self.B_max))
        for i in range(nu + 1):
            for k in range(nu - i + 1):
                weight += np.outer(lam ** (2 * i), mu ** (2 * k))
        return float(np.sqrt(np.sum(weight * self.coeffs**2)))

    def padded(self, A, B):
        if A < self.A_max or B < self.B_max:
            raise DomainError("padding cannot reduce the resolution")
        c = np.zeros((A, B))
        c[: self.A_max, : self.B_max] = self.coeffs
        return ExtendedField(c, self.tag, self.N, self.T)

    def __sub__(self, other):
        return ExtendedField(self.coeffs - other.coeffs, self.tag, self.N, self.T)

    def evaluate(self, t, X):
        """Values on the tensor grid t x X."""
        Et = time_basis(self.T, self.A_max).evaluate(t)
        Ex = chart_basis(self.N, self.tag, self.B_max).evaluate(X)
        return Et @ self.coeffs @ Ex.T

    def rows(self):
        A, B = self.coeffs.shape
        return [(a + 1, b + 1, float(self.coeffs[a, b])) for a in range(A) for b in range(B)]


# ----------------------------------------------------------------------------
# time extension
# ----------------------------------------------------------------------------

def _reflection_coefficients(m=REFLECTION_TERMS):
    lam = 3.0 * np.arange(1, m + 1) / m
    V = np.vander(-lam, m, increasing=True).T
    return lam, np.linalg.solve(V, np.ones(m))


def _smooth_unit_step(u):
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f0 = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        f1 = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return f0 / (f0 + f1)


def taper(s, T):
    """1 on [0, T/6], 0 beyond T/3, C-infinity in between."""
    return 1.0 - _smooth_unit_step((np.asarray(s, dtype=float) - T / 6.0) / (T / 6.0))


def extension_values(t, samples, tt):
    """Values of the extension on (-2T, 2T) at times tt (for checks)."""
    T = float(t[-1])
    spl = make_interp_spline(t, samples, k=5)
    lam, alpha = _reflection_coefficients()
    tt = np.asarray(tt, dtype=float)
    sign = np.sign(tt)
    r = np.abs(tt)
    out = np.zeros((len(tt),) + np.shape(samples)[1:])
    inside = r <= T
    out[inside] = spl(r[inside])
    outside = (r > T) & (r < 4.0 * T / 3.0)
    s = r[outside] - T
    acc = 0.0
    for li, ai in zip(lam, alpha):
        acc = acc + ai * spl(T - li * s)
    tau = taper(s, T)
    out[outside] = (tau.reshape((-1,) + (1,) * (out.ndim - 1))) * acc
    return out * sign.reshape((-1,) + (1,) * (out.ndim - 1))


@lru_cache(maxsize=32)
def _time_analysis(n_samples, T, A):
    """Matrix W (A x n) with c_a = W @ samples for uniform samples on [0, T]."""
    t = np.linspace(0.0, T, n_samples)
    eye = np.eye(n_samples)
    spl = make_interp_spline(t, eye, k=5)
    n_fine = 8 * n_samples + 4 * A
    r, wr = gauss_legendre_rule(n_fine, 0.0, T)
    a = np.arange(1, A + 1)
    phi = lambda tt: np.sin(np.outer(tt, a) * np.pi / (2.0 * T)) / np.sqrt(2.0 * T)
    W = 2.0 * (phi(r) * wr[:, None]).T @ spl(r)
    s, ws = gauss_legendre_rule(n_fine, 0.0, T / 3.0)
    lam, alpha = _reflection_coefficients()
    refl = sum(ai * spl(T - li * s) for li, ai in zip(lam, alpha))
    refl = refl * taper(s, T)[:, None]
    W += 2.0 * (phi(T + s) * ws[:, None]).T @ refl
    W.setflags(write=False)
    return W


# ----------------------------------------------------------------------------
# space analysis and synthesis between the Jacobi space and a chart basis
# ----------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _space_analysis(N, M, tag, B):
    """R (B x M): Bessel coefficients of the chart part of each P_j."""
    space = jacobi_space(N, M)
    basis = chart_basis(N, tag, B)
    p = 1.5 if tag == 0 else N / 2.0 - 1.0
    n = M + 2 * B + 40
    rule = gauss_jacobi_rule(n, p, 0.0)
    X0, w0 = rule.nodes / 6.0, rule.weights * (1.0 / 6.0) ** (p + 1.0)
    X1, w1 = gauss_legendre_rule(n, 1.0 / 6.0, 1.0 / 3.0)
    X2, w2 = gauss_legendre_rule(n, 1.0 / 3.0, 2.0 / 3.0)
    X = np.concatenate([X0, X1, X2])
    w = np.concatenate([w0, w1 * X1**p, w2 * X2**p])
    cut = np.empty((X.size, M))
    for j in range(M):
        e = np.zeros(M)
        e[j] = 1.0
        cut[:, j] = split(space.gridfunction(e))[tag](X)
    R = (basis.evaluate(X) * w[:, None]).T @ cut
    R.setflags(write=False)
    return R


@lru_cache(maxsize=32)
def _space_synthesis(N, M, tag, B):
    """G (M x B): Jacobi projection of psi_b(X(x)) in the global weight."""
    rule = gauss_jacobi_rule(2 * M + 2 * B + 40, 1.5, N / 2.0 - 1.0)
    x, w = rule.nodes, rule.weights
    X = x if tag == 0 else 1.0 - x
    psi = chart_basis(N, tag, B).evaluate(X)
    V = orthonormal_jacobi(M, 1.5, N / 2.0 - 1.0, x)[0]
    G = (V * w[:, None]).T @ psi
    G.setflags(write=False)
    return G


def extend(space, t, C, tag, A=None, B=None):
    """ExtendedField of the chart part of a time-sampled Jacobi field.

    C has shape (len(t), M); t is uniform on [0, T] starting at 0.
    """
    t = np.asarray(t, dtype=float)
    if abs(t[0]) > 1e-14 or np.max(np.abs(np.diff(t) - (t[1] - t[0]))) > 1e-9 * t[-1]:
        raise PreconditionError("extension needs a uniform time grid starting at t = 0")
    if tag not in (0, 1):
        raise DomainError("chart tag must be 0 or 1")
    A = space.M if A is None else int(A)
    B = space.M if B is None else int(B)
    R = _space_analysis(space.N, space.M, tag, B)
    W = _time_analysis(len(t), float(t[-1]), A)
    coeffs = W @ (np.asarray(C) @ R.T)
    return ExtendedField(coeffs, tag, space.N, float(t[-1]))


def restrict(ext, space, t):
    """Jacobi coefficients on [0, T] of the (truncated) extension."""
    Et = time_basis(ext.T, ext.A_max).evaluate(t)
    G = _space_synthesis(space.N, space.M, ext.tag, ext.B_max)
    return Et @ ext.coeffs @ G.T


def smooth_component(space, t, C, theta, A=None, B=None):
    """S(theta) applied to one time-sampled component.

    For theta at or above the cap (min(A, B))^2 the operator is the
    identity: every mode the discretization carries is retained.
    """
    if theta < 0:
        raise DomainError("theta must be >= 0")
    A = space.M if A is None else int(A)
    B = space.M if B is None else int(B)
    if theta >= min(A, B) ** 2:
        return np.array(C, dtype=float, copy=True)
    out = np.zeros_like(np.asarray(C, dtype=float))
    for tag in (0, 1):
        ext = extend(space, t, C, tag, A, B).truncate(theta)
        out += restrict(ext, space, t)
    return out


def smooth(field, theta, A=None, B=None):
    """Pair smoothing: S(theta) applied to both components."""
    if isinstance(field, ExtendedField):
        return field.truncate(theta)
    y = smooth_component(field.space, field.t, field.y, theta, A, B)
    v = smooth_component(field.space, field.t, field.v, theta, A, B)
    return PairField(field.space, field.t, y, v)


# ----------------------------------------------------------------------------
# verification of the smoothing estimates
# ----------------------------------------------------------------------------

def single_mode_ratio(a, b, nu, nubar, theta, N=7.0, T=1.0, tag=1):
    """Closed form of the remainder ratio for a single mode (a, b).

    Zero when the mode is retained; otherwise
    theta^(nubar-nu) sqrt(sum_{i+k<=nu} lam^2i mu^2k / sum_{i+k<=nubar} ...).
    """
    if a * a <= theta and b * b <= theta:
        return 0.0
    lam = (a * np.pi / (2.0 * T)) ** 2
    mu = chart_basis(N, tag, b).eigenvalues[b - 1]
    low = sum(lam ** (2 * i) * mu ** (2 * k) for i in range(nu + 1) for k in range(nu - i + 1))
    high = sum(lam ** (2 * i) * mu ** (2 * k) for i in range(nubar + 1) for k in range(nubar - i + 1))
    return float(theta ** (nubar - nu) * np.sqrt(low / high))


def proof_constant_check(nu, nubar, samples=201):
    """Largest value of sum_{j+k=nubar} X^j Y^k / ((nubar-nu+1) sum_{j+k=nu} X^j Y^k)
    over 0 <= X, Y <= 1; the explicit constant is valid iff this is <= 1."""
    g = np.linspace(0.0, 1.0, samples)
    X, Y = np.meshgrid(g, g)
    hi = sum(X**j * Y ** (nubar - j) for j in range(nubar + 1))
    lo = sum(X**j * Y ** (nu - j) for j in range(nu + 1))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(lo > 0, hi / ((nubar - nu + 1) * lo), 0.0)
    return float(np.max(r))


def _random_field(rng, band, A, B, tag, N, T):
    a = np.arange(1, band + 1)
    c = rng.standard_normal((band, band)) / np.outer(a, a) ** 3
    return ExtendedField(c, tag, N, T).padded(A, B)


def _slope(thetas, values):
    return float(np.polyfit(np.log(thetas), np.log(values), 1)[0])


def verify_smoothing_estimates(nu, nubar, theta_grid=(4, 16, 64, 256), trials=20, N=7.0, T=1.0,
                               resolutions=(24, 32, 48), band=16, seed=0, tag=1):
    """Empirical constants of the two smoothing estimates and slope tests.

    Random fields have c_ab ~ (ab)^-3 on a fixed band and are analysed at
    each resolution (mode caps A = B = resolution).  Slope tests use a single
    mode sitting at the truncation boundary (a^2 = theta for the first
    estimate, a^2 just above theta for the second).
    """
    if not 0 <= nu <= nubar:
        raise DomainError("need 0 <= nu <= nubar")
    thetas = np.asarray(theta_grid, dtype=float)
    if np.any(thetas < 1):
        raise DomainError("theta grid must lie in [1, cap]")
    if np.any(thetas > min(resolutions) ** 2):
        raise RangeError("theta exceeds the resolution cap")
    rng = np.random.default_rng(seed)
    fields = [_random_field(rng, band, band, band, tag, N, T) for _ in range(trials)]
    sweep = []
    for res in resolutions:
        g11 = g12 = 0.0
        for f in fields:
            f = f.padded(res, res)
            n_lo, n_hi = f.sharp_norm(nu), f.sharp_norm(nubar)
            for th in thetas:
                s = f.truncate(th)
                g11 = max(g11, s.sharp_norm(nubar) / (th ** (nubar - nu) * n_lo))
                g12 = max(g12, (f - s).sharp_norm(nu) / (th ** (nu - nubar) * n_hi))
        sweep.append({"modes": int(res), "truncation": g11, "remainder": g12})
    c11 = np.array([s["truncation"] for s in sweep])
    c12 = np.array([s["remainder"] for s in sweep])
    drift11 = float((c11.max() - c11.min()) / c11.max()) if c11.max() > 0 else 0.0
    drift12 = float((c12.max() - c12.min()) / c12.max()) if c12.max() > 0 else 0.0

    res = max(resolutions)
    num11, num12 = [], []
    for th in thetas:
        a = int(round(np.sqrt(th)))
        m = ExtendedField.from_mode(a, 1, res, res, tag, N, T)
        m = ExtendedField(m.coeffs / m.sharp_norm(nu), tag, N, T)
        num11.append(m.truncate(th).sharp_norm(nubar))
        below = th * (1.0 - 1e-9)
        m2 = ExtendedField.from_mode(a, 1, res, res, tag, N, T)
        m2 = ExtendedField(m2.coeffs / m2.sharp_norm(nubar), tag, N, T)
        num12.append((m2 - m2.truncate(below)).sharp_norm(nu))
    slope11 = _slope(thetas, num11)
    slope12 = _slope(thetas, num12)
    return {
        "inequality_id": "smoothing",
        "parameters": {"nu": nu, "nubar": nubar, "theta_grid": list(map(float, thetas)), "N": N, "T": T,
                       "band": band, "seed": seed},
        "trials": trials,
        "worst_ratio": {"truncation": float(c11.max()), "remainder": float(c12.max())},
        "resolution_sweep": sweep,
        "drift": {"truncation": drift11, "remainder": drift12},
        "slopes": {"truncation": slope11, "remainder": slope12, "expected_truncation": float(nubar - nu),
                   "expected_remainder": float(nu - nubar)},
        "proof_constant": {"value": nubar - nu + 1, "max_normalized": proof_constant_check(nu, nubar)},
    }


def slope_within(report, rel=0.10, abs_tol=0.05):
    """True when both fitted slopes match their expected exponents."""
    ok = True
    for key in ("truncation", "remainder"):
        got = report["slopes"][key]
        want = report["slopes"]["expected_" + key]
        tol = max(rel * abs(want), abs_tol)
        ok &= abs(got - want) <= tol
    return bool(ok)


def verify_pair_smoothing(field, nu, nubar, thetas, A=None, B=None):
    """Ratios of the pair estimates for a time-sampled field:
    ||S u||_nubar / (theta^(nubar-nu) ||u||_nu) and
    ||(I - S) u||_nu / (theta^(nu-nubar) ||u||_nubar) in the (2)-norms."""
    n_lo, n_hi = norm2_nu(field, nu), norm2_nu(field, nubar)
    rows = []
    for th in thetas:
        s = smooth(field, th, A, B)
        r = field - s
        rows.append({
            "theta": float(th),
            "truncation": norm2_nu(s, nubar) / (th ** (nubar - nu) * n_lo),
            "remainder": norm2_nu(r, nu) / (th ** (nu - nubar) * n_hi),
        })
    return rows


def equivalence_ratio(space, t, C, tag, nu, A=None, B=None):
    """||ext u||^sharp_nu / ||u^[tag]||^(2)_nu for one chart component."""
    ext = extend(space, t, C, tag, A, B)
    sharp = ext.sharp_norm(nu)
    # the (2)-norm of the chart part only
    from .weighted_calculus import _star_series_sq, _time_integral, time_derivative

    dt = float(t[1] - t[0])
    total = 0.0
    for iota in range(nu + 1):
        Ci = time_derivative(C, dt, 2 * iota)
        for kappa in range(nu - iota + 1):
            total += _time_integral(_star_series_sq(space, Ci, tag, kappa), t)
    return float(sharp / np.sqrt(total))
