"""Chart decomposition, the weighted differential operators of the two
boundary charts and the hierarchy of weighted norms built on them.

Functions live on the chart coordinate X in [0, 1] (X = x for the left
chart, X = 1 - x for the right chart).  A `GridFunction` is stored piecewise
on the cutoff breakpoints as a finite sum of terms X^s g(X) with g a
Chebyshev series on the piece, so the operators below act exactly on
polynomials, on cutoff products and on the fractional powers X^s that the
boundary expansions produce.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.special import betainc

from .errors import DomainError, PreconditionError, ResolutionError
from .specfun_basis import gauss_jacobi_rule, gauss_legendre_rule

__all__ = [
    "BREAKS",
    "CUTOFF_ORDER",
    "Chart",
    "CutoffPair",
    "GridFunction",
    "PairField",
    "apply_D",
    "apply_Dcheck",
    "apply_Ddot",
    "apply_laplacian",
    "cutoffs",
    "chi",
    "omega",
    "norm_k",
    "norm_star",
    "ladder",
    "pair_norm_k",
    "s_N",
    "smoothstep",
    "split",
]

# Smoothness of the cutoffs: omega and chi are C^CUTOFF_ORDER, so every
# ladder term with l <= CUTOFF_ORDER + 1 is computed without distributional
# contributions at the breakpoints.
CUTOFF_ORDER = 20
BREAKS = (0.0, 1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0, 5.0 / 6.0, 1.0)
_NPIECES = len(BREAKS) - 1
_SKEY = 10  # decimals used to key fractional exponents


def s_N(N):
    """Sobolev index [N/2] + 1."""
    return int(np.floor(N / 2.0)) + 1


def smoothstep(s):
    """Polynomial step S(s) of degree 2K+1: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    k = CUTOFF_ORDER + 1
    return betainc(k, k, s)


def omega(x):
    """Left cutoff: 1 on [0, 1/3], 0 on [2/3, 1], strictly between inside."""
    x = np.asarray(x, dtype=float)
    return 1.0 - smoothstep(3.0 * x - 1.0)


def chi(x):
    """Plateau cutoff: 0 off [1/6, 5/6], 1 on [1/3, 2/3]."""
    x = np.asarray(x, dtype=float)
    return smoothstep(6.0 * x - 1.0) * smoothstep(5.0 - 6.0 * x)


@dataclass(frozen=True)
class CutoffPair:
    omega: object
    chi: object
    order: int


def cutoffs():
    return CutoffPair(omega, chi, CUTOFF_ORDER)


@dataclass(frozen=True)
class Chart:
    """tag 0: X = x, weight X^(3/2); tag 1: X = 1 - x, weight X^(N/2 - 1)."""

    tag: int
    N: float

    def __post_init__(self):
        if self.tag not in (0, 1):
            raise DomainError("chart tag must be 0 or 1")

    @property
    def c(self):
        # first-order coefficient of the chart Laplacian X D^2 + c D
        return 2.5 if self.tag == 0 else self.N / 2.0

    @property
    def p(self):
        return self.c - 1.0

    def to_chart(self, x):
        x = np.asarray(x, dtype=float)
        return x if self.tag == 0 else 1.0 - x


def _key(s):
    return round(float(s), _SKEY)


def _piece_map(i):
    a, b = BREAKS[i], BREAKS[i + 1]
    return a, b, 0.5 * (a + b), 0.5 * (b - a)


def _cheb_trim(c):
    c = np.asarray(c, dtype=float)
    if c.size == 0:
        return np.zeros(1)
    return c


def _cheb_mulX(c, i):
    _, _, mid, half = _piece_map(i)
    # chebmulx trims trailing zeros, so pad to the full length
    out = np.zeros(len(c) + 1)
    r = C.chebmulx(c)
    out[: len(r)] = half * r
    out[: len(c)] += mid * c
    return out


def _cheb_der(c, i):
    _, _, _, half = _piece_map(i)
    if len(c) == 1:
        return np.zeros(1)
    return C.chebder(c) / half


def _cheb_add(a, b):
    n = max(len(a), len(b))
    out = np.zeros(n)
    out[: len(a)] += a
    out[: len(b)] += b
    return out


def _interp_piece(func, i, degree):
    _, _, mid, half = _piece_map(i)
    return C.chebinterpolate(lambda t: func(mid + half * t), int(degree))


@dataclass(frozen=True)
class GridFunction:
    """Function on a chart, piecewise sum of X^s g_s(X) on the breakpoints.

    `pieces[i]` maps the exponent key s to the Chebyshev coefficients of g_s
    on [BREAKS[i], BREAKS[i+1]]; an empty mapping means the function
    vanishes on that piece.
    """

    chart: Chart
    pieces: tuple
    warnings: tuple = field(default=())

    # construction --------------------------------------------------------
    @classmethod
    def zero(cls, chart):
        return cls(chart, tuple({} for _ in range(_NPIECES)))

    @classmethod
    def from_callable(cls, func, chart, degree=48, support=(0.0, 1.0)):
        """Chebyshev interpolation of func(X) on every piece inside support."""
        pieces = []
        for i in range(_NPIECES):
            a, b = BREAKS[i], BREAKS[i + 1]
            if b <= support[0] + 1e-15 or a >= support[1] - 1e-15:
                pieces.append({})
            else:
                pieces.append({0.0: _interp_piece(func, i, degree)})
        return cls(chart, tuple(pieces))

    @classmethod
    def from_polynomial(cls, poly, chart):
        """Exact representation of a numpy Polynomial in the chart coordinate."""
        deg = max(poly.degree(), 0)
        return cls.from_callable(poly, chart, degree=deg)

    @classmethod
    def power(cls, s, chart):
        """X^s on the whole chart."""
        return cls(chart, tuple({_key(s): np.ones(1)} for _ in range(_NPIECES)))

    @classmethod
    def constant(cls, value, chart):
        return cls(chart, tuple({0.0: np.array([float(value)])} for _ in range(_NPIECES)))

    # algebra -------------------------------------------------------------
    def _map_terms(self, fn):
        out = []
        for i, terms in enumerate(self.pieces):
            new = {}
            for s, g in terms.items():
                for s2, g2 in fn(i, s, g):
                    k = _key(s2)
                    new[k] = _cheb_add(new[k], g2) if k in new else g2
            out.append(new)
        return GridFunction(self.chart, tuple(out), self.warnings)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = GridFunction.constant(other, self.chart)
        self._check_chart(other)
        out = []
        for ta, tb in zip(self.pieces, other.pieces):
            new = dict(ta)
            for s, g in tb.items():
                new[s] = _cheb_add(new[s], g) if s in new else g
            out.append(new)
        return GridFunction(self.chart, tuple(out), self.warnings + other.warnings)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return self._map_terms(lambda i, s, g: [(s, g * float(other))])
        self._check_chart(other)
        out = []
        for ta, tb in zip(self.pieces, other.pieces):
            new = {}
            for sa, ga in ta.items():
                for sb, gb in tb.items():
                    k = _key(sa + sb)
                    prod = C.chebmul(ga, gb)
                    new[k] = _cheb_add(new[k], prod) if k in new else prod
            out.append(new)
        return GridFunction(self.chart, tuple(out), self.warnings + other.warnings)

    __rmul__ = __mul__

    def _check_chart(self, other):
        if other.chart != self.chart:
            raise DomainError("functions live on different charts")

    def times_power(self, s):
        """Multiply by X^s (s may be negative)."""
        return self._map_terms(lambda i, s0, g: [(s0 + s, g)])

    def restrict_support(self, lo, hi):
        """Zero out the pieces lying outside [lo, hi]."""
        out = []
        for i, terms in enumerate(self.pieces):
            a, b = BREAKS[i], BREAKS[i + 1]
            out.append({} if (b <= lo + 1e-15 or a >= hi - 1e-15) else dict(terms))
        return GridFunction(self.chart, tuple(out), self.warnings)

    # calculus ------------------------------------------------------------
    def D(self):
        """d/dX."""

        def rule(i, s, g):
            dg = _cheb_der(g, i)
            if s == 0.0:
                return [(0.0, dg)]
            return [(s - 1.0, _cheb_add(s * g, _cheb_mulX(dg, i)))]

        return self._map_terms(rule)

    def laplacian(self):
        """X d^2/dX^2 + c d/dX."""
        c = self.chart.c

        def rule(i, s, g):
            dg = _cheb_der(g, i)
            d2g = _cheb_der(dg, i)
            if s == 0.0:
                return [(0.0, _cheb_add(c * dg, _cheb_mulX(d2g, i)))]
            t0 = (s * (s - 1.0) + c * s) * g
            t1 = (2.0 * s + c) * _cheb_mulX(dg, i)
            t2 = _cheb_mulX(_cheb_mulX(d2g, i), i)
            return [(s - 1.0, _cheb_add(_cheb_add(t0, t1), t2))]

        return self._map_terms(rule)

    def ddot(self):
        """sqrt(X) d/dX."""

        def rule(i, s, g):
            dg = _cheb_der(g, i)
            if s == 0.0:
                return [(0.5, dg)]
            return [(s - 0.5, _cheb_add(s * g, _cheb_mulX(dg, i)))]

        return self._map_terms(rule)

    def dcheck(self):
        """X d/dX."""

        def rule(i, s, g):
            dg = _cheb_der(g, i)
            return [(s, _cheb_add(s * g, _cheb_mulX(dg, i)))]

        return self._map_terms(rule)

    # evaluation ----------------------------------------------------------
    def __call__(self, X):
        X = np.atleast_1d(np.asarray(X, dtype=float))
        out = np.zeros_like(X)
        idx = np.clip(np.searchsorted(BREAKS, X, side="right") - 1, 0, _NPIECES - 1)
        for i, terms in enumerate(self.pieces):
            sel = idx == i
            if not np.any(sel) or not terms:
                continue
            _, _, mid, half = _piece_map(i)
            xs = X[sel]
            t = (xs - mid) / half
            val = np.zeros_like(xs)
            for s, g in terms.items():
                with np.errstate(divide="ignore", invalid="ignore"):
                    fac = np.ones_like(xs) if s == 0.0 else xs**s
                val = val + fac * C.chebval(t, g)
            out[sel] = val
        return out

    def nodal(self, rule):
        """Values at the nodes of a QuadratureRule (chart coordinate)."""
        return self(rule.nodes)

    @property
    def resolution(self):
        return max((len(g) for terms in self.pieces for g in terms.values()), default=1)

    @property
    def exponents(self):
        return sorted({s for terms in self.pieces for s in terms})

    # norms ---------------------------------------------------------------
    def inner(self, other, extra_power=0.0):
        """Weighted inner product int f g X^(p + extra) dX over [0, 1]."""
        self._check_chart(other)
        p = self.chart.p + extra_power
        total = 0.0
        for i, (ta, tb) in enumerate(zip(self.pieces, other.pieces)):
            for sa, ga in ta.items():
                for sb, gb in tb.items():
                    total += _piece_integral(i, sa + sb + p, C.chebmul(ga, gb))
        return total

    def norm(self):
        """||u||_[mu] = (int |u|^2 X^p dX)^(1/2)."""
        val = self.inner(self)
        if not np.isfinite(val):
            return np.inf
        return float(np.sqrt(max(val, 0.0)))

    def lp_norm(self, p_exp, samples=None):
        """(int |u|^p X^(chart p) dX)^(1/p) by piecewise Gauss quadrature."""
        if p_exp == np.inf:
            return self.sup_norm()
        total = 0.0
        pw = self.chart.p
        for i, terms in enumerate(self.pieces):
            if not terms:
                continue
            a, b, _, _ = _piece_map(i)
            deg = max(len(g) for g in terms.values())
            n = int(deg * max(p_exp, 2.0) / 2.0) + 40
            if a == 0.0:
                smin = min(terms)
                rule = gauss_jacobi_rule(n, pw + p_exp * smin, 0.0)
                X = b * rule.nodes
                vals = self(X) * X ** (-smin)
                total += b ** (pw + p_exp * smin + 1.0) * np.sum(rule.weights * np.abs(vals) ** p_exp)
            else:
                X, w = gauss_legendre_rule(n, a, b)
                total += np.sum(w * X**pw * np.abs(self(X)) ** p_exp)
        return float(total ** (1.0 / p_exp))

    def sup_norm(self, samples=4001):
        X = np.linspace(0.0, 1.0, samples)
        X = np.concatenate([X, np.array(BREAKS)])
        if any(s < 0 for s in self.exponents):
            X = X[X > 0]
        return float(np.max(np.abs(self(X))))


def _piece_integral(i, e, g):
    """int_piece X^e g(X) dX with g a Chebyshev series on the piece."""
    a, b, mid, half = _piece_map(i)
    n = len(g) // 2 + 2
    if a == 0.0:
        if e <= -1.0 + 1e-12:
            return np.inf if np.any(np.abs(g) > 0) else 0.0
        rule = gauss_jacobi_rule(n, e, 0.0)
        X = b * rule.nodes
        return b ** (e + 1.0) * float(np.dot(rule.weights, C.chebval((X - mid) / half, g)))
    X, w = gauss_legendre_rule(n + 24, a, b)
    return float(np.dot(w, X**e * C.chebval((X - mid) / half, g)))


# ----------------------------------------------------------------------------
# global functions, split and chart operators
# ----------------------------------------------------------------------------

def _as_global(u, N):
    if isinstance(u, GridFunction):
        if u.chart.tag != 0:
            raise DomainError("global functions use the x coordinate (chart tag 0)")
        return u
    if callable(u):
        return GridFunction.from_callable(u, Chart(0, N))
    return GridFunction.constant(float(u), Chart(0, N))


@lru_cache(maxsize=8)
def _omega_functions(N):
    deg = 2 * CUTOFF_ORDER + 1
    w0 = GridFunction.from_callable(omega, Chart(0, N), degree=deg)
    w1 = GridFunction.from_callable(lambda X: 1.0 - omega(1.0 - X), Chart(1, N), degree=deg)
    return w0, w1


def reflect(u, N=None):
    """Re-express a function of x as a function of X = 1 - x (and back)."""
    N = u.chart.N if N is None else N
    target = Chart(1 - u.chart.tag, N)
    out = []
    for i in range(_NPIECES):
        j = _NPIECES - 1 - i
        terms = u.pieces[j]
        new = {}
        for s, g in terms.items():
            if s != 0.0:
                raise DomainError("only polynomial-type terms can be reflected exactly")
            sign = (-1.0) ** np.arange(len(g))
            new[0.0] = g * sign
        out.append(new)
    return GridFunction(target, tuple(out))


def split(u, N=None):
    """(u^[0], u^[1]) = (omega u, (1 - omega) u), the second in X = 1 - x."""
    if N is None:
        if not isinstance(u, GridFunction):
            raise DomainError("N is required for non-GridFunction input")
        N = u.chart.N
    u = _as_global(u, N)
    w0, w1 = _omega_functions(float(N))
    left = (u * w0).restrict_support(0.0, 2.0 / 3.0)
    right_global = u * (GridFunction.constant(1.0, u.chart) - w0)
    right = reflect(right_global.restrict_support(1.0 / 3.0, 1.0), N)
    return left, right


def apply_laplacian(u):
    """Chart Laplacian X D^2 + c D (c = 5/2 on the left, N/2 on the right)."""
    return u.laplacian()


def apply_Ddot(u):
    """sqrt(X) d/dX in the chart coordinate."""
    return u.ddot()


def apply_D(u):
    return u.D()


def apply_Dcheck(u):
    """x(1 - x) d/dx on a global function (chart tag 0, coordinate x)."""
    x = GridFunction.from_polynomial(np.polynomial.Polynomial([0.0, 1.0, -1.0]), u.chart)
    return x * u.D()


def ladder(u, ell):
    """Operator of the ladder index: Laplacian^m or Ddot Laplacian^m."""
    m, odd = divmod(int(ell), 2)
    out = u
    for _ in range(m):
        out = out.laplacian()
    return out.ddot() if odd else out


def ladder_norms(u, kmax):
    """[<u>_0, ..., <u>_kmax]."""
    vals = []
    cur = u
    for m in range(kmax // 2 + 1):
        if 2 * m <= kmax:
            vals.append(cur.norm())
        if 2 * m + 1 <= kmax:
            vals.append(cur.ddot().norm())
        cur = cur.laplacian()
    return vals[: kmax + 1]


def norm_k(u, k):
    """||u||_[mu]k = (sum_{l <= k} <u>_l^2)^(1/2)."""
    if k < 0:
        raise DomainError("norm index must be >= 0")
    if k > CUTOFF_ORDER + 1:
        raise ResolutionError(f"ladder index {k} exceeds cutoff smoothness {CUTOFF_ORDER + 1}")
    vals = np.array(ladder_norms(u, k))
    return float(np.sqrt(np.sum(vals**2)))


def norm_star(u, kappa):
    """(sum_{m <= kappa} ||Laplacian^m u||^2)^(1/2)."""
    total = 0.0
    cur = u
    for _ in range(kappa + 1):
        total += cur.norm() ** 2
        cur = cur.laplacian()
    return float(np.sqrt(total))


def global_norm_k(u, k, N=None):
    """||u||_k = (||u^[0]||_[0]k^2 + ||u^[1]||_[1]k^2)^(1/2)."""
    u0, u1 = split(u, N)
    return float(np.hypot(norm_k(u0, k), norm_k(u1, k)))


def pair_norm_k(y, v, k):
    """||(y, v)||_k with the first component measured one order higher."""
    return float(np.hypot(norm_k(y, k + 1), norm_k(v, k)))


@dataclass(frozen=True)
class PairField:
    """Time-sampled pair (y, v) of coefficient arrays in a `JacobiSpace`.

    y and v have shape (len(t), M); t is a uniform grid on [0, T].
    """

    space: object
    t: np.ndarray
    y: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.y.shape != self.v.shape or self.y.shape[0] != len(self.t):
            raise DomainError("pair components must share the time grid and resolution")

    @property
    def T(self):
        return float(self.t[-1])

    @property
    def dt(self):
        return float(self.t[1] - self.t[0])

    def __add__(self, other):
        return PairField(self.space, self.t, self.y + other.y, self.v + other.v)

    def __sub__(self, other):
        return PairField(self.space, self.t, self.y - other.y, self.v - other.v)

    def scale(self, a):
        return PairField(self.space, self.t, a * self.y, a * self.v)

    __rmul__ = scale

    def components(self):
        return self.y, self.v

    @classmethod
    def zeros_like(cls, other):
        return cls(other.space, other.t, np.zeros_like(other.y), np.zeros_like(other.v))


def binomial_leibniz(j):
    """Binomial coefficients used by the commutator with d^j/dt^j."""
    return [comb(j, a) for a in range(j + 1)]


def falling(n, k):
    return factorial(n) // factorial(n - k) if k <= n else 0


# ----------------------------------------------------------------------------
# time-sampled fields: derivatives in t and the time-dependent norm families
# ----------------------------------------------------------------------------

TIME_ACCURACY = 6


def fd_weights(order, offsets):
    """Finite-difference weights for d^order/dt^order at 0 on the given
    stencil offsets (units of the grid step), by Fornberg's recursion."""
    z = np.asarray(offsets, dtype=float)
    n = len(z)
    if order >= n:
        raise ResolutionError("stencil too short for the derivative order")
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, z[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, z[i]
        for j in range(i):
            c3 = z[i] - z[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


@lru_cache(maxsize=128)
def _derivative_matrix(n, order, accuracy):
    width = order + accuracy - (1 if order % 2 == 0 else 0)
    width = max(width, order + 1)
    if width > n:
        raise ResolutionError(
            f"time grid with {n} samples cannot resolve d^{order}/dt^{order} at accuracy {accuracy}"
        )
    Dm = np.zeros((n, n))
    half = width // 2
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        offs = np.arange(lo, lo + width) - i
        Dm[i, lo : lo + width] = fd_weights(order, offs)
    Dm.setflags(write=False)
    return Dm


def time_derivative(samples, dt, order, accuracy=TIME_ACCURACY):
    """d^order/dt^order along axis 0 of uniformly sampled data."""
    samples = np.asarray(samples, dtype=float)
    if order == 0:
        return samples
    Dm = _derivative_matrix(samples.shape[0], int(order), int(accuracy))
    return np.tensordot(Dm, samples, axes=(1, 0)) / dt**order


def _time_integral(values, t):
    from scipy.integrate import simpson

    return float(simpson(values, x=t))


def _chart_norm_series(space, C, tag, k):
    """||u^[tag](t)||_[tag]k for coefficient rows C[t, :]."""
    total = np.zeros(C.shape[0])
    for ell in range(k + 1):
        total += space.ladder_values(C, tag, ell) ** 2
    return np.sqrt(total)


def _star_series_sq(space, C, tag, kappa):
    total = np.zeros(C.shape[0])
    for m in range(kappa + 1):
        total += space.ladder_values(C, tag, 2 * m) ** 2
    return total


def field_norm_k(field, k, tag=None):
    """||u(t)||_k for every sample time; the y component carries index k+1.

    tag selects one chart; None combines both charts in quadrature.
    """
    tags = (0, 1) if tag is None else (tag,)
    sq = np.zeros(len(field.t))
    for mu in tags:
        sq += _chart_norm_series(field.space, field.y, mu, k + 1) ** 2
        sq += _chart_norm_series(field.space, field.v, mu, k) ** 2
    return np.sqrt(sq)


def _derivative_field(field, j):
    y = time_derivative(field.y, field.dt, j)
    v = time_derivative(field.v, field.dt, j)
    return PairField(field.space, field.t, y, v)


def sup_norm_tau_n(field, tau, n):
    """|u;tau,n|| = (sum_mu (sup_{t<=tau} sum_{j+k<=n} ||d_t^j u||_[mu]k)^2)^(1/2)."""
    sel = field.t <= tau + 1e-12
    total = 0.0
    derivs = [_derivative_field(field, j) for j in range(n + 1)]
    for mu in (0, 1):
        acc = np.zeros(len(field.t))
        for j in range(n + 1):
            for k in range(n - j + 1):
                acc += field_norm_k(derivs[j], k, mu)
        total += np.max(acc[sel]) ** 2
    return float(np.sqrt(total))


def integral_norm(field, n):
    """|||u|||_n = (sum_mu sum_{j+k<=n} int_0^T ||d_t^j u||_[mu]k^2 dt)^(1/2)."""
    total = 0.0
    for j in range(n + 1):
        dj = _derivative_field(field, j)
        for mu in (0, 1):
            for k in range(n - j + 1):
                total += _time_integral(field_norm_k(dj, k, mu) ** 2, field.t)
    return float(np.sqrt(total))


def scalar_norm2_nu(space, t, C, nu):
    """||u||^(2)_nu of one time-sampled component with coefficients C[t, :]."""
    dt = float(t[1] - t[0])
    total = 0.0
    for iota in range(nu + 1):
        # (-d_t^2)^iota
        Ci = time_derivative(C, dt, 2 * iota) * (-1.0) ** iota
        for kappa in range(nu - iota + 1):
            sq = _star_series_sq(space, Ci, 0, kappa) + _star_series_sq(space, Ci, 1, kappa)
            total += _time_integral(sq, t)
    return float(np.sqrt(total))


def norm2_nu(field, nu):
    """||u||^(2)_nu = ((||y||^(2)_nu)^2 + (||v||^(2)_nu)^2)^(1/2)."""
    if nu < 0:
        raise DomainError("nu must be >= 0")
    y = scalar_norm2_nu(field.space, field.t, field.y, nu)
    v = scalar_norm2_nu(field.space, field.t, field.v, nu)
    return float(np.hypot(y, v))
