"""The degenerate operator

    Ly = -x(1-x) y'' - ((5/2)(1-x) - (N/2) x) y' + L1 y' + L0 y

on 0 < x < 1, its divergence form -(1/b)(a y')' + L0 y, the Liouville normal
form -eta'' + q(xi) eta on (-pi/2, pi/2) and its spectrum.
"""
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import eigh, eigh_tridiagonal

from .errors import ConvergenceError, DomainError, PreconditionError
from .jacobi_space import jacobi_space
from .specfun_basis import gauss_jacobi_rule, gauss_legendre_rule, orthonormal_jacobi
from .weighted_calculus import Chart, GridFunction, split

__all__ = [
    "EigenPair",
    "LiouvilleForm",
    "OperatorCoefficients",
    "apply_L",
    "build_coefficients",
    "chart_decomposition",
    "liouville",
    "solve_spectrum",
    "solve_spectrum_liouville",
]


def _as_callable(f):
    if f is None:
        return Polynomial([0.0])
    if isinstance(f, (int, float)):
        return Polynomial([float(f)])
    if not callable(f):
        raise DomainError("coefficient must be a number, a Polynomial or a callable")
    return f


def derivative(f, x):
    """Derivative of a coefficient function: exact for Polynomials, else a
    fourth-order central difference with a step that stays inside (0, 1)."""
    x = np.asarray(x, dtype=float)
    if isinstance(f, Polynomial):
        return f.deriv()(x)
    h = np.minimum(1e-3, 0.25 * np.minimum(x, 1.0 - x))
    h = np.where(h <= 0, 1e-6, h)
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12.0 * h)


_GL_T, _GL_W = gauss_legendre_rule(48, 0.0, 1.0)


@dataclass(frozen=True)
class OperatorCoefficients:
    """Coefficient data of the operator with the derived weights.

    The divergence form holds with M(x) = exp(-int_0^x L1/(x'(1-x')) dx'),
    the sign that reproduces the +L1 d/dx term of the operator.
    """

    N: float
    L0: object
    L1: object

    def g(self, x):
        x = np.asarray(x, dtype=float)
        return self.L1(x) / (x * (1.0 - x))

    def M(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        pts = x[:, None] * _GL_T[None, :]
        integral = x * np.sum(_GL_W[None, :] * self.g(pts), axis=1)
        return np.exp(-integral)

    def dlogM(self, x):
        return -self.g(x)

    def a(self, x):
        x = np.asarray(x, dtype=float)
        return x**2.5 * (1.0 - x) ** (self.N / 2.0) * self.M(x)

    def b(self, x):
        x = np.asarray(x, dtype=float)
        return x**1.5 * (1.0 - x) ** (self.N / 2.0 - 1.0) * self.M(x)

    @property
    def M0(self):
        return 1.0

    @property
    def M1(self):
        return float(self.M(np.array([1.0]))[0])

    def apply_pointwise(self, y0, y1, y2, x):
        """L applied to values y, y', y'' at the points x."""
        x = np.asarray(x, dtype=float)
        first = -(2.5 * (1.0 - x) - 0.5 * self.N * x) + self.L1(x)
        return -x * (1.0 - x) * y2 + first * y1 + self.L0(x) * y0


def build_coefficients(N, L0=None, L1=None, check_points=(1e-3, 1e-4, 1e-5)):
    """Validate (N, L0, L1) and return the operator coefficients.

    Requires N >= 5, N/2 not an integer and L1 vanishing linearly at both
    endpoints (L1/x bounded near 0, L1/(1-x) bounded near 1).
    """
    N = float(N)
    if N < 5:
        raise PreconditionError(f"N = {N} < 5 is not allowed")
    if float(N / 2).is_integer():
        raise PreconditionError(f"N/2 = {N / 2} is an integer; excluded by the non-integer assumption")
    L0 = _as_callable(L0)
    L1 = _as_callable(L1)
    eps = np.asarray(check_points, dtype=float)
    left = np.abs(L1(eps)) / eps
    right = np.abs(L1(1.0 - eps)) / eps
    if abs(float(L1(np.array([0.0]))[0])) > 1e-12 or abs(float(L1(np.array([1.0]))[0])) > 1e-12:
        raise PreconditionError("L1 must vanish at x = 0 and x = 1")
    if np.max(left) > 10.0 * (left[0] + 1.0) or np.max(right) > 10.0 * (right[0] + 1.0):
        raise PreconditionError("L1/x or L1/(1-x) is not bounded at the endpoints")
    return OperatorCoefficients(N, L0, L1)


def _global_coefficient(f, N, degree=48):
    if isinstance(f, Polynomial):
        return GridFunction.from_polynomial(f, Chart(0, N))
    return GridFunction.from_callable(f, Chart(0, N), degree=degree)


def apply_L(y, coeffs):
    """L y for a global GridFunction y (coordinate x)."""
    if not isinstance(y, GridFunction) or y.chart.tag != 0:
        raise DomainError("apply_L expects a global GridFunction (x coordinate)")
    ch = y.chart
    x = GridFunction.from_polynomial(Polynomial([0.0, 1.0]), ch)
    xx = GridFunction.from_polynomial(Polynomial([0.0, 1.0, -1.0]), ch)
    first = GridFunction.from_polynomial(Polynomial([-2.5, 2.5 + coeffs.N / 2.0]), ch)
    first = first + _global_coefficient(coeffs.L1, coeffs.N)
    Dy = y.D()
    del x
    return -1.0 * (xx * Dy.D()) + first * Dy + _global_coefficient(coeffs.L0, coeffs.N) * y


def chart_decomposition(y, coeffs):
    """L y assembled chart by chart:

    -(1-x) Lap_[0] y0 + ((N/2) x + L1) D y0 + L0 y0
    - x Lap_[1] y1 + (-(5/2)(1-x) + L1) D y1 + L0 y1,

    returned as a function of x evaluated through callables.
    """
    y0, y1 = split(y)
    N = coeffs.N

    def value(xs):
        xs = np.asarray(xs, dtype=float)
        X = 1.0 - xs
        lap0 = y0.laplacian()(xs)
        d0 = y0.D()(xs)
        lap1 = y1.laplacian()(X)
        d1 = -y1.D()(X)  # d/dx = -d/dX
        part0 = -(1.0 - xs) * lap0 + (0.5 * N * xs + coeffs.L1(xs)) * d0 + coeffs.L0(xs) * y0(xs)
        part1 = -xs * lap1 + (-2.5 * (1.0 - xs) + coeffs.L1(xs)) * d1 + coeffs.L0(xs) * y1(X)
        return part0 + part1

    return value


# ----------------------------------------------------------------------------
# Galerkin spectrum
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenPair:
    """Eigenpair with the coefficient vector of Phi in the Jacobi basis.

    index counts from 0 in increasing order of the eigenvalue.
    """

    index: int
    eigenvalue: float
    coefficients: np.ndarray
    N: float
    C0: float
    C1: float
    residual: float

    @property
    def M(self):
        return len(self.coefficients)

    def __call__(self, x, deriv=0):
        V = orthonormal_jacobi(self.M, 1.5, self.N / 2.0 - 1.0, x, deriv)[deriv]
        return V @ self.coefficients

    def gridfunction(self):
        return jacobi_space(self.N, self.M).gridfunction(self.coefficients)


def galerkin_matrices(coeffs, M, extra=40):
    """Stiffness, mass and potential matrices in the orthonormal Jacobi basis."""
    N = coeffs.N
    rule = gauss_jacobi_rule(2 * M + extra, 1.5, N / 2.0 - 1.0)
    x, w = rule.nodes, rule.weights
    V = orthonormal_jacobi(M, 1.5, N / 2.0 - 1.0, x, deriv=1)
    Mx = coeffs.M(x)
    wm = w * Mx
    A = (V[1] * (wm * x * (1.0 - x))[:, None]).T @ V[1]
    B = (V[0] * wm[:, None]).T @ V[0]
    P = (V[0] * (wm * coeffs.L0(x))[:, None]).T @ V[0]
    return A, B, P


def _endpoint_constants(phi, N):
    xl = np.linspace(0.0, 0.05, 41)
    Al = np.vander(xl, 4, increasing=True)
    C0 = np.linalg.lstsq(Al, phi(xl), rcond=None)[0][0]
    X = np.linspace(0.0, 0.05, 41)
    Ar = np.column_stack([np.ones_like(X), X, X**2, X ** (N / 2.0)])
    C1 = np.linalg.lstsq(Ar, phi(1.0 - X), rcond=None)[0][0]
    return float(C0), float(C1)


def solve_spectrum(coeffs, n_modes, M=None, residual_tol=1e-7):
    """Lowest n_modes eigenpairs of L by weighted Galerkin.

    Eigenfunctions are normalized in L^2(x^(3/2)(1-x)^(N/2-1) dx) with
    Phi(0) > 0.  The residual ||L Phi - lambda Phi|| / ||Phi|| is evaluated
    pointwise on an independent quadrature and must not exceed residual_tol.
    """
    if int(n_modes) != n_modes or n_modes < 1:
        raise DomainError("n_modes must be a positive integer")
    n_modes = int(n_modes)
    if M is None:
        M = max(40, n_modes + 24)
    if M < n_modes:
        raise DomainError("resolution must exceed the number of modes")
    N = coeffs.N
    A, B, P = galerkin_matrices(coeffs, M)
    vals, vecs = eigh(A + P, B)
    check = gauss_jacobi_rule(2 * M + 57, 1.5, N / 2.0 - 1.0)
    V = orthonormal_jacobi(M, 1.5, N / 2.0 - 1.0, check.nodes, deriv=2)
    pairs = []
    worst = 0.0
    for n in range(n_modes):
        c = vecs[:, n] / np.linalg.norm(vecs[:, n])
        phi0 = float((orthonormal_jacobi(M, 1.5, N / 2.0 - 1.0, np.array([0.0]))[0] @ c)[0])
        if phi0 < 0:
            c = -c
        y0, y1, y2 = V[0] @ c, V[1] @ c, V[2] @ c
        r = coeffs.apply_pointwise(y0, y1, y2, check.nodes) - vals[n] * y0
        res = float(np.sqrt(np.sum(check.weights * r**2) / np.sum(check.weights * y0**2)))
        worst = max(worst, res / max(1.0, abs(vals[n])))
        pair = EigenPair(n, float(vals[n]), c, N, 0.0, 0.0, res)
        C0, C1 = _endpoint_constants(pair, N)
        pairs.append(EigenPair(n, float(vals[n]), c, N, C0, C1, res))
    if worst > residual_tol:
        raise ConvergenceError(
            "Galerkin eigenpairs not resolved", {"relative_residual": worst, "resolution": M}
        )
    if np.any(np.diff([p.eigenvalue for p in pairs]) <= 0):
        raise ConvergenceError("computed spectrum is not simple", {"eigenvalues": [p.eigenvalue for p in pairs]})
    return pairs


# ----------------------------------------------------------------------------
# Liouville normal form
# ----------------------------------------------------------------------------

def xi_of_x(x):
    return np.arcsin(2.0 * np.asarray(x, dtype=float) - 1.0)


def x_of_xi(xi):
    return 0.5 * (1.0 + np.sin(np.asarray(xi, dtype=float)))


@dataclass(frozen=True)
class LiouvilleForm:
    """Potential q on (-pi/2, pi/2) with the endpoint strengths.

    left_strength and right_strength are the extrapolated limits of
    (xi + pi/2)^2 q and (pi/2 - xi)^2 q.
    """

    coeffs: OperatorCoefficients
    xi: np.ndarray
    q: np.ndarray
    left_strength: float
    right_strength: float

    @property
    def expected_left(self):
        return 2.0

    @property
    def expected_right(self):
        N = self.coeffs.N
        return (N - 1.0) * (N - 3.0) / 4.0


def potential(coeffs, xi):
    """q(xi) = L0 + (a/4b)(D S - S^2/4 + (Da/a) S), S = Da/a + Db/b."""
    x = x_of_xi(xi)
    N = coeffs.N
    X = 1.0 - x
    dm = coeffs.dlogM(x)
    # D(dlogM) = -D(L1/(x(1-x)))
    L1 = coeffs.L1(x)
    dL1 = derivative(coeffs.L1, x)
    ddm = -(dL1 * x * X - L1 * (1.0 - 2.0 * x)) / (x * X) ** 2
    da = 2.5 / x - 0.5 * N / X + dm
    db = 1.5 / x - (0.5 * N - 1.0) / X + dm
    S = da + db
    dS = -2.5 / x**2 - 0.5 * N / X**2 - 1.5 / x**2 - (0.5 * N - 1.0) / X**2 + 2.0 * ddm
    return coeffs.L0(x) + 0.25 * x * X * (dS - 0.25 * S**2 + da * S)


def _richardson_limit(fn, d0=1e-3, levels=4):
    d = d0 * 0.5 ** np.arange(levels)
    g = np.array([fn(di) for di in d])
    # repeated Richardson elimination of the O(d^2) and O(d^4) terms
    for k in (2, 4):
        g = (2.0**k * g[1:] - g[:-1]) / (2.0**k - 1.0)
    return float(g[-1])


def liouville(coeffs, n_points=401):
    """Liouville normal form: xi = arcsin(2x - 1), eta = (ab)^(1/4) y."""
    xi = np.linspace(-np.pi / 2, np.pi / 2, n_points + 2)[1:-1]
    q = potential(coeffs, xi)
    left = _richardson_limit(lambda d: d * d * float(potential(coeffs, np.array([-np.pi / 2 + d]))[0]))
    right = _richardson_limit(lambda d: d * d * float(potential(coeffs, np.array([np.pi / 2 - d]))[0]))
    return LiouvilleForm(coeffs, xi, q, left, right)


def solve_spectrum_liouville(coeffs, n_modes, n_grid=4000):
    """Eigenvalues of -eta'' + q eta with Dirichlet ends by second-order
    finite differences on two grids and Richardson extrapolation."""

    def fd(n):
        h = np.pi / (n + 1)
        xi = -np.pi / 2 + h * np.arange(1, n + 1)
        q = potential(coeffs, xi)
        d = 2.0 / h**2 + q
        e = np.full(n - 1, -1.0 / h**2)
        return eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, n_modes - 1))

    coarse = fd(n_grid)
    fine = fd(2 * n_grid + 1)
    return (4.0 * fine - coarse) / 3.0
