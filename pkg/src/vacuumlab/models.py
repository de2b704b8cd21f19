"""Model systems of the form

    dy/dt - J(x, y, x Dy) v = 0,
    dv/dt + H1(x, y, x Dy, v) L y + H2(x, y, x Dy, v, x Dv) = 0,

and their space-time discretization: Galerkin in the global Jacobi space,
implicit midpoint in time.  The residual and its exact Jacobian live here so
that the linear solver and the Nash-Moser driver share one discrete map.
"""
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError, PreconditionError
from .jacobi_space import jacobi_space
from .spectral_l import build_coefficients

__all__ = ["Discretization", "ModelSystem", "builtin_model", "discretization"]


@dataclass(frozen=True)
class Discretization:
    """Jacobi space of dimension M and the uniform grid t_i = i T / K."""

    space: object
    t: np.ndarray

    @property
    def M(self):
        return self.space.M

    @property
    def K(self):
        return len(self.t) - 1

    @property
    def dt(self):
        return float(self.t[1] - self.t[0])

    @property
    def T(self):
        return float(self.t[-1])

    @property
    def t_mid(self):
        return 0.5 * (self.t[1:] + self.t[:-1])


def discretization(N, M, K, T=1.0):
    if int(K) != K or K < 2:
        raise DomainError("need at least two time steps")
    return Discretization(jacobi_space(float(N), int(M)), np.linspace(0.0, float(T), int(K) + 1))


def _zero(x):
    return np.zeros_like(x)


@dataclass(frozen=True)
class PointState:
    """Background quantities at the quadrature nodes (last axis)."""

    x: np.ndarray
    y: np.ndarray
    yx: np.ndarray
    z: np.ndarray
    Ly: np.ndarray
    v: np.ndarray
    vx: np.ndarray
    w: np.ndarray


@dataclass(frozen=True)
class ModelSystem:
    """Coefficient data of a model system.

    J, H1, H2 return tuples (value, partials...) in the argument order
    (y, z), (y, z, v) and (y, z, v, w) respectively.  For the manufactured
    kind `exact` maps (space, t) to the coefficient arrays of the imposed
    solution, and the discrete residual at that solution is subtracted.
    """

    kind: str
    N: float
    T: float
    coeffs: object
    J: object
    H1: object
    H2: object
    params: dict = field(default_factory=dict)
    exact: object = None
    flags: dict = field(default_factory=dict)

    # ------------------------------------------------------------------
    def point_state(self, space, Y, V):
        """Pointwise background from coefficient rows Y, V (..., M)."""
        x = space.xq
        y = Y @ space.Vq.T
        yx = Y @ space.Vq1.T
        yxx = Y @ space.Vq2.T
        Ly = self.coeffs.apply_pointwise(y, yx, yxx, x)
        v = V @ space.Vq.T
        vx = V @ space.Vq1.T
        return PointState(x, y, yx, x * yx, Ly, v, vx, x * vx)

    def operator_matrix(self, space):
        """Values of L P_j at the quadrature nodes, shape (nq, M)."""
        x = space.xq
        return self.coeffs.apply_pointwise(space.Vq, space.Vq1, space.Vq2, x[:, None])

    def point_residual(self, s):
        """Pointwise spatial parts: (-J v, H1 L y + H2)."""
        Jv = self.J(s.x, s.y, s.z)[0]
        H1 = self.H1(s.x, s.y, s.z, s.v)[0]
        H2 = self.H2(s.x, s.y, s.z, s.v, s.w)[0]
        return -Jv * s.v, H1 * s.Ly + H2

    def check_bounds(self, s, bound=10.0):
        """Bounds 1/C < J, H1 < C along the state."""
        Jv = self.J(s.x, s.y, s.z)[0]
        H1 = self.H1(s.x, s.y, s.z, s.v)[0]
        for name, val in (("J", Jv), ("H1", H1)):
            if not np.all(np.isfinite(val)) or np.min(val) <= 1.0 / bound or np.max(val) >= bound:
                raise PreconditionError(f"coefficient bound violated along the state: {name} leaves (1/{bound}, {bound})")


# ----------------------------------------------------------------------------
# built-in models
# ----------------------------------------------------------------------------

def _trivial_functions():
    J = lambda x, y, z: (np.ones_like(y), np.zeros_like(y), np.zeros_like(y))
    H1 = lambda x, y, z, v: (np.ones_like(y), np.zeros_like(y), np.zeros_like(y), np.zeros_like(y))
    H2 = lambda x, y, z, v, w: tuple(np.zeros_like(y) for _ in range(5))
    return J, H1, H2


def _nonrelativistic_functions(q1, q2):
    J = lambda x, y, z: (np.ones_like(y), np.zeros_like(y), np.zeros_like(y))

    def H1(x, y, z, v):
        return 1.0 + y, np.ones_like(y), np.zeros_like(y), np.zeros_like(y)

    def H2(x, y, z, v, w):
        a = q1(x)
        b = (1.0 - x) * q2(x)
        zero = np.zeros_like(y)
        return a * y * y + b * y * z, 2.0 * a * y + b * z, b * y, zero, zero

    return J, H1, H2


def _default_exact(amplitude):
    """Smooth imposed solution with y(t) = A (sin(1.3 t + 0.2)(P_1 + P_2/2) + t^2 P_3 / 4)."""

    def exact(space, t):
        t = np.asarray(t, dtype=float)
        Y = np.zeros((len(t), space.M))
        Y[:, 1] = np.sin(1.3 * t + 0.2)
        Y[:, 2] = 0.5 * np.sin(1.3 * t + 0.2)
        Y[:, 3] = 0.25 * t**2
        V = np.zeros_like(Y)
        V[:, 1] = 1.3 * np.cos(1.3 * t + 0.2)
        V[:, 2] = 0.65 * np.cos(1.3 * t + 0.2)
        V[:, 3] = 0.5 * t
        return amplitude * Y, amplitude * V

    return exact


def builtin_model(kind, N=7.0, T=1.0, L0=None, L1=None, q1=0.5, q2=0.25, base="nonrelativistic",
                  amplitude=0.02, exact=None):
    """Construct and check a model system.

    kind: 'trivial' (J = H1 = 1, H2 = 0, L0 = L1 = 0), 'nonrelativistic'
    (J = 1, H1 = 1 + y, H2 = q1 y^2 + (1-x) q2 y z) or 'manufactured' (the
    `base` model with a forcing making `exact` a discrete solution).
    """
    if kind not in ("trivial", "nonrelativistic", "manufactured"):
        raise DomainError(f"unknown model kind {kind!r}")
    if T <= 0:
        raise DomainError("T must be positive")
    params = {"q1": q1, "q2": q2}
    if kind == "trivial" or (kind == "manufactured" and base == "trivial"):
        coeffs = build_coefficients(N)
        J, H1, H2 = _trivial_functions()
        params = {}
    else:
        coeffs = build_coefficients(N, L0, L1)
        p1 = q1 if isinstance(q1, Polynomial) else Polynomial([float(q1)])
        p2 = q2 if isinstance(q2, Polynomial) else Polynomial([float(q2)])
        J, H1, H2 = _nonrelativistic_functions(p1, p2)
    ex = None
    if kind == "manufactured":
        ex = exact if exact is not None else _default_exact(amplitude)
        params = dict(params, base=base, amplitude=amplitude)
    model = ModelSystem(kind, float(N), float(T), coeffs, J, H1, H2, params, ex)
    flags = verify_assumptions(model)
    return ModelSystem(kind, float(N), float(T), coeffs, J, H1, H2, params, ex, flags)


def verify_assumptions(model, samples=64, seed=0):
    """Sampled checks of the structural assumptions on the model.

    Raises PreconditionError naming the first failed assumption; returns the
    flag dictionary otherwise.
    """
    N = model.N
    flags = {}
    if N < 5:
        raise PreconditionError("N >= 5 required")
    flags["dimension"] = True
    if float(N / 2).is_integer():
        raise PreconditionError("N/2 must not be an integer")
    flags["half_dimension_fractional"] = True
    flags["first_order_vanishes"] = True  # enforced by build_coefficients
    x = np.linspace(0.0, 1.0, samples)
    zero = np.zeros_like(x)
    prod = model.J(x, zero, zero)[0] * model.H1(x, zero, zero, zero)[0]
    if np.max(np.abs(prod - 1.0)) > 1e-10:
        raise PreconditionError("J(x,0,0) H1(x,0,0,0) must equal 1")
    flags["unit_product"] = True
    rng = np.random.default_rng(seed)
    X = 1.0 - np.linspace(0.001, 0.05, 24)
    worst = 0.0
    for _ in range(4):
        y, z, v, w, Ly = (0.1 * rng.standard_normal(X.size) for _ in range(5))
        Jz = model.J(X, y, z)[2]
        _, _, H1z, _ = model.H1(X, y, z, v)
        H2p = model.H2(X, y, z, v, w)
        q = np.abs(Jz) + np.abs(H1z * Ly + H2p[2]) + np.abs(H2p[4])
        worst = max(worst, float(np.max(q / (1.0 - X))))
    if not np.isfinite(worst) or worst > 1e6:
        raise PreconditionError("z- and w-derivatives must vanish like (1-x) at x = 1")
    flags["degenerate_derivatives"] = True
    flags["degenerate_ratio"] = worst
    return flags


# ----------------------------------------------------------------------------
# discrete residual and Jacobian
# ----------------------------------------------------------------------------

def midpoint(A):
    return 0.5 * (A[1:] + A[:-1])


def discrete_residual(model, disc, Y, V, forcing=None):
    """Midpoint residual (F1, F2), each of shape (K, M).

    F1 = (y_{i+1} - y_i)/dt - P[J v](mid), F2 = (v_{i+1} - v_i)/dt +
    P[H1 L y + H2](mid) - forcing, with mid the average of the two levels.
    """
    space = disc.space
    s = model.point_state(space, midpoint(Y), midpoint(V))
    r1, r2 = model.point_residual(s)
    F1 = np.diff(Y, axis=0) / disc.dt + space.project_rows(r1)
    F2 = np.diff(V, axis=0) / disc.dt + space.project_rows(r2)
    if forcing is not None:
        F1 = F1 - forcing[0]
        F2 = F2 - forcing[1]
    return F1, F2


def step_operators(model, disc, Y, V):
    """Per-midpoint blocks A_i (K, 2M, 2M) of the linearized midpoint map

    (DF h)_i = (U_{i+1} - U_i)/dt + A_i (U_i + U_{i+1})/2,  U = (h, k).
    """
    space = disc.space
    s = model.point_state(space, midpoint(Y), midpoint(V))
    x = space.xq
    Vq, Xd = space.Vq, x[:, None] * space.Vq1
    Lq = model.operator_matrix(space)
    Pw = (space.Vq * space.wq[:, None]).T  # (M, nq)
    Jv, Jy, Jz = model.J(s.x, s.y, s.z)
    H1, H1y, H1z, H1v = model.H1(s.x, s.y, s.z, s.v)
    H2, H2y, H2z, H2v, H2w = model.H2(s.x, s.y, s.z, s.v, s.w)
    K, M = Y.shape[0] - 1, space.M
    A = np.empty((K, 2 * M, 2 * M))
    for i in range(K):
        A[i, :M, :M] = -Pw @ ((Jy[i] * s.v[i])[:, None] * Vq + (Jz[i] * s.v[i])[:, None] * Xd)
        A[i, :M, M:] = -Pw @ (Jv[i][:, None] * Vq)
        cy = H1y[i] * s.Ly[i] + H2y[i]
        cz = H1z[i] * s.Ly[i] + H2z[i]
        A[i, M:, :M] = Pw @ (cy[:, None] * Vq + cz[:, None] * Xd + H1[i][:, None] * Lq)
        cv = H1v[i] * s.Ly[i] + H2v[i]
        A[i, M:, M:] = Pw @ (cv[:, None] * Vq + H2w[i][:, None] * Xd)
    return A


def apply_step_operators(A, dt, H, Kc):
    """(DF h) for h = (H, Kc) with the blocks of `step_operators`."""
    U = np.concatenate([H, Kc], axis=1)
    Ubar = midpoint(U)
    R = np.diff(U, axis=0) / dt + np.einsum("kij,kj->ki", A, Ubar)
    M = H.shape[1]
    return R[:, :M], R[:, M:]


def model_forcing(model, disc):
    """Forcing pair that makes the model's exact solution a discrete solution."""
    if model.exact is None:
        return None
    Y, V = model.exact(disc.space, disc.t)
    return discrete_residual(model, disc, Y, V)
