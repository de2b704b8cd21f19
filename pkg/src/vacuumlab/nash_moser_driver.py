"""Smoothed Newton iteration for the model system, seeds, residual
assembly and the grading arithmetic behind the admissibility check.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, PreconditionError, SolverError
from .linearized_evolution import solve_linearized, unit_reference_norm
from .models import (Discretization, ModelSystem, builtin_model, discrete_residual, discretization,
                     model_forcing, step_operators)
from .smoothing_ops import smooth
from .weighted_calculus import PairField, norm2_nu, s_N

__all__ = [
    "GradedIndex",
    "IterationTrace",
    "ModelSystem",
    "builtin_model",
    "discretization",
    "grading_plan",
    "grading_failures",
    "check_theorem_conditions",
    "seed_periodic",
    "seed_cauchy",
    "seed_manufactured",
    "assemble_F",
    "direct_residuals",
    "residual_norm",
    "iterate",
    "residual_growth_ratio",
]

LEVELS = 10


# ----------------------------------------------------------------------------
# grading arithmetic
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class GradedIndex:
    b_E: int
    b_F: int
    r: int
    levels: int = LEVELS

    def E(self, j):
        return self.b_E + self.r * j

    def F(self, j):
        return self.b_F + self.r * j


def grading_failures(N, b_E, b_F, r, levels=LEVELS):
    """Names of the violated grading constraints (empty when all hold)."""
    sN = s_N(N)
    failed = []
    if not b_E + r >= sN + 2:
        failed.append("sobolev_cover")
    if not b_F <= b_E - 2:
        failed.append("f_below_e")
    if not 1.5 * N > 2 * (b_F + levels * r):
        failed.append("top_index_finite")
    if not b_E + 1 <= b_F + r:
        failed.append("inverse_gap")
    if not r >= 3:
        failed.append("step_gap")
    if not 2 * b_E >= sN:
        failed.append("2b_E>=s_N")
    return failed


def grading_plan(N, enforce=True):
    """b_E = s_N - 2, b_F = s_N - 4, r = 3, re-verified arithmetically.

    With enforce=False the index is returned even when constraints fail
    (desk runs at small N); the failures are then only reported by
    check_theorem_conditions.
    """
    if not N > 6:
        raise PreconditionError("the grading plan needs N > 6")
    if float(N / 2).is_integer():
        raise PreconditionError("N/2 must not be an integer")
    sN = s_N(N)
    g = GradedIndex(sN - 2, sN - 4, 3)
    # b_E + r = s_N + 1 for this choice, one short of the first constraint;
    # that gap is reported by check_theorem_conditions, not enforced here
    failed = [f for f in grading_failures(N, g.b_E, g.b_F, g.r) if f != "sobolev_cover"]
    if failed and enforce:
        raise PreconditionError("grading constraints fail: " + ", ".join(failed))
    return g


def check_theorem_conditions(N):
    """Verdict: paper_sufficient (N > 108) and the raw inequality 3N/2 > 2 s_N + 52."""
    sN = s_N(N)
    failed = []
    if N > 6:
        failed = grading_failures(N, sN - 2, sN - 4, 3)
    else:
        failed = ["N>6"]
    return {
        "N": N,
        "paper_sufficient": bool(N > 108),
        "raw_inequality": bool(1.5 * N > 2 * sN + 52),
        "failed_constraints": failed,
    }


# ----------------------------------------------------------------------------
# seeds
# ----------------------------------------------------------------------------

def _fit_coefficients(c, M):
    out = np.zeros(M)
    n = min(M, len(c))
    out[:n] = c[:n]
    return out


def seed_periodic(eigenpair, eps, theta0, model, disc):
    """y* = eps sin(sqrt(lam) t + theta0) Phi, v* = eps sqrt(lam)/J(x,0,0) cos(.) Phi."""
    lam = float(eigenpair.eigenvalue)
    if lam <= 0:
        raise DomainError("the periodic seed needs a positive eigenvalue")
    space = disc.space
    phi = _fit_coefficients(np.asarray(eigenpair.coefficients, dtype=float), space.M)
    x = space.xq
    zero = np.zeros_like(x)
    J0 = model.J(x, zero, zero)[0]
    psi = space.project_rows((phi @ space.Vq.T) / J0)
    w = np.sqrt(lam)
    s = np.sin(w * disc.t + theta0)[:, None]
    c = np.cos(w * disc.t + theta0)[:, None]
    return eps * s * phi[None, :], eps * w * c * psi[None, :]


def seed_cauchy(psi0, psi1, model, disc):
    """y* = psi0 + t J(x,0,0) psi1, v* = psi1 (coefficient vectors psi0, psi1)."""
    space = disc.space
    p0 = _fit_coefficients(np.asarray(psi0, dtype=float), space.M)
    p1 = _fit_coefficients(np.asarray(psi1, dtype=float), space.M)
    x = space.xq
    zero = np.zeros_like(x)
    J0 = model.J(x, zero, zero)[0]
    jp1 = space.project_rows(J0 * (p1 @ space.Vq.T))
    t = disc.t[:, None]
    return p0[None, :] + t * jp1[None, :], np.repeat(p1[None, :], len(disc.t), axis=0)


def seed_manufactured(model, disc, delta=1e-3):
    """Exact manufactured solution shifted by delta times a fixed smooth pair.

    The shift touches modes 1, 2, 3 and 5 and vanishes at t = 0 except
    through sin(t), so the iteration starts a distance O(delta) away.
    """
    if model.exact is None:
        raise DomainError("the manufactured seed needs a model with an exact solution")
    Ye, Ve = model.exact(disc.space, disc.t)
    t = disc.t
    P = np.zeros_like(Ye)
    Q = np.zeros_like(Ve)
    P[:, 1] = t
    P[:, 3] = t**2
    Q[:, 2] = t
    Q[:, 5] = np.sin(t)
    return Ye - delta * P, Ve - delta * Q


# ----------------------------------------------------------------------------
# residual
# ----------------------------------------------------------------------------

def _forcing(model, disc):
    if model.kind != "manufactured":
        return None
    return model_forcing(model, disc)


def assemble_F(model, disc, Ystar, Vstar, w=None, forcing=None):
    """Residual of the unknown w = (y - y*, v - v*) as a PairField at the midpoints."""
    Y, V = np.array(Ystar, dtype=float), np.array(Vstar, dtype=float)
    if w is not None:
        Y = Y + w.y
        V = V + w.v
    if forcing is None:
        forcing = _forcing(model, disc)
    F1, F2 = discrete_residual(model, disc, Y, V, forcing)
    if not (np.all(np.isfinite(F1)) and np.all(np.isfinite(F2))):
        raise DomainError("residual evaluation left the coefficient domain")
    return PairField(disc.space, disc.t_mid, F1, F2)


def direct_residuals(model, disc, Ystar, Vstar):
    """(c1, c2) = (-dy*/dt + J v*, -dv*/dt - H1 L y* - H2) by direct nodal evaluation.

    Evaluated at the midpoints with the one-step time difference, returned
    as node values of shape (K, nq); independent of the coefficient-space
    assembly in assemble_F.
    """
    space = disc.space
    x = space.xq
    yn = Ystar @ space.Vq.T
    vn = Vstar @ space.Vq.T
    dt = disc.dt
    ym, vm = 0.5 * (yn[1:] + yn[:-1]), 0.5 * (vn[1:] + vn[:-1])
    Ym, Vm = 0.5 * (Ystar[1:] + Ystar[:-1]), 0.5 * (Vstar[1:] + Vstar[:-1])
    y1, y2 = Ym @ space.Vq1.T, Ym @ space.Vq2.T
    vx = Vm @ space.Vq1.T
    z = x * y1
    Ly = model.coeffs.apply_pointwise(ym, y1, y2, x)
    c1 = -(yn[1:] - yn[:-1]) / dt + model.J(x, ym, z)[0] * vm
    c2 = -(vn[1:] - vn[:-1]) / dt - model.H1(x, ym, z, vm)[0] * Ly - model.H2(x, ym, z, vm, x * vx)[0]
    return c1, c2


def residual_norm(F):
    """Discrete L^2(0,T; L^2) norm of a midpoint residual."""
    dt = float(F.t[1] - F.t[0]) if len(F.t) > 1 else 1.0
    return float(np.sqrt(dt * (np.sum(F.y**2) + np.sum(F.v**2))))


def residual_growth_ratio(model, disc, Ystar, Vstar, w, n):
    """|||F(w)|||_n / (1 + |||w|||_{n+2}) with the (2)-norms."""
    F = assemble_F(model, disc, Ystar, Vstar, w)
    return norm2_nu(F, n) / (1.0 + norm2_nu(w, n + 2))


# ----------------------------------------------------------------------------
# iteration
# ----------------------------------------------------------------------------

@dataclass
class IterationTrace:
    steps: list = field(default_factory=list)
    converged: bool = False
    reason: str = ""
    w: object = None
    grading: object = None

    @property
    def residuals(self):
        return [s["residual"] for s in self.steps]

    def as_json(self):
        return [{k: s[k] for k in ("step", "theta", "residual", "residual_E1", "residual_F1",
                                   "update_norm", "wall_ms")} for s in self.steps]


def iterate(model, disc, Ystar, Vstar, grading=None, theta0=4.0, kappa=2.0, tol=1e-6, max_steps=12,
            delta=1.0, smoothing=True, norms=True, raise_on_failure=False, smoothing_modes=None):
    """u_{j+1} = u_j - S(theta_j) I(u_j) F(u_j), theta_j = theta0 kappa^j, u_0 = 0.

    Stops when the L^2 residual falls below tol.  The smallness of F(0) at
    the E_1 index and membership of every iterate in V = {|||u|||_E1 < 1}
    are checked against the constant-pair reference norm (see
    unit_reference_norm); delta scales the smallness threshold.

    The smoothing works with `smoothing_modes` time and chart modes
    (default M // 2): chart modes beyond that are not resolved by the
    Jacobi space, and S(theta) is the identity from theta = modes^2 on.
    """
    if grading is None:
        grading = grading_plan(model.N, enforce=False)
    if theta0 <= 0 or kappa <= 1:
        raise DomainError("the schedule needs theta0 > 0 and kappa > 1")
    e1, f1 = grading.E(1), grading.F(1)
    space = disc.space
    modes = space.M // 2 if smoothing_modes is None else int(smoothing_modes)
    forcing = _forcing(model, disc)
    w = PairField(space, disc.t, np.zeros((disc.K + 1, space.M)), np.zeros((disc.K + 1, space.M)))
    trace = IterationTrace(grading=grading)
    ref_E1 = unit_reference_norm(disc, e1) if norms else None
    for j in range(max_steps + 1):
        start = time.perf_counter()
        F = assemble_F(model, disc, Ystar, Vstar, w, forcing)
        res = residual_norm(F)
        rec = {"step": j, "theta": None, "residual": res,
               "residual_E1": norm2_nu(F, e1) if norms else None,
               "residual_F1": norm2_nu(F, f1) if norms else None,
               "update_norm": 0.0, "wall_ms": 0.0}
        if not np.isfinite(res):
            trace.steps.append(rec)
            trace.reason = "non-finite residual"
            break
        if j == 0 and norms and rec["residual_E1"] >= delta * ref_E1:
            trace.steps.append(rec)
            trace.reason = "smallness violated: |||F(0)|||_E1 exceeds delta times the reference"
            break
        if res < tol:
            rec["wall_ms"] = 1e3 * (time.perf_counter() - start)
            trace.steps.append(rec)
            trace.converged = True
            trace.reason = "converged"
            break
        if j == max_steps:
            trace.steps.append(rec)
            trace.reason = "step limit reached"
            break
        theta = theta0 * kappa**j
        rec["theta"] = theta
        Y, V = Ystar + w.y, Vstar + w.v
        try:
            A = step_operators(model, disc, Y, V)
            h = solve_linearized(model, disc, Y, V, (F.y, F.v), A=A)
        except SolverError as exc:
            trace.steps.append(rec)
            trace.reason = f"linear solve failed at t = {exc.time:.4g}"
            break
        Sh = smooth(h, theta, modes, modes) if smoothing else h
        w = w - Sh
        rec["update_norm"] = float(np.sqrt(disc.dt * (np.sum(Sh.y**2) + np.sum(Sh.v**2))))
        rec["wall_ms"] = 1e3 * (time.perf_counter() - start)
        trace.steps.append(rec)
        if norms and norm2_nu(w, e1) >= ref_E1:
            trace.reason = "iterate left V"
            break
    trace.w = w
    if raise_on_failure and not trace.converged:
        raise ConvergenceError(trace.reason, {"trace": trace.as_json()})
    return trace
