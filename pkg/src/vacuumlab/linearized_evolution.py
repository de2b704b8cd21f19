"""Linearized evolution: coefficients of the Frechet derivative, the inverse
solve by implicit midpoint, the energy audit and the integration-by-parts,
elliptic, commutator and tame-estimate checks.

All spatial quantities are handled in a JacobiSpace: coefficient rows for
functions, values at the over-integration nodes for products and singular
factors.  The discrete linearization is exactly the Jacobian of the
midpoint residual in `models`, so Newton steps built from it are exact.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError, SolverError
from .jacobi_space import jacobi_space
from .models import Discretization, midpoint, step_operators
from .weighted_calculus import PairField, _chart_norm_series, omega, s_N, time_derivative

__all__ = [
    "LinearizedCoefficients",
    "assemble_linearization",
    "apply_A",
    "apply_pair_operator",
    "solve_linearized",
    "energy_audit",
    "energy_density",
    "energy_bound_constant",
    "hilbert_norm",
    "alpha_star",
    "verify_formulas",
    "verify_elliptic",
    "verify_commutator",
    "verify_tame",
    "tame_sweep",
    "coefficient_norm",
    "pair_norm",
    "unit_reference_norm",
]


# ----------------------------------------------------------------------------
# coefficients
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearizedCoefficients:
    """Node values (last axis) of the linearized coefficients.

    Leading axes follow the background rows passed to assemble_linearization.
    """

    x: np.ndarray
    J: np.ndarray
    H1: np.ndarray
    a01: np.ndarray
    a00: np.ndarray
    a11: np.ndarray
    a10: np.ndarray
    a21: np.ndarray
    a20: np.ndarray
    b1: np.ndarray
    b0: np.ndarray

    @property
    def b2(self):
        """Principal coefficients of the chart forms: (H1 (1-x), H1 x)."""
        return self.H1 * (1.0 - self.x), self.H1 * self.x

    def chart_first_order(self, tag, N):
        dw = _omega_derivative(self.x)
        if tag == 0:
            return 0.5 * N * self.H1 + (self.b1 + 2.0 * self.H1 * dw) * (1.0 - self.x)
        return 2.5 * self.H1 - (self.b1 - 2.0 * self.H1 * dw) * self.x


def _omega_derivative(x, h=1e-5):
    return (omega(x + h) - omega(x - h)) / (2.0 * h)


def assemble_linearization(model, space, Y, V, bound=10.0):
    """Coefficients of the linearization at the background (Y, V).

    a01 = -dJ/dz v/(1-x), a00 = -dJ/dy v, a11 = (dH1/dz L y + dH2/dz)/(1-x),
    a10 = dH1/dy L y + dH2/dy, a21 = dH2/dw/(1-x), a20 = dH1/dv L y + dH2/dv,
    b1 = H1 L1/(x(1-x)) + a11, b0 = H1 L0 + a10.
    """
    s = model.point_state(space, np.asarray(Y, dtype=float), np.asarray(V, dtype=float))
    model.check_bounds(s, bound)
    x = s.x
    Jv, Jy, Jz = model.J(x, s.y, s.z)
    H1, H1y, H1z, H1v = model.H1(x, s.y, s.z, s.v)
    H2, H2y, H2z, H2v, H2w = model.H2(x, s.y, s.z, s.v, s.w)
    X = 1.0 - x
    a01 = -Jz * s.v / X
    a00 = -Jy * s.v
    a11 = (H1z * s.Ly + H2z) / X
    a10 = H1y * s.Ly + H2y
    a21 = H2w / X
    a20 = H1v * s.Ly + H2v
    c = model.coeffs
    b1 = H1 * c.L1(x) / (x * X) + a11
    b0 = H1 * c.L0(x) + a10
    return LinearizedCoefficients(x, Jv, H1, a01, a00, a11, a10, a21, a20, b1, b0)


def _node_derivative(space, vals):
    """Derivative of node values through the Jacobi projection."""
    return space.project_rows(vals) @ space.Vq1.T


def apply_A(model, space, y, v, u, form="global"):
    """Node values of the second-order operator applied to u (coefficients).

    form='global': -H1 Lambda u + b1 Dcheck u + b0 u.
    form='chart0' / 'chart1': -b2 lap u + b1^[mu] Dcheck_[mu] u + b0^[mu] u
    with the omega corrections; these agree with the global form wherever
    D omega = 0.
    form='galerkin': the projected Jacobian block from the midpoint map,
    returned as coefficients rather than node values.
    """
    u = np.asarray(u, dtype=float)
    if form == "galerkin":
        A = _state_operator(model, space, y, v)
        return A[space.M:, :space.M] @ u
    co = assemble_linearization(model, space, y, v)
    x = co.x
    u0, u1, u2 = u @ space.Vq.T, u @ space.Vq1.T, u @ space.Vq2.T
    N = space.N
    if form == "global":
        lam = x * (1.0 - x) * u2 + (2.5 * (1.0 - x) - 0.5 * N * x) * u1
        return -co.H1 * lam + co.b1 * x * (1.0 - x) * u1 + co.b0 * u0
    if form not in ("chart0", "chart1"):
        raise DomainError(f"unknown form {form!r}")
    tag = int(form[-1])
    b2 = co.b2[tag]
    b1m = co.chart_first_order(tag, N)
    # omega corrections of the zeroth-order coefficient
    w0 = omega(x)
    dw = _omega_derivative(x)
    d2w = (omega(x + 1e-4) - 2 * w0 + omega(x - 1e-4)) / 1e-8
    lam_w = x * (1.0 - x) * d2w + (2.5 * (1.0 - x) - 0.5 * N * x) * dw
    sign = 1.0 if tag == 0 else -1.0
    b0m = co.b0 - sign * (co.H1 * lam_w - co.b1 * x * (1.0 - x) * dw)
    if tag == 0:
        lap = x * u2 + 2.5 * u1
        dchk = x * u1
    else:
        # X = 1 - x: d/dX = -d/dx
        lap = (1.0 - x) * u2 - 0.5 * N * u1
        dchk = -(1.0 - x) * u1
    return -b2 * lap + b1m * dchk + b0m * u0


def apply_pair_operator(model, space, y, v, h, k):
    """Coefficients of (a1 h - J k, A h + a2 k) at the background (y, v)."""
    A = _state_operator(model, space, y, v)
    U = np.concatenate([h, k])
    R = A @ U
    return R[:space.M], R[space.M:]


# ----------------------------------------------------------------------------
# solver
# ----------------------------------------------------------------------------

def _as_midpoint_forcing(g, K):
    if isinstance(g, PairField):
        g = (g.y, g.v)
    G1, G2 = (np.asarray(a, dtype=float) for a in g)
    if G1.shape[0] == K + 1:
        G1, G2 = midpoint(G1), midpoint(G2)
    if G1.shape[0] != K:
        raise DomainError("forcing must be sampled at the K+1 states or the K midpoints")
    return G1, G2


def solve_linearized(model, disc, Y, V, g, h0=None, A=None):
    """Solve the linearized system with h(0) = h0 (default 0) by implicit midpoint.

    Y, V: background coefficient rows (K+1, M); g: forcing pair at states or
    midpoints.  Returns the PairField (h, k) on the state grid.
    """
    K, M, dt = disc.K, disc.M, disc.dt
    G1, G2 = _as_midpoint_forcing(g, K)
    if A is None:
        A = step_operators(model, disc, Y, V)
    U = np.zeros((K + 1, 2 * M))
    if h0 is not None:
        U[0] = np.concatenate([np.asarray(h0[0], dtype=float), np.asarray(h0[1], dtype=float)])
    I = np.eye(2 * M)
    G = np.concatenate([G1, G2], axis=1)
    for i in range(K):
        lhs = I / dt + 0.5 * A[i]
        rhs = G[i] + (I / dt - 0.5 * A[i]) @ U[i]
        try:
            U[i + 1] = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"implicit step failed: {exc}", disc.t[i], U[i]) from exc
        if not np.all(np.isfinite(U[i + 1])):
            raise SolverError("implicit step produced non-finite values", disc.t[i], U[i])
    return PairField(disc.space, disc.t.copy(), U[:, :M], U[:, M:])


# ----------------------------------------------------------------------------
# energy identity
# ----------------------------------------------------------------------------

def alpha_star(space, alpha_vals):
    """Node values of alpha* = -(3 - (N+1) x + 2 Dcheck) alpha / 4."""
    x = space.xq
    da = _node_derivative(space, alpha_vals)
    return -0.25 * ((3.0 - (space.N + 1.0) * x) * alpha_vals + 2.0 * x * (1.0 - x) * da)


def energy_density(space, Q, h, k):
    """E = ||k||^2 + (Q Ddot h | Ddot h) for coefficient rows h, k."""
    x = space.xq
    hp = np.asarray(h) @ space.Vq1.T
    return np.sum(np.asarray(k) ** 2, axis=-1) + np.sum(space.wq * Q * x * (1.0 - x) * hp**2, axis=-1)


def _energy_terms(space, co, dtQ, h, k, g1, g2):
    """Left-hand terms (except the time derivative) and right-hand side."""
    x = space.xq
    wq = space.wq
    r = np.sqrt(x * (1.0 - x))
    Q = co.H1 / co.J
    hv, hp = h @ space.Vq.T, h @ space.Vq1.T
    kv, kp = k @ space.Vq.T, k @ space.Vq1.T
    g1p = g1 @ space.Vq1.T
    dh = r * hp
    beta1 = alpha_star(space, Q * co.a01) - 0.5 * dtQ + Q * (x * (1.0 - x) * _node_derivative(space, co.a01) + co.a00)
    beta2 = Q * r * _node_derivative(space, co.a00)
    beta3 = -Q * r * _node_derivative(space, co.J) + r * _node_derivative(space, co.H1) + r * co.b1
    lhs = (np.sum(wq * beta1 * dh * dh) + np.sum(wq * beta2 * hv * dh) + np.sum(wq * beta3 * dh * kv)
           + np.sum(wq * co.b0 * hv * kv) + np.sum(wq * co.a20 * kv * kv)
           + np.sum(wq * co.a21 * x * (1.0 - x) * kp * kv))
    rhs = np.sum(wq * Q * dh * r * g1p) + np.sum(wq * kv * (g2 @ space.Vq.T))
    betas = (beta1, beta2, beta3, co.b0, co.a20)
    return lhs, rhs, betas


def energy_audit(model, disc, Y, V, g_states, h):
    """Audit of the energy identity along a completed solve.

    g_states: forcing pair at the K+1 states (the solver used midpoint
    averages).  The state residual at interior levels uses central
    differences for dE/dt and d(H1/J)/dt; it is O(dt^2).  The midpoint
    residual uses the one-step difference; it vanishes up to roundoff for a
    time-independent background and is O(dt^2) otherwise.
    """
    space, dt, K = disc.space, disc.dt, disc.K
    G1, G2 = (np.asarray(a, dtype=float) for a in g_states)
    co = assemble_linearization(model, space, Y, V)
    Q = co.H1 / co.J
    E = energy_density(space, Q, h.y, h.v)
    state_res = np.zeros(K + 1)
    Mconst = 0.0
    for i in range(1, K):
        coi = _row(co, i)
        dtQ = (Q[i + 1] - Q[i - 1]) / (2.0 * dt)
        lhs, rhs, betas = _energy_terms(space, coi, dtQ, h.y[i], h.v[i], G1[i], G2[i])
        state_res[i] = (E[i + 1] - E[i - 1]) / (4.0 * dt) + lhs - rhs
        Mconst = max(Mconst, sum(float(np.max(np.abs(b))) for b in betas))
    com = assemble_linearization(model, space, midpoint(Y), midpoint(V))
    Qm = com.H1 / com.J
    Hm, Km = midpoint(h.y), midpoint(h.v)
    Gm1, Gm2 = midpoint(G1), midpoint(G2)
    mid_res = np.zeros(K)
    for i in range(K):
        dtQ = (Q[i + 1] - Q[i]) / dt
        lhs, rhs, _ = _energy_terms(space, _row(com, i), dtQ, Hm[i], Km[i], Gm1[i], Gm2[i])
        mid_res[i] = (E[i + 1] - E[i]) / (2.0 * dt) + lhs - rhs
    # equivalence with ||k||^2 + ||Ddot h||^2
    base = energy_density(space, np.ones_like(Q), h.y, h.v)
    mask = base > 1e-14 * max(1.0, float(np.max(base)))
    ratios = E[mask] / base[mask] if np.any(mask) else np.array([1.0])
    M0 = float(max(np.max(Q), 1.0 / np.min(Q), np.max(co.J), 1.0 / np.min(co.J)))
    Mconst += M0**2 + 1.0
    # Gronwall: E(t) <= e^{2 M t}(E(0) + int ||g||^2-type forcing)
    forcing = np.sum(G2**2, axis=1) + energy_density(space, Q, G1, np.zeros_like(G2))
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (forcing[1:] + forcing[:-1]) * dt)])
    gronwall = np.exp(2.0 * Mconst * disc.t) * (E[0] + cum)
    return {
        "t": disc.t.copy(),
        "energy": E,
        "state_residual": state_res,
        "max_state_residual": float(np.max(np.abs(state_res[1:K]))) if K > 1 else 0.0,
        "midpoint_residual": mid_res,
        "max_midpoint_residual": float(np.max(np.abs(mid_res))),
        "energy_nonnegative": bool(np.all(E >= -1e-14)),
        "equivalence": (float(np.min(ratios)), float(np.max(ratios))),
        "M0": M0,
        "M": Mconst,
        "gronwall_ok": bool(np.all(E <= gronwall * (1 + 1e-12) + 1e-14)),
    }


def hilbert_norm(space, h, k):
    """(||h||^2 + ||Ddot h||^2 + ||k||^2)^(1/2) for coefficient rows."""
    h = np.asarray(h)
    base = energy_density(space, np.ones(space.xq.shape), h, k)
    return np.sqrt(base + np.sum(h**2, axis=-1))


def energy_bound_constant(model, resolutions=(24, 32, 40), K=100, T=1.0, trials=5, band=8, seed=0,
                          amplitude=0.002):
    """Empirical C in ||h(t)|| <= C int_0^t ||g|| dt' per resolution.

    The forcing is band-limited in x and smooth in t; the background is a
    small time-independent polynomial state.  Returns rows (M, C) and the
    relative spread of C.
    """
    rows = []
    for M in resolutions:
        if M < band:
            raise DomainError("resolution smaller than the band")
        disc = Discretization(jacobi_space(model.N, M), np.linspace(0.0, T, K + 1))
        y, v = _background(model, disc.space, amplitude)
        Y = np.repeat(y[None, :], K + 1, axis=0)
        V = np.repeat(v[None, :], K + 1, axis=0)
        A = step_operators(model, disc, Y, V)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(trials):
            rows_g = _random_rows(rng, 4, band, M, decay=2.0)
            ph = rng.uniform(0.0, 2.0 * np.pi, 2)
            G1 = np.cos(disc.t + ph[0])[:, None] * rows_g[0] + disc.t[:, None] * rows_g[1]
            G2 = np.cos(2.0 * disc.t + ph[1])[:, None] * rows_g[2] + disc.t[:, None] ** 2 * rows_g[3]
            sol = solve_linearized(model, disc, Y, V, (G1, G2), A=A)
            hn = hilbert_norm(disc.space, sol.y, sol.v)
            gn = hilbert_norm(disc.space, G1, G2)
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (gn[1:] + gn[:-1]) * disc.dt)])
            worst = max(worst, float(np.max(hn[1:] / cum[1:])))
        rows.append({"M": M, "C": worst})
    vals = np.array([r["C"] for r in rows])
    spread = float(np.max(vals) / np.min(vals) - 1.0)
    return {"rows": rows, "spread": spread, "stable": bool(spread <= 0.1)}


def _row(co, i):
    return LinearizedCoefficients(co.x, *(getattr(co, f)[i] for f in
                                         ("J", "H1", "a01", "a00", "a11", "a10", "a21", "a20", "b1", "b0")))


# ----------------------------------------------------------------------------
# integration-by-parts formulas
# ----------------------------------------------------------------------------

def verify_formulas(N=7.0, M=24, trials=10, band=12, alpha_degree=3, seed=0):
    """First identity: (-alpha Lambda phi|psi) = (alpha Ddot phi|Ddot psi) + ((D alpha) Dcheck phi|psi).
    Second identity: (alpha Ddot phi|Ddot Dcheck phi) = (alpha* Ddot phi|Ddot phi).

    Both sides are computed with the over-integration rule, which is exact
    for these polynomial integrands.  The printed alpha* with (3 + (N+3) x)
    is evaluated too and reported separately.
    """
    space = jacobi_space(float(N), int(M))
    x, wq = space.xq, space.wq
    rng = np.random.default_rng(seed)
    worst1 = worst2 = worst_printed = 0.0
    rows = []
    for trial in range(trials):
        phi = np.zeros(space.M)
        psi = np.zeros(space.M)
        phi[:band] = rng.standard_normal(band) / (1.0 + np.arange(band)) ** 1.5
        psi[:band] = rng.standard_normal(band) / (1.0 + np.arange(band)) ** 1.5
        a = rng.standard_normal(alpha_degree + 1)
        alpha = np.polynomial.Polynomial(a)
        if trial == 0:
            alpha = np.polynomial.Polynomial([1.0])
        al, dal = alpha(x), alpha.deriv()(x)
        p0, p1, p2 = phi @ space.Vq.T, phi @ space.Vq1.T, phi @ space.Vq2.T
        q0, q1 = psi @ space.Vq.T, psi @ space.Vq1.T
        lam = x * (1.0 - x) * p2 + (2.5 * (1.0 - x) - 0.5 * N * x) * p1
        lhs1 = np.sum(wq * (-al * lam) * q0)
        rhs1 = np.sum(wq * al * x * (1.0 - x) * p1 * q1) + np.sum(wq * dal * x * (1.0 - x) * p1 * q0)
        # D(Dcheck phi) = (1 - 2x) phi' + x(1-x) phi''
        ddchk = (1.0 - 2.0 * x) * p1 + x * (1.0 - x) * p2
        lhs2 = np.sum(wq * al * x * (1.0 - x) * p1 * ddchk)
        ast = -0.25 * ((3.0 - (N + 1.0) * x) * al + 2.0 * x * (1.0 - x) * dal)
        printed = -0.25 * ((3.0 + (N + 3.0) * x) * al + 2.0 * x * (1.0 - x) * dal)
        rhs2 = np.sum(wq * ast * x * (1.0 - x) * p1 * p1)
        rhs2p = np.sum(wq * printed * x * (1.0 - x) * p1 * p1)
        scale = max(1.0, abs(lhs1), abs(lhs2))
        e1, e2 = abs(lhs1 - rhs1) / scale, abs(lhs2 - rhs2) / scale
        worst1, worst2 = max(worst1, e1), max(worst2, e2)
        worst_printed = max(worst_printed, abs(lhs2 - rhs2p) / scale)
        rows.append({"first": (lhs1, rhs1), "second": (lhs2, rhs2)})
    return {
        "trials": trials,
        "first_max_error": worst1,
        "second_max_error": worst2,
        "printed_alpha_star_max_error": worst_printed,
        "rows": rows,
        "passed": bool(worst1 <= 1e-8 and worst2 <= 1e-8),
    }


# ----------------------------------------------------------------------------
# norms on coefficient rows
# ----------------------------------------------------------------------------

def coefficient_norm(space, C, k):
    """||u||_k (both charts) for coefficient rows C[..., M]."""
    C = np.atleast_2d(C)
    return np.hypot(_chart_norm_series(space, C, 0, k), _chart_norm_series(space, C, 1, k))


def pair_norm(space, h, k, n):
    """||(h, k)||_n = (||h||_{n+1}^2 + ||k||_n^2)^(1/2)."""
    return np.hypot(coefficient_norm(space, h, n + 1), coefficient_norm(space, k, n))


def _sigma_conditions(N, n, sigma):
    sN = s_N(N)
    if not sN + 2 <= sigma:
        raise PreconditionError(f"s_N + 2 <= sigma fails: s_N = {sN}, sigma = {sigma}")
    if not n + 2 <= sigma:
        raise PreconditionError(f"n + 2 <= sigma fails: n = {n}, sigma = {sigma}")


# ----------------------------------------------------------------------------
# elliptic estimates
# ----------------------------------------------------------------------------

def _random_rows(rng, count, band, M, decay=1.0):
    C = np.zeros((count, M))
    C[:, :band] = rng.standard_normal((count, band)) / (1.0 + np.arange(band)) ** decay
    return C


def _background(model, space, amplitude=0.002, degree=3, seed=7):
    rng = np.random.default_rng(seed)
    y = np.zeros(space.M)
    v = np.zeros(space.M)
    y[:degree + 1] = amplitude * rng.standard_normal(degree + 1)
    v[:degree + 1] = amplitude * rng.standard_normal(degree + 1)
    return y, v


def verify_elliptic(model, n=2, sigma=6, trials=20, band=12, resolutions=(32, 40, 48), amplitude=0.002, seed=0):
    """Empirical constants of the three elliptic-type inequalities.

    single: ||u||_{n+2} / (||A u||_n + ||u||_1)
    pair:   ||u||_{n+1} / (||frak A u||_n + ||u||_1)
    reverse: ||frak A u||_n / ||u||_{n+1}
    Background: a small polynomial state of degree 3, so every product is
    resolved exactly once the space holds band + 8 modes.
    """
    _sigma_conditions(model.N, n, sigma)
    out = []
    for M in resolutions:
        if M < band + 8:
            raise DomainError("resolution too small for the chosen band")
        space = jacobi_space(model.N, M)
        y, v = _background(model, space, amplitude)
        rng = np.random.default_rng(seed)
        U = _random_rows(rng, trials, band, M)
        Kk = _random_rows(rng, trials, band, M)
        single, pair, reverse = [], [], []
        for u, kk in zip(U, Kk):
            Au = apply_A(model, space, y, v, u, form="galerkin")
            num = coefficient_norm(space, u, n + 2)[0]
            den = coefficient_norm(space, Au, n)[0] + coefficient_norm(space, u, 1)[0]
            single.append(num / den)
            r1, r2 = apply_pair_operator(model, space, y, v, u, kk)
            pu = pair_norm(space, u, kk, n + 1)[0]
            pa = pair_norm_from_rows(space, r1, r2, n)
            pair.append(pu / (pa + pair_norm(space, u, kk, 1)[0]))
            reverse.append(pa / pu)
        out.append({"M": M, "single": float(np.max(single)), "pair": float(np.max(pair)),
                    "reverse": float(np.max(reverse))})
    spread = {}
    for key in ("single", "pair", "reverse"):
        vals = np.array([r[key] for r in out])
        spread[key] = float(np.max(vals) / np.min(vals) - 1.0)
    return {"n": n, "sigma": sigma, "rows": out, "spread": spread,
            "stable": bool(all(s <= 0.1 for s in spread.values()))}


def pair_norm_from_rows(space, r1, r2, n):
    """Norm of an operator image (r1, r2): the first slot carries index n+1."""
    return float(pair_norm(space, r1, r2, n)[0])


# ----------------------------------------------------------------------------
# commutator with time derivatives
# ----------------------------------------------------------------------------

def verify_commutator(model, n=2, sigma=6, K=32, resolutions=(24, 32, 40), trials=30, T=1.0, seed=0,
                      amplitude=0.002, band=10):
    """||[d_t^j, frak A] u||_k against |a; tau, sigma| |u; tau, n| for j + k = n.

    Background and every trial u are polynomials in t of degree 2, so the
    finite difference time derivatives are exact.  Reports the worst ratio
    per (j, k) and resolution M.
    """
    if not s_N(model.N) + 2 <= sigma:
        raise PreconditionError("s_N + 2 <= sigma fails")
    if not n + 1 <= sigma:
        raise PreconditionError("n + 1 <= sigma fails")
    t = np.linspace(0.0, T, K + 1)
    dt = t[1] - t[0]
    out = []
    for M in resolutions:
        if M < band + 8:
            raise DomainError("resolution too small for the chosen band")
        space = jacobi_space(model.N, M)
        y0, v0 = _background(model, space, amplitude)
        y1, v1 = _background(model, space, amplitude, seed=11)
        Y = y0[None, :] + t[:, None] * y1[None, :] + 0.5 * t[:, None] ** 2 * y0[None, :]
        V = v0[None, :] + t[:, None] * v1[None, :]
        A_states = np.stack([_state_operator(model, space, Y[i], V[i]) for i in range(K + 1)])
        co = assemble_linearization(model, space, Y, V)
        a_norm = 0.0
        for name in ("J", "H1", "a01", "a00", "a21", "a20", "b1", "b0"):
            C = space.project_rows(getattr(co, name))
            tot = np.zeros(K + 1)
            for i in range(sigma + 1):
                Di = C if i == 0 else time_derivative(C, dt, i)
                for kap in range(sigma + 1 - i):
                    tot += _chart_norm_series(space, Di, 0, kap) + _chart_norm_series(space, Di, 1, kap)
            a_norm += float(np.max(tot))
        rng = np.random.default_rng(seed)
        worst = np.zeros(n)
        for _ in range(trials):
            h = _random_rows(rng, 3, band, M)
            k = _random_rows(rng, 3, band, M)
            H = h[0][None, :] + t[:, None] * h[1][None, :] + t[:, None] ** 2 * h[2][None, :]
            Kc = k[0][None, :] + t[:, None] * k[1][None, :] + t[:, None] ** 2 * k[2][None, :]
            U = np.concatenate([H, Kc], axis=1)
            AU = np.einsum("kij,kj->ki", A_states, U)
            tot = np.zeros(K + 1)
            for i in range(n + 1):
                Di = U if i == 0 else time_derivative(U, dt, i)
                for kap in range(n + 1 - i):
                    tot += pair_norm(space, Di[:, :M], Di[:, M:], kap)
            u_norm = float(np.max(tot))
            for j in range(1, n + 1):
                C = time_derivative(AU, dt, j) - np.einsum("kij,kj->ki", A_states, time_derivative(U, dt, j))
                val = float(np.max(pair_norm(space, C[:, :M], C[:, M:], n - j)))
                worst[j - 1] = max(worst[j - 1], val / (a_norm * u_norm))
        out.append({"M": M, "a_norm": a_norm,
                    "rows": [{"j": j, "k": n - j, "ratio": float(worst[j - 1])} for j in range(1, n + 1)]})
    ratios = np.array([[r["ratio"] for r in o["rows"]] for o in out])
    hi, lo = ratios.max(axis=0), ratios.min(axis=0)
    # a time-independent background has a vanishing commutator
    live = hi > 1e-14
    spread = float(np.max(hi[live] / lo[live] - 1.0)) if np.any(live) else 0.0
    return {"n": n, "sigma": sigma, "trials": trials, "resolutions": out, "spread": spread,
            "stable": bool(spread <= 0.1)}


def _state_operator(model, space, y, v):
    disc = Discretization(space, np.array([0.0, 1.0]))
    return step_operators(model, disc, np.stack([y, y]), np.stack([v, v]))[0]


# ----------------------------------------------------------------------------
# tame estimate
# ----------------------------------------------------------------------------

def _graded_norm(field, n):
    from .weighted_calculus import norm2_nu

    return float(norm2_nu(field, n))


def unit_reference_norm(disc, nu):
    """|||(1, 1)|||_nu for the constant pair on the run's grid.

    The cutoff derivatives make every graded norm large; "|||.||| <~ 1" is
    read as "at most the norm of the constant pair" at the same index.
    """
    one = 1.0 / disc.space.Vq[0, 0]
    C = np.zeros((len(disc.t), disc.M))
    C[:, 0] = one
    return _graded_norm(PairField(disc.space, disc.t, C, C), nu)


def verify_tame(model, disc, Y, V, g, n, sigma=None, lambdas=(1.0, 2.0, 4.0, 8.0),
                w_bound=None, g_bound=None):
    """Ratios |||h|||_{n+1} / (1 + |||g|||_{n+1}) for g scaled by lambda.

    The five side conditions are checked first; the first failure raises
    PreconditionError naming it.  g is a PairField on the state grid.  The
    bounds default to the constant-pair reference norms.
    """
    N = model.N
    if sigma is None:
        sigma = max(s_N(N) + 2, n + 2)
    _sigma_conditions(N, n, sigma)
    if not sigma < 1.5 * N:
        raise PreconditionError(f"||(1-x)^(N/2)||_sigma is infinite for sigma = {sigma} >= 3N/2")
    if w_bound is None:
        w_bound = unit_reference_norm(disc, sigma + 3)
    if g_bound is None:
        g_bound = unit_reference_norm(disc, 1)
    wfield = PairField(disc.space, disc.t, Y, V)
    wn = _graded_norm(wfield, sigma + 3)
    if not wn <= w_bound:
        raise PreconditionError(f"|||w|||_(sigma+3) = {wn:.3g} exceeds {w_bound:.3g}")
    gn1 = _graded_norm(g, 1)
    if not gn1 <= g_bound:
        raise PreconditionError(f"|||g|||_1 = {gn1:.3g} exceeds {g_bound:.3g}")
    A = step_operators(model, disc, Y, V)
    rows = []
    for lam in lambdas:
        h = solve_linearized(model, disc, Y, V, (lam * g.y, lam * g.v), A=A)
        hn = _graded_norm(h, n + 1)
        gn = _graded_norm(g.scale(lam), n + 1)
        rows.append({"lambda": lam, "h_norm": hn, "g_norm": gn, "ratio": hn / (1.0 + gn)})
    r = np.array([row["ratio"] for row in rows])
    return {"n": n, "sigma": sigma, "w_norm": wn, "g_norm_1": gn1, "rows": rows,
            "spread": float(np.max(r) / np.min(r) - 1.0) if np.min(r) > 0 else 0.0}


def tame_sweep(model, resolutions=(24, 32, 40), n_values=(1, 2, 3), K=64, T=1.0):
    """verify_tame on a fixed smooth background and forcing at several resolutions.

    Background and forcing use low Jacobi modes only, so every resolution
    sees the same continuous problem.  stable: the lambda spread and the
    drift across resolutions both stay below 10% for every n.
    """
    t = np.linspace(0.0, T, K + 1)
    out = []
    for M in resolutions:
        disc = Discretization(jacobi_space(model.N, M), t)
        Y = np.zeros((K + 1, M))
        V = np.zeros_like(Y)
        Y[:, 1] = 1e-3 * t**2
        V[:, 1] = 2e-3 * t
        Y[:, 2] = 5e-4 * t
        G1 = np.zeros_like(Y)
        G2 = np.zeros_like(Y)
        G1[:, 2] = 1e-3 * t
        G2[:, 3] = 1e-3 * np.sin(np.pi * t)
        g = PairField(disc.space, t, G1, G2)
        for n in n_values:
            rep = verify_tame(model, disc, Y, V, g, n)
            out.append({"M": M, "n": n, "spread": rep["spread"],
                        "ratios": [r["ratio"] for r in rep["rows"]]})
    drift = {}
    for n in n_values:
        vals = np.array([r["ratios"][0] for r in out if r["n"] == n])
        drift[n] = float((np.max(vals) - np.min(vals)) / np.max(vals))
    stable = all(r["spread"] <= 0.1 for r in out) and all(d <= 0.1 for d in drift.values())
    return {"rows": out, "resolution_drift": drift, "stable": bool(stable)}

