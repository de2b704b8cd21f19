import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vacuumlab.errors import DomainError, PreconditionError
from vacuumlab.jacobi_space import jacobi_space
from vacuumlab.linearized_evolution import (apply_A, assemble_linearization, energy_audit, energy_bound_constant,
                                            solve_linearized, tame_sweep, verify_commutator, verify_elliptic,
                                            verify_formulas)
from vacuumlab.linearized_evolution import _state_operator
from vacuumlab.models import builtin_model, discretization

N = 7.0


def test_trivial_background_coefficients():
    m = builtin_model("trivial")
    space = jacobi_space(N, 12)
    z = np.zeros(12)
    co = assemble_linearization(m, space, z, z)
    for name in ("a01", "a00", "a11", "a10", "a21", "a20", "b1", "b0"):
        assert np.max(np.abs(getattr(co, name))) == 0.0
    assert np.allclose(co.b2[1], co.x)


def test_quadratic_nonlinearity_vanishes_at_zero():
    m = builtin_model("nonrelativistic")
    space = jacobi_space(N, 12)
    z = np.zeros(12)
    co = assemble_linearization(m, space, z, z)
    assert np.max(np.abs(co.a10)) == 0.0


def test_operator_on_eigenpolynomials():
    m = builtin_model("trivial")
    space = jacobi_space(N, 10)
    z = np.zeros(10)
    for n in range(1, 6):
        u = np.zeros(10)
        u[n] = 1.0
        got = space.project(apply_A(m, space, z, z, u))
        want = n * (n + (N + 3) / 2) * u
        assert np.max(np.abs(got - want)) < 1e-8
    const = np.zeros(10)
    const[0] = 1.0
    assert np.max(np.abs(apply_A(m, space, z, z, const))) < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_chart_forms_agree_with_global_form_where_cutoff_is_flat(seed):
    m = builtin_model("nonrelativistic")
    space = jacobi_space(N, 16)
    rng = np.random.default_rng(seed)
    y = np.zeros(16)
    v = np.zeros(16)
    y[:4] = 0.002 * rng.standard_normal(4)
    v[:4] = 0.002 * rng.standard_normal(4)
    u = rng.standard_normal(16) / (1.0 + np.arange(16)) ** 2
    g = apply_A(m, space, y, v, u)
    x = space.xq
    for tag, mask in ((0, x < 0.3), (1, x > 0.7)):
        c = apply_A(m, space, y, v, u, form=f"chart{tag}")
        assert np.max(np.abs(c[mask] - g[mask])) < 1e-8 * max(1.0, np.max(np.abs(g)))


def test_identities_and_printed_variant():
    rep = verify_formulas(trials=10)
    assert rep["first_max_error"] <= 1e-8
    assert rep["second_max_error"] <= 1e-8
    assert rep["passed"]
    # the printed weight (3 + (N+3) x) does not satisfy the second identity
    assert rep["printed_alpha_star_max_error"] > 1e-2


def test_zero_forcing_gives_zero_solution():
    m = builtin_model("nonrelativistic")
    d = discretization(N, 12, 20)
    Z = np.zeros((21, 12))
    h = solve_linearized(m, d, Z, Z, (Z, Z))
    assert np.max(np.abs(h.y)) == 0.0 and np.max(np.abs(h.v)) == 0.0


def test_eigenmode_forcing_closed_form():
    m = builtin_model("trivial")
    d = discretization(N, 16, 1000)
    Z = np.zeros((1001, 16))
    G2 = Z.copy()
    G2[:, 2] = 1.0
    h = solve_linearized(m, d, Z, Z, (Z, G2))
    w = np.sqrt(d.space.eigenvalues[2])
    t = d.t
    assert np.max(np.abs(h.y[:, 2] - (1 - np.cos(w * t)) / w**2)) < 1e-6
    # velocity error is the midpoint truncation term, of size dt^2 w^2 / 12
    assert np.max(np.abs(h.v[:, 2] - np.sin(w * t) / w)) < 1e-6 * w**2 / 12 * 1.5
    rep = energy_audit(m, d, Z, Z, (Z, G2), h)
    assert np.max(np.abs(rep["energy"] - 2 * (1 - np.cos(w * t)) / w**2)) < 1e-6


def test_energy_conserved_in_trivial_case():
    m = builtin_model("trivial")
    d = discretization(N, 16, 100)
    Z = np.zeros((101, 16))
    h0 = (np.r_[0, 1, 0.5, 0.2, np.zeros(12)], np.r_[0, 0, 1, np.zeros(13)])
    h = solve_linearized(m, d, Z, Z, (Z, Z), h0=h0)
    rep = energy_audit(m, d, Z, Z, (Z, Z), h)
    assert np.ptp(rep["energy"]) < 1e-10 * rep["energy"][0]


def _background(space, t):
    Y = np.zeros((len(t), space.M))
    V = np.zeros_like(Y)
    Y[:, 1] = 0.006 * np.sin(2 * t)
    Y[:, 2] = 0.004 * np.cos(3 * t)
    Y[:, 3] = 0.002 * t
    V[:, 1] = 0.012 * np.cos(2 * t)
    V[:, 2] = -0.012 * np.sin(3 * t)
    return Y, V


def _forcing(space, t):
    G1 = np.zeros((len(t), space.M))
    G2 = np.zeros_like(G1)
    G1[:, 2] = np.sin(t)
    G1[:, 1] = 0.3 * t
    G2[:, 3] = np.cos(2 * t)
    G2[:, 5] = 0.5 * t * t
    return G1, G2


def test_energy_identity_residual_second_order():
    m = builtin_model("nonrelativistic")
    res = []
    for K in (16, 32, 64, 128):
        d = discretization(N, 24, K)
        Y, V = _background(d.space, d.t)
        g = _forcing(d.space, d.t)
        h = solve_linearized(m, d, Y, V, g)
        rep = energy_audit(m, d, Y, V, g, h)
        assert rep["energy_nonnegative"] and rep["gronwall_ok"]
        res.append(rep["max_state_residual"])
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert orders[-1] >= 1.9


def _exact(space, t):
    H = np.zeros((len(t), space.M))
    Kc = np.zeros_like(H)
    dH = np.zeros_like(H)
    dK = np.zeros_like(H)
    H[:, 1] = np.sin(t) ** 2
    dH[:, 1] = np.sin(2 * t)
    H[:, 4] = t**3
    dH[:, 4] = 3 * t * t
    Kc[:, 2] = np.sin(1.5 * t)
    dK[:, 2] = 1.5 * np.cos(1.5 * t)
    return H, Kc, dH, dK


def test_manufactured_solution_second_order():
    m = builtin_model("nonrelativistic")
    errs = []
    for K in (16, 32, 64, 128):
        d = discretization(N, 24, K)
        Ym, Vm = _background(d.space, d.t_mid)
        H, Kc, dH, dK = _exact(d.space, d.t_mid)
        G = np.zeros((K, 48))
        for i in range(K):
            A = _state_operator(m, d.space, Ym[i], Vm[i])
            G[i] = np.r_[dH[i], dK[i]] + A @ np.r_[H[i], Kc[i]]
        Y, V = _background(d.space, d.t)
        h = solve_linearized(m, d, Y, V, (G[:, :24], G[:, 24:]))
        He, Ke, _, _ = _exact(d.space, d.t)
        errs.append(max(np.max(np.abs(h.y - He)), np.max(np.abs(h.v - Ke))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.min(orders) >= 1.9


def test_energy_bound_constant_resolution_stable():
    rep = energy_bound_constant(builtin_model("nonrelativistic"), trials=3)
    assert rep["stable"]
    assert all(r["C"] < 2.0 for r in rep["rows"])


def test_elliptic_estimates_stable():
    rep = verify_elliptic(builtin_model("nonrelativistic"), n=1, trials=8)
    assert rep["stable"]
    with pytest.raises(PreconditionError):
        verify_elliptic(builtin_model("nonrelativistic"), n=1, sigma=4, trials=2)


def test_commutator_stable_and_vanishes_for_static_background():
    rep = verify_commutator(builtin_model("nonrelativistic"), trials=6)
    assert rep["stable"]
    triv = verify_commutator(builtin_model("trivial"), trials=4)
    assert triv["spread"] == 0.0


def test_tame_sweep_stable():
    rep = tame_sweep(builtin_model("nonrelativistic"), n_values=(1, 2))
    assert rep["stable"]


def test_bad_forcing_shape():
    m = builtin_model("trivial")
    d = discretization(N, 8, 10)
    Z = np.zeros((11, 8))
    with pytest.raises(DomainError):
        solve_linearized(m, d, Z, Z, (np.zeros((5, 8)), np.zeros((5, 8))))


def test_tame_ratio_at_lowest_index_grows_with_scale():
    # with |||g|||_1 small the denominator is ~1, so the ratio is ~ lambda |||h|||_1
    rep = tame_sweep(builtin_model("nonrelativistic"), resolutions=(24,), n_values=(0,))
    r = rep["rows"][0]["ratios"]
    assert np.all(np.diff(r) > 0) and r[-1] / r[0] > 3.0
