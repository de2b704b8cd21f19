import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Polynomial as P

from vacuumlab.errors import DomainError, ResolutionError
from vacuumlab.jacobi_space import jacobi_space
from vacuumlab.specfun_basis import space_basis
from vacuumlab.weighted_calculus import (CUTOFF_ORDER, Chart, GridFunction, PairField, apply_Dcheck, apply_Ddot,
                                         apply_laplacian, chi, integral_norm, ladder_norms, norm2_nu, norm_k, omega,
                                         s_N, smoothstep, split, sup_norm_tau_n)

N = 7.0
XS = np.linspace(0.0, 1.0, 13)

coeff_lists = st.lists(st.floats(-3.0, 3.0), min_size=1, max_size=7)


def test_sobolev_index():
    assert s_N(7.0) == 4
    assert s_N(109.0) == 55
    assert s_N(5.0) == 3


def test_smoothstep_and_cutoffs():
    s = np.linspace(-0.5, 1.5, 201)
    S = smoothstep(s)
    assert S[0] == 0.0 and S[-1] == 1.0
    assert np.all(np.diff(S) >= 0)
    assert np.allclose(smoothstep(s) + smoothstep(1.0 - s), 1.0, atol=1e-14)
    assert np.all(omega(np.linspace(0, 1 / 3, 5)) == 1.0)
    assert np.all(omega(np.linspace(2 / 3, 1, 5)) == 0.0)
    assert np.all(chi(np.linspace(1 / 3, 2 / 3, 5)) == 1.0)
    assert np.all(chi(np.array([0.0, 0.1, 0.9, 1.0])) == 0.0)


def test_split_is_partition_of_unity():
    zero = GridFunction.zero(Chart(0, N))
    a, b = split(zero)
    assert a.sup_norm() == 0.0 and b.sup_norm() == 0.0
    one = GridFunction.constant(1.0, Chart(0, N))
    a, b = split(one)
    assert np.max(np.abs(a(XS) + b(1.0 - XS) - 1.0)) < 1e-12
    assert np.max(np.abs(a(XS) - omega(XS))) < 1e-12


@settings(max_examples=25, deadline=None)
@given(coeff_lists)
def test_split_reassembles(coeffs):
    u = GridFunction.from_polynomial(P(coeffs), Chart(0, N))
    a, b = split(u)
    assert np.max(np.abs(a(XS) + b(1.0 - XS) - u(XS))) < 1e-10 * max(1.0, np.max(np.abs(coeffs)))


def test_split_of_left_supported_function():
    u = GridFunction.from_polynomial(P([0.0, 1.0, 2.0]), Chart(0, N)).restrict_support(0.0, 1.0 / 3.0)
    a, b = split(u)
    x = np.linspace(0.0, 0.3, 7)
    assert np.max(np.abs(a(x) - u(x))) < 1e-14
    assert b.sup_norm() < 1e-14


def test_chart_operator_oracles():
    ch1 = Chart(1, N)
    X = GridFunction.from_polynomial(P([0.0, 1.0]), ch1)
    assert np.allclose(apply_laplacian(X)(XS), N / 2.0, atol=1e-12)
    assert np.allclose(apply_Ddot(X)(XS), np.sqrt(XS), atol=1e-10)
    const = GridFunction.constant(2.5, ch1)
    assert np.max(np.abs(apply_laplacian(const)(XS))) < 1e-14
    assert np.max(np.abs(apply_Ddot(const)(XS))) < 1e-14
    u = GridFunction.from_polynomial(P([1.0, -2.0, 0.5, 3.0]), Chart(0, N))
    d = apply_Dcheck(u)(np.array([0.0, 1.0]))
    assert np.max(np.abs(d)) < 1e-13


@settings(max_examples=25, deadline=None)
@given(coeff_lists, st.sampled_from([0, 1]))
def test_ddot_squared_identity(coeffs, tag):
    # Ddot^2 = X D^2 + D/2 = Laplacian - (c - 1/2) D
    ch = Chart(tag, N)
    u = GridFunction.from_polynomial(P(coeffs), ch)
    lhs = u.ddot().ddot()
    rhs = u.laplacian() - (ch.c - 0.5) * u.D()
    x = XS[1:]
    assert np.max(np.abs(lhs(x) - rhs(x))) < 1e-9 * max(1.0, np.max(np.abs(coeffs)))


def test_bessel_modes_are_laplacian_eigenfunctions():
    B = space_basis(N, 3)
    ch = Chart(1, N)
    for b in range(3):
        psi = GridFunction.from_callable(lambda X, b=b: B.evaluate(X)[:, b], ch, degree=60)
        X = np.linspace(0.05, 0.95, 11)
        err = psi.laplacian()(X) + B.eigenvalues[b] * psi(X)
        assert np.max(np.abs(err)) < 1e-8 * B.eigenvalues[b]


def test_norms_of_simple_functions():
    ch = Chart(1, N)
    assert norm_k(GridFunction.zero(ch), 3) == 0.0
    B = space_basis(N, 2)
    psi1 = GridFunction.from_callable(lambda X: B.evaluate(X)[:, 0], ch, degree=60)
    psi12 = GridFunction.from_callable(lambda X: B.evaluate(X).sum(axis=1), ch, degree=60)
    assert norm_k(psi1, 0) == pytest.approx(1.0, abs=1e-9)
    assert norm_k(psi12, 0) == pytest.approx(math.sqrt(2.0), abs=1e-9)
    # <psi>_1 = ||Ddot psi|| = sqrt(mu), <psi>_2 = ||Laplacian psi|| = mu
    vals = ladder_norms(psi1, 2)
    mu = B.eigenvalues[0]
    assert vals[1] == pytest.approx(math.sqrt(mu), rel=1e-8)
    assert vals[2] == pytest.approx(mu, rel=1e-8)


def test_norm_index_beyond_cutoff_smoothness():
    u = GridFunction.constant(1.0, Chart(0, N))
    with pytest.raises(ResolutionError):
        norm_k(u, CUTOFF_ORDER + 2)
    with pytest.raises(DomainError):
        norm_k(u, -1)
    with pytest.raises(DomainError):
        Chart(2, N)


def _field(M=12, K=24, fn=None):
    space = jacobi_space(N, M)
    t = np.linspace(0.0, 1.0, K + 1)
    Y = np.zeros((K + 1, M))
    V = np.zeros_like(Y)
    if fn is not None:
        fn(t, Y, V)
    return PairField(space, t, Y, V)


def test_time_norms_vanish_on_zero():
    f = _field()
    assert norm2_nu(f, 2) == 0.0
    assert sup_norm_tau_n(f, 1.0, 2) == 0.0
    assert integral_norm(f, 2) == 0.0


def test_time_constant_field_sup_norm():
    def fill(t, Y, V):
        Y[:, 1] = 0.3
        V[:, 2] = -0.2

    f = _field(fn=fill)
    from vacuumlab.weighted_calculus import field_norm_k

    expected = np.sqrt(sum(field_norm_k(f, 0, mu)[0] ** 2 for mu in (0, 1)))
    assert sup_norm_tau_n(f, 1.0, 0) == pytest.approx(expected, rel=1e-12)


def test_norm2_scales_linearly():
    def fill(t, Y, V):
        Y[:, 1] = np.sin(t)
        V[:, 3] = t**2

    f = _field(fn=fill)
    assert norm2_nu(f.scale(3.0), 1) == pytest.approx(3.0 * norm2_nu(f, 1), rel=1e-12)
    with pytest.raises(DomainError):
        norm2_nu(f, -1)
