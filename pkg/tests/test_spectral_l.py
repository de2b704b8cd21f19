import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Polynomial as P

import oracles
from vacuumlab.errors import PreconditionError
from vacuumlab.spectral_l import (apply_L, build_coefficients, chart_decomposition, liouville, solve_spectrum,
                                  solve_spectrum_liouville)
from vacuumlab.spectral_l import xi_of_x
from vacuumlab.weighted_calculus import Chart, GridFunction

XS = np.linspace(0.05, 0.95, 10)


def test_weight_function_closed_forms():
    c = build_coefficients(7.0)
    assert np.allclose(c.M(XS), 1.0)
    assert np.allclose(c.a(XS), XS**2.5 * (1 - XS) ** 3.5)
    # the divergence form with a +L1 d/dx term needs M'/M = -L1/(x(1-x))
    c = build_coefficients(7.0, L1=P([0.0, -1.0, 1.0]))
    assert np.allclose(c.M(XS), np.exp(XS), rtol=1e-10)
    assert float(c.M(np.array([1.0]))[0]) == pytest.approx(math.e, abs=1e-10)
    c = build_coefficients(7.0, L1=P([0.0, 1.0, -1.0]))
    assert np.allclose(c.M(XS), np.exp(-XS), rtol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_divergence_form_matches_operator(l0, l1):
    # -(1/b)(a y')' + L0 y equals the expanded operator for y = x^2 - x^3
    cf = build_coefficients(7.0, L0=P([l0]), L1=P([0.0, l1, -l1]))
    y = lambda x: x**2 - x**3
    dy = lambda x: 2 * x - 3 * x**2
    h = 1e-5
    flux = lambda x: cf.a(x) * dy(x)
    div = -(flux(XS + h) - flux(XS - h)) / (2 * h) / cf.b(XS) + l0 * y(XS)
    direct = cf.apply_pointwise(y(XS), dy(XS), 2 - 6 * XS, XS)
    assert np.max(np.abs(div - direct)) < 1e-6


def test_apply_L_oracles():
    N = 7.0
    one = GridFunction.constant(1.0, Chart(0, N))
    assert np.max(np.abs(apply_L(one, build_coefficients(N))(XS))) < 1e-13
    assert np.allclose(apply_L(one, build_coefficients(N, L0=P([0.7])))(XS), 0.7)
    lam, coeffs = oracles.jacobi_eigenpolynomial(N, 1)
    y = GridFunction.from_polynomial(P([float(c) for c in coeffs]), Chart(0, N))
    assert float(lam) == pytest.approx((N + 5) / 2)
    Ly = apply_L(y, build_coefficients(N))
    assert np.max(np.abs(Ly(XS) - float(lam) * y(XS))) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=6), st.floats(-1, 1))
def test_chart_decomposition_agrees_with_global_form(coeffs, l1):
    N = 7.0
    cf = build_coefficients(N, L0=P([0.3]), L1=P([0.0, l1, -l1]))
    y = GridFunction.from_polynomial(P(coeffs), Chart(0, N))
    direct = apply_L(y, cf)(XS)
    charted = chart_decomposition(y, cf)(XS)
    assert np.max(np.abs(direct - charted)) < 1e-8 * max(1.0, np.max(np.abs(direct)))


def test_spectrum_closed_form_and_runtime():
    start = time.perf_counter()
    pairs = solve_spectrum(build_coefficients(7.0), 9)
    elapsed = time.perf_counter() - start
    lam = np.array([p.eigenvalue for p in pairs])
    n = np.arange(9)
    assert lam[0] == pytest.approx(0.0, abs=1e-9)
    assert np.max(np.abs(lam[1:] - n[1:] * (n[1:] + 5)) / (n[1:] * (n[1:] + 5))) < 1e-6
    assert elapsed < 10.0


def test_first_eigenfunction_and_endpoint_ratio():
    p1 = solve_spectrum(build_coefficients(7.0), 2)[1]
    x = np.linspace(0, 1, 9)
    phi = p1(x)
    ref = 1.0 - 12.0 / 5.0 * x
    assert np.max(np.abs(phi / phi[0] - ref)) < 1e-8
    assert p1.C0 / p1.C1 == pytest.approx(-5.0 / 7.0, rel=1e-6)


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_perturbed_spectrum_is_simple_and_matches_finite_differences(a, b):
    cf = build_coefficients(7.0, L0=P([a]), L1=P([0.0, b, -b]))
    lam = np.array([p.eigenvalue for p in solve_spectrum(cf, 5)])
    assert np.all(np.diff(lam) > 0)
    fd = solve_spectrum_liouville(cf, 5)
    assert np.max(np.abs(fd[1:] - lam[1:]) / lam[1:]) < 1e-4


@pytest.mark.parametrize("N", [5.0, 7.0, 109.0])
def test_liouville_endpoint_strengths(N):
    lf = liouville(build_coefficients(N))
    assert lf.left_strength == pytest.approx(2.0, rel=0.02)
    assert lf.right_strength == pytest.approx(oracles.liouville_right_strength(N), rel=0.02)


def test_liouville_midpoint():
    assert xi_of_x(0.5) == 0.0
    assert xi_of_x(0.0) == pytest.approx(-math.pi / 2)


def test_preconditions():
    with pytest.raises(PreconditionError):
        build_coefficients(4.0)
    with pytest.raises(PreconditionError):
        build_coefficients(8.0)
    with pytest.raises(PreconditionError):
        build_coefficients(7.0, L1=P([1.0]))
