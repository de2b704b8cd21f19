"""Independent reference computations, written without the package.

The frozen constants in the tests were produced by these functions; the
tests also re-run them so a regression in either side shows up.
"""
import math

from fractions import Fraction


def bessel_series(nu, z, terms=40):
    """J_nu(z) from its power series, summed term by term."""
    total = 0.0
    for k in range(terms):
        total += (-1) ** k * (z / 2.0) ** (2 * k + nu) / (math.factorial(k) * math.gamma(k + nu + 1.0))
    return total


def bessel_zero_bisect(nu, lo, hi, tol=1e-13):
    """A zero of the series oracle by bisection on a bracketing interval."""
    flo = bessel_series(nu, lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = bessel_series(nu, mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def beta_integral(p, q):
    """int_0^1 x^p (1-x)^q dx."""
    return math.gamma(p + 1) * math.gamma(q + 1) / math.gamma(p + q + 2)


def lane_emden_rk4(n, h=1e-5):
    """First zero of theta'' + 2 theta'/xi + theta^n = 0 by fixed-step RK4."""

    def f(xi, th, dth):
        return dth, -max(th, 0.0) ** n - 2.0 * dth / xi

    xi = 1e-6
    th = 1.0 - xi * xi / 6.0
    dth = -xi / 3.0
    while th > 0:
        k1 = f(xi, th, dth)
        k2 = f(xi + h / 2, th + h / 2 * k1[0], dth + h / 2 * k1[1])
        k3 = f(xi + h / 2, th + h / 2 * k2[0], dth + h / 2 * k2[1])
        k4 = f(xi + h, th + h * k3[0], dth + h * k3[1])
        th_new = th + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        dth_new = dth + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if th_new <= 0:
            # linear interpolation inside the last step
            return xi + h * th / (th - th_new)
        xi, th, dth = xi + h, th_new, dth_new
    return xi


def jacobi_eigenpolynomial(N, n):
    """Exact coefficients of the degree-n polynomial eigenfunction of
    x(1-x) y'' + (5/2 - (N+5)/2 x) y' = -lam y, normalised to y(0) = 1.

    The recurrence comes from matching powers of x, in exact arithmetic.
    """
    N = Fraction(N).limit_denominator(1000)
    lam = n * (n + (N + 3) / 2)
    c = [Fraction(1)]
    for k in range(n):
        # (k+1)(k + 5/2) c_{k+1} = (k(k-1) + (N+5)/2 k - lam) c_k
        num = k * (k - 1) + (N + 5) / 2 * k - lam
        c.append(num * c[k] / ((k + 1) * (k + Fraction(5, 2))))
    return lam, c


def liouville_right_strength(N):
    return (N - 1.0) * (N - 3.0) / 4.0
