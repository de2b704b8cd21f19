"""Spherically symmetric equilibria: equations of state given through the
index function nu(u), Lane-Emden and Tolman-Oppenheimer-Volkoff shooting,
finite-radius detection, the Milne-type variable m/(r u) and the linear
vacuum-boundary fit.

Units: G and 4 pi appear explicitly; the natural length is
a = sqrt(u_c / (4 pi G rho(u_c))), so for rho = u^nu the classical
Lane-Emden variable is xi = r / a.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import DomainError, PreconditionError, SolverError

__all__ = [
    "INFINITE",
    "R_CUTOFF",
    "EquationOfState",
    "EquilibriumProfile",
    "build_eos",
    "power_law_eos",
    "integrate_lane_emden",
    "integrate_tov",
    "milne_x",
    "milne_radius_bound",
    "boundary_expansion_fit",
    "finite_radius_scan",
    "interpolated_construction",
]

INFINITE = math.inf
R_CUTOFF = 1.0e3  # in units of the natural length a
U_FLOOR = 1.0e-6  # relative to u_c, below which an unfinished run is suspicious
RTOL = 1e-12
ATOL = 1e-14


def _smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0) & (s < 1)
    si = s[inside]
    a = np.exp(-1.0 / si)
    b = np.exp(-1.0 / (1.0 - si))
    out[inside] = a / (a + b)
    out[s >= 1] = 1.0
    return out


@dataclass(frozen=True)
class EquationOfState:
    """rho(u) = K* exp(int_{u*}^u nu/u' du'), P(u) = int_0^u rho(u') e^{(u-u')/c^2} du'.

    nu(u) = nu1 for u >= u*, nu0 for u <= u*/2, with a C-infinity ramp between.
    """

    nu0: float
    nu1: float
    u_star: float
    K_star: float = 1.0
    c: float = math.inf

    def nu(self, u):
        u = np.asarray(u, dtype=float)
        s = (u - 0.5 * self.u_star) / (0.5 * self.u_star)
        return self.nu0 + (self.nu1 - self.nu0) * _smooth_step(s)

    def _log_ramp(self, u):
        # int_{u*/2}^{u} nu/u' du' for u*/2 <= u <= u*
        lo = 0.5 * self.u_star
        if self.nu0 == self.nu1:
            return self.nu0 * math.log(u / lo)
        val, _ = quad(lambda s: float(self.nu(s)) / s, lo, u, epsabs=1e-15, epsrel=1e-13, limit=200)
        return val

    def log_rho(self, u):
        """log rho for scalar u > 0."""
        u = float(u)
        if u <= 0:
            return -math.inf
        us = self.u_star
        base = math.log(self.K_star)
        if u >= us:
            return base + self.nu1 * math.log(u / us)
        full = self._ramp_total()
        if u <= 0.5 * us:
            return base - full + self.nu0 * math.log(2.0 * u / us)
        return base - full + self._log_ramp(u)

    def _ramp_total(self):
        cache = self.__dict__.get("_ramp_cache")
        if cache is None:
            cache = self._log_ramp(self.u_star)
            object.__setattr__(self, "_ramp_cache", cache)
        return cache

    def rho(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.array([math.exp(self.log_rho(x)) if x > 0 else 0.0 for x in u])
        return out if out.size > 1 else float(out[0])

    def pressure(self, u):
        """P(u); the c = infinity limit is int_0^u rho."""
        u = float(u)
        if u <= 0:
            return 0.0
        inv_c2 = 0.0 if math.isinf(self.c) else 1.0 / self.c**2
        f = lambda s: math.exp(self.log_rho(s) + (u - s) * inv_c2)
        pts = [p for p in (0.5 * self.u_star, self.u_star) if 0 < p < u]
        val, _ = quad(f, 0.0, u, points=pts or None, epsabs=0.0, epsrel=1e-13, limit=400)
        return val

    def dP_drho(self, u, P=None):
        """dP/drho = u (rho + P/c^2) / (nu rho)."""
        u = float(u)
        P = self.pressure(u) if P is None else P
        inv_c2 = 0.0 if math.isinf(self.c) else 1.0 / self.c**2
        r = self.rho(u)
        return u * (r + P * inv_c2) / (float(self.nu(u)) * r)


def build_eos(nu0, nu1, u_star, K_star=1.0, c=math.inf):
    if nu0 <= 0 or nu1 <= 0:
        raise DomainError("indices nu0, nu1 must be positive")
    if u_star <= 0 or K_star <= 0:
        raise DomainError("u* and K* must be positive")
    if c <= 0:
        raise DomainError("c must be positive")
    return EquationOfState(float(nu0), float(nu1), float(u_star), float(K_star), float(c))


def power_law_eos(gamma, c=math.inf):
    """rho = u^nu with nu = 1/(gamma - 1)."""
    if not gamma > 1:
        raise DomainError("gamma must exceed 1")
    nu = 1.0 / (gamma - 1.0)
    return build_eos(nu, nu, 1.0, 1.0, c)


@dataclass(frozen=True)
class EquilibriumProfile:
    r: np.ndarray
    m: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    P: np.ndarray
    r_plus: float
    m_plus: float
    u_c: float
    length_scale: float
    kind: str = "lane-emden"
    solution: object = field(default=None, repr=False, compare=False)

    @property
    def finite(self):
        return math.isfinite(self.r_plus)

    def state(self, r):
        """(m, u) at radii r from the dense output."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty((2, r.size))
        small = r <= self.r[0]
        if np.any(~small):
            out[:, ~small] = self.solution.sol(r[~small])[:2]
        if np.any(small):
            out[:, small] = np.vstack([np.interp(r[small], self.r[:2], self.m[:2]),
                                       np.interp(r[small], self.r[:2], self.u[:2])])
        return out


def _natural_length(eos, u_c, G):
    return math.sqrt(u_c / (4.0 * math.pi * G * eos.rho(u_c)))


def _shoot(eos, u_c, G, c, form, r_max_scaled, n_out):
    if u_c <= 0:
        raise DomainError("central value u_c must be positive")
    a = _natural_length(eos, u_c, G)
    rho_c = eos.rho(u_c)
    relativistic = math.isfinite(c)
    inv_c2 = 1.0 / c**2 if relativistic else 0.0
    P_c = eos.pressure(u_c) if relativistic else 0.0

    def rhs(r, s):
        m, u, P = s
        rho = math.exp(eos.log_rho(u)) if u > 0 else 0.0
        if relativistic:
            if form == "standard":
                horizon = 1.0 - 2.0 * G * m * inv_c2 / r
                num = m + 4.0 * math.pi * r**3 * P * inv_c2
            else:
                horizon = 1.0 - 2.0 * G * m * inv_c2
                num = m + 4.0 * math.pi * r**2 * P * inv_c2
            if horizon <= 0:
                raise SolverError("horizon factor became non-positive", r, s)
            du = -G * num / (r * r * horizon)
        else:
            du = -G * m / (r * r)
        dP = (rho + P * inv_c2) * du if relativistic else 0.0
        return [4.0 * math.pi * r * r * rho, du, dP]

    # series start: m = (4pi/3) rho_c r^3, u = u_c - (2pi/3) G rho_c r^2 (+ O(1/c^2))
    r0 = 1e-6 * a
    m0 = 4.0 * math.pi / 3.0 * rho_c * r0**3
    u0 = u_c - 2.0 * math.pi / 3.0 * G * rho_c * r0**2
    if relativistic:
        u0 -= 2.0 * math.pi * G * r0**2 * P_c * inv_c2
    P0 = P_c + (rho_c + P_c * inv_c2) * (u0 - u_c) if relativistic else 0.0

    def surface(r, s):
        return s[1]

    surface.terminal = True
    surface.direction = -1
    r_end = r_max_scaled * a
    try:
        sol = solve_ivp(rhs, (r0, r_end), [m0, u0, P0], method="DOP853", rtol=RTOL, atol=ATOL * u_c,
                        events=surface, dense_output=True)
    except SolverError:
        raise
    if sol.status == -1:
        raise SolverError(f"integration failed: {sol.message}", float(sol.t[-1]), sol.y[:, -1])
    if sol.t_events[0].size:
        r_plus = float(sol.t_events[0][0])
        m_plus = float(sol.y_events[0][0][0])
    else:
        r_plus, m_plus = INFINITE, float(sol.y[0, -1])
        if sol.y[1, -1] <= U_FLOOR * u_c:
            # u is tiny but has not crossed zero; still declared infinite at the cutoff
            pass
    r_hi = r_plus if math.isfinite(r_plus) else float(sol.t[-1])
    rr = np.concatenate([[r0], np.linspace(r0, r_hi, n_out)[1:]])
    st = sol.sol(rr)
    u = np.maximum(st[1], 0.0)
    if math.isfinite(r_plus):
        u[-1] = 0.0
    rho = np.array([eos.rho(x) if x > 0 else 0.0 for x in u])
    P = st[2] if relativistic else np.array([eos.pressure(x) for x in u])
    kind = "lane-emden" if not relativistic else f"tov-{form}"
    return EquilibriumProfile(rr, st[0], u, rho, P, r_plus, m_plus, float(u_c), a, kind, sol)


def integrate_lane_emden(eos, u_c, G=1.0, r_max_scaled=R_CUTOFF, n_out=2001):
    """dm/dr = 4 pi r^2 rho(u), du/dr = -G m / r^2 from the centre."""
    return _shoot(eos, u_c, G, math.inf, "standard", r_max_scaled, n_out)


def integrate_tov(eos, u_c, c=None, G=1.0, form="standard", r_max_scaled=R_CUTOFF, n_out=2001,
                  monitor=True):
    """Tolman-Oppenheimer-Volkoff shooting in the variable u = int dP/(rho + P/c^2).

    form='standard': du/dr = -G(m + 4 pi r^3 P/c^2)/(r^2 (1 - 2Gm/(c^2 r))).
    form='printed': the variant with r^2 P and (1 - 2Gm/c^2).
    c defaults to the equation of state's c; c = inf gives Lane-Emden.
    """
    if form not in ("standard", "printed"):
        raise DomainError("form must be 'standard' or 'printed'")
    c = eos.c if c is None else float(c)
    if c <= 0:
        raise DomainError("c must be positive")
    if math.isfinite(c) and eos.c != c:
        eos = EquationOfState(eos.nu0, eos.nu1, eos.u_star, eos.K_star, c)
    prof = _shoot(eos, u_c, G, c, form, r_max_scaled, n_out)
    if monitor and math.isfinite(c):
        us = np.linspace(0.0, 2.0 * u_c, 41)[1:]
        worst = max(eos.dP_drho(x) for x in us)
        if not worst < c * c:
            raise PreconditionError(f"dP/drho reaches {worst:.3g} >= c^2 below 2 u_c")
    return prof


# ----------------------------------------------------------------------------
# Milne variable and boundary behaviour
# ----------------------------------------------------------------------------

def milne_x(profile, r):
    """x = m / (r u) at radius r (u(r) > 0 required)."""
    m, u = profile.state(r)
    if np.any(u <= 0):
        raise DomainError("milne_x needs u(r) > 0")
    r = np.asarray(r, dtype=float)
    out = m / (np.atleast_1d(r) * u)
    return out if out.size > 1 else float(out[0])


def milne_crossing(profile, target, G=1.0):
    """First radius where G x(r) reaches target (> 1)."""
    r = profile.r[1:-1] if profile.finite else profile.r[1:]
    u = profile.u[1:-1] if profile.finite else profile.u[1:]
    m = profile.m[1:-1] if profile.finite else profile.m[1:]
    gx = G * m / (r * u)
    idx = np.nonzero(gx >= target)[0]
    if idx.size == 0:
        raise DomainError("G x never reaches the target on this profile")
    i = int(idx[0])
    from scipy.optimize import brentq

    lo, hi = (r[i - 1], r[i]) if i > 0 else (profile.r[0], r[0])
    return brentq(lambda s: G * milne_x(profile, s) - target, lo, hi, xtol=1e-14 * hi)


def milne_radius_bound(profile, r_star, G=1.0):
    """r* exp[1/(G x(r*) - 1)], valid when G x(r*) > 1."""
    gx = G * milne_x(profile, r_star)
    if gx <= 1:
        raise PreconditionError("the radius bound needs G x(r*) > 1")
    return r_star * math.exp(1.0 / (gx - 1.0))


def boundary_expansion_fit(profile, fraction=0.02, degree=4, samples=200):
    """Fit u = B s (1 + c1 s + ... ) with s = r_+ - r on the last `fraction`.

    Returns (B, relative residual).  The correction terms stand for the
    convergent series in the expansion; B is the linear coefficient.
    """
    if not profile.finite:
        raise PreconditionError("boundary fit needs a finite-radius profile")
    rp = profile.r_plus
    r = np.linspace(rp * (1.0 - fraction), rp, samples)[:-1]
    u = profile.state(r)[1]
    return _fit_linear_vanishing(rp - r, u, degree)


def _fit_linear_vanishing(s, u, degree):
    V = np.stack([s ** (k + 1) for k in range(degree)], axis=1)
    scale = np.max(np.abs(V), axis=0)
    coef, *_ = np.linalg.lstsq(V / scale, u, rcond=None)
    coef = coef / scale
    resid = np.linalg.norm(V @ coef - u) / np.linalg.norm(u)
    return float(coef[0]), float(resid)


# ----------------------------------------------------------------------------
# scans and the interpolated construction
# ----------------------------------------------------------------------------

DEFAULT_GAMMA_GRID = (1.1, 1.15, 1.18, 1.2, 1.22, 1.25, 1.3, 1.4, 5.0 / 3.0, 1.9)


def finite_radius_scan(gamma_grid=DEFAULT_GAMMA_GRID, u_c=1.0, G=1.0):
    """Rows (gamma, finite, r_plus, xi_plus) for exact power laws."""
    rows = []
    for g in gamma_grid:
        if not 1 < g < 2:
            raise DomainError("gamma must lie in (1, 2)")
        prof = integrate_lane_emden(power_law_eos(g), u_c, G)
        xi = prof.r_plus / prof.length_scale if prof.finite else INFINITE
        rows.append({"gamma": float(g), "finite": prof.finite, "r_plus": prof.r_plus, "xi_plus": xi})
    return rows


def interpolated_construction(nu0=54.5, nu1=2.0, u1c=1.0, c=1.0e3, G=1.0, x_target=2.0):
    """The finite-radius example with a very small adiabatic index near vacuum.

    1. Lane-Emden run with rho = u^nu1 from u1c; r* where G x1(r*) = x_target.
    2. u* = u1(r*); index nu1 above u*, nu0 below u*/2.
    3. TOV run with the interpolated law and large c from the same centre.
    Returns a report with r*, x0(r*), r_0+ and the bound r* exp[1/(G x0(r*) - 1)].
    """
    base = integrate_lane_emden(power_law_eos(1.0 + 1.0 / nu1), u1c, G)
    r_star = milne_crossing(base, x_target, G)
    u_star = float(base.state(r_star)[1][0])
    eos = build_eos(nu0, nu1, u_star, K_star=u_star**nu1, c=c)
    prof = integrate_tov(eos, u1c, c=c, G=G)
    x0 = milne_x(prof, r_star)
    bound = r_star * math.exp(1.0 / (G * x0 - 1.0)) if G * x0 > 1 else INFINITE
    return {
        "nu0": nu0,
        "nu1": nu1,
        "c": c,
        "r_star": r_star,
        "u_star": u_star,
        "x1_r_star": x_target / G,
        "x0_r_star": x0,
        "r_plus": prof.r_plus,
        "bound": bound,
        "finite": prof.finite,
        "bound_ok": bool(prof.finite and prof.r_plus < bound),
        "profile": prof,
        "eos": eos,
    }
