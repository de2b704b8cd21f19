"""Global polynomial space on [0, 1] for the measure x^(3/2) (1-x)^(N/2-1) dx.

Functions are stored by their coefficients in the orthonormal Jacobi
polynomials P_0, ..., P_{M-1}.  These polynomials diagonalize the principal
part of the degenerate operator: -Lambda P_n = n (n + (N+3)/2) P_n.
"""
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import DomainError, PreconditionError
from .specfun_basis import gauss_jacobi_rule, orthonormal_jacobi
from .weighted_calculus import BREAKS, CUTOFF_ORDER, Chart, GridFunction, _piece_map, ladder, split

__all__ = ["JacobiSpace", "jacobi_space"]


class JacobiSpace:
    """Spectral space of dimension M with an over-integration quadrature."""

    def __init__(self, N, M, extra_nodes=16):
        if N <= 4:
            raise PreconditionError("N must exceed 4")
        if int(M) != M or M < 2:
            raise DomainError("space dimension must be an integer >= 2")
        self.N = float(N)
        self.M = int(M)
        self.p = 1.5
        self.q = self.N / 2.0 - 1.0
        self.rule = gauss_jacobi_rule(self.M, self.p, self.q)
        self.qrule = gauss_jacobi_rule(2 * self.M + extra_nodes, self.p, self.q)
        self.xq = self.qrule.nodes
        self.wq = self.qrule.weights
        vals = orthonormal_jacobi(self.M, self.p, self.q, self.xq, deriv=2)
        self.Vq, self.Vq1, self.Vq2 = vals[0], vals[1], vals[2]
        n = np.arange(self.M, dtype=float)
        self.eigenvalues = n * (n + (self.N + 3.0) / 2.0)
        # coefficient-space derivative matrix, exact for degree < M
        self.Dmat = self.project(self.Vq1)

    # transforms ----------------------------------------------------------
    def basis(self, x, deriv=0):
        return orthonormal_jacobi(self.M, self.p, self.q, x, deriv)

    def values(self, c, x=None, deriv=0):
        """Values (or derivative) of coefficient arrays c[..., M] at x."""
        if x is None:
            V = (self.Vq, self.Vq1, self.Vq2)[deriv]
        else:
            V = self.basis(x, deriv)[deriv]
        return np.asarray(c) @ V.T

    def project(self, values):
        """Weighted L^2 projection of values at the quadrature nodes.

        values has the node index first; extra trailing axes are kept.
        """
        values = np.asarray(values, dtype=float)
        return np.tensordot(self.Vq * self.wq[:, None], values, axes=(0, 0))

    def project_rows(self, values):
        """Projection of values[..., nq] (node index last)."""
        return np.asarray(values) @ (self.Vq * self.wq[:, None])

    def interpolate(self, func):
        return self.project_rows(np.asarray(func(self.xq), dtype=float))

    def inner(self, f_vals, g_vals):
        """Weighted inner product of node values."""
        return float(np.sum(self.wq * f_vals * g_vals))

    def gridfunction(self, c):
        """Exact piecewise representation of the polynomial with coefficients c."""
        c = np.asarray(c, dtype=float)
        pieces = []
        for i in range(len(BREAKS) - 1):
            E = _piece_interp_matrix(self.N, self.M, i)
            pieces.append({0.0: E @ c})
        return GridFunction(Chart(0, self.N), tuple(pieces))

    # chart features ------------------------------------------------------
    def features(self, tag, ell):
        """Matrix F with <(cut P c)^[tag]>_ell = ||F c||_2 for every c."""
        return _ladder_features(self.N, self.M, int(tag), int(ell))

    def ladder_values(self, c, tag, ell):
        """<u^[tag]>_ell for coefficient rows c[..., M]."""
        F = self.features(tag, ell)
        return np.linalg.norm(np.asarray(c) @ F.T, axis=-1)


@lru_cache(maxsize=16)
def jacobi_space(N, M):
    return JacobiSpace(float(N), int(M))


@lru_cache(maxsize=64)
def _piece_interp_matrix(N, M, i):
    _, _, mid, half = _piece_map(i)
    deg = M - 1
    t = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
    V = orthonormal_jacobi(M, 1.5, N / 2.0 - 1.0, mid + half * t)[0]
    T = C.chebvander(t, deg)
    return np.linalg.solve(T, V)


@lru_cache(maxsize=256)
def _ladder_features(N, M, tag, ell):
    from .specfun_basis import gauss_legendre_rule

    space = jacobi_space(N, M)
    s = 0.5 if ell % 2 else 0.0
    chart = Chart(tag, N)
    p = chart.p
    n_nodes = M + 2 * CUTOFF_ORDER + 8
    nodes, weights, scale = [], [], []
    # charts are supported in X <= 2/3: pieces 0, 1, 2
    for i in range(3):
        a, b, _, _ = _piece_map(i)
        if a == 0.0:
            rule = gauss_jacobi_rule(n_nodes, p + 2.0 * s, 0.0)
            X = b * rule.nodes
            nodes.append(X)
            weights.append(b ** (p + 2.0 * s + 1.0) * rule.weights)
            scale.append(X ** (-s))
        else:
            X, w = gauss_legendre_rule(n_nodes, a, b)
            nodes.append(X)
            weights.append(w * X**p)
            scale.append(np.ones_like(X))
    X = np.concatenate(nodes)
    sw = np.sqrt(np.concatenate(weights)) * np.concatenate(scale)
    F = np.empty((X.size, M))
    for j in range(M):
        e = np.zeros(M)
        e[j] = 1.0
        part = split(space.gridfunction(e))[tag]
        F[:, j] = sw * ladder(part, ell)(X)
    F.setflags(write=False)
    return F
