"""Gauss-Lobatto quadrature and nodal Lagrange differentiation on [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

MAX_DEGREE = 16


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Lobatto rule of degree ``r`` on the reference interval [0, 1].

    ``deriv_matrix[i, j]`` is the derivative at node ``i`` of the Lagrange
    polynomial that equals 1 at node ``j``.
    """

    degree: int
    points: np.ndarray
    weights: np.ndarray
    deriv_matrix: np.ndarray

    @property
    def n_points(self) -> int:
        return self.degree + 1

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def _interior_nodes(r: int, tol: float = 1e-14, max_iter: int = 100) -> np.ndarray:
    # Roots of P'_r on (-1, 1), Newton from Chebyshev-Lobatto guesses.
    coeffs = np.zeros(r + 1)
    coeffs[r] = 1.0
    dp = legendre.legder(coeffs)
    d2p = legendre.legder(coeffs, 2)
    x = -np.cos(np.pi * np.arange(1, r) / r)
    for _ in range(max_iter):
        step = legendre.legval(x, dp) / legendre.legval(x, d2p)
        x = x - step
        if np.all(np.abs(step) < tol):
            break
    else:
        raise RuntimeError(f"Newton iteration for GLL nodes (r={r}) did not converge")
    return np.sort(x)


def lagrange_derivative_matrix(points: np.ndarray | QuadratureRule) -> np.ndarray:
    """Differentiation matrix of the nodal Lagrange basis on ``points``.

    Uses barycentric weights, which is stable for the node sets used here.
    """
    if isinstance(points, QuadratureRule):
        points = points.points
    x = np.asarray(points, dtype=float)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)
    D = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def gll_rule(r: int) -> QuadratureRule:
    """Return the (r+1)-point Gauss-Lobatto rule on [0, 1].

    The rule is exact for polynomials of degree ``2r - 1``.

    Raises:
        ValueError: if ``r`` is outside ``1..MAX_DEGREE``.
    """
    if not isinstance(r, (int, np.integer)) or r < 1 or r > MAX_DEGREE:
        raise ValueError(f"GLL degree must be an integer in 1..{MAX_DEGREE}, got {r!r}")
    r = int(r)
    ref = np.concatenate(([-1.0], _interior_nodes(r), [1.0]))
    coeffs = np.zeros(r + 1)
    coeffs[r] = 1.0
    pr = legendre.legval(ref, coeffs)
    ref_weights = 2.0 / (r * (r + 1) * pr**2)

    # Symmetrize to remove the last bits of Newton asymmetry.
    ref = 0.5 * (ref - ref[::-1])
    ref_weights = 0.5 * (ref_weights + ref_weights[::-1])

    points = 0.5 * (ref + 1.0)
    points[0], points[-1] = 0.0, 1.0
    weights = 0.5 * ref_weights
    points.setflags(write=False)
    weights.setflags(write=False)
    D = lagrange_derivative_matrix(points)
    D.setflags(write=False)
    return QuadratureRule(degree=r, points=points, weights=weights, deriv_matrix=D)


def lagrange_basis(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate every Lagrange polynomial on ``points`` at ``x``.

    Returns an array of shape ``(len(x), len(points))``.
    """
    points = np.asarray(points, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(points)
    out = np.ones((len(x), n))
    for j in range(n):
        for k in range(n):
            if k != j:
                out[:, j] *= (x - points[k]) / (points[j] - points[k])
    return out
