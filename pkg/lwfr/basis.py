# One-dimensional nodal machinery on Gauss-Legendre-Lobatto points.
# Every tensor-product operator in the solver is built from a Basis1D.
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.polynomial import legendre as leg

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

MIN_DEGREE = 1
MAX_DEGREE = 4

NEWTON_TOLERANCE = 1.0e-15
NEWTON_MAX_ITERATIONS = 100


@dataclass(frozen=True)
class Basis1D:
    """GLL nodes, weights, the Lagrange differentiation matrix and the
    Radau correction functions sampled at the nodes.

    ``D[i, j]`` is the derivative of the j-th Lagrange polynomial at node i.
    """

    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    barycentric: np.ndarray
    D: np.ndarray
    gL: np.ndarray
    gR: np.ndarray
    dgL: np.ndarray
    dgR: np.ndarray

    @property
    def size(self):
        # type: () -> int
        return self.degree + 1


def legendre(n, x):
    # type: (int, np.ndarray) -> np.ndarray
    """Legendre polynomial P_n evaluated at x."""
    c = np.zeros(n + 1)
    c[n] = 1.0
    return leg.legval(x, c)


def gll_nodes(N):
    # type: (int) -> Tuple[np.ndarray, np.ndarray]
    """Nodes and weights of the (N+1)-point Gauss-Legendre-Lobatto rule.

    The interior nodes are the roots of P_N'; Newton iteration on
    (1 - x^2) P_N'(x) starting from the Chebyshev-Gauss-Lobatto points.
    """
    x = -np.cos(np.pi * np.arange(N + 1) / N)
    P = np.zeros((N + 1, N + 1))

    for _ in range(NEWTON_MAX_ITERATIONS):
        x_old = x
        P[:, 0] = 1.0
        P[:, 1] = x
        for k in range(2, N + 1):
            P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
        x = x_old - (x * P[:, N] - P[:, N - 1]) / ((N + 1) * P[:, N])
        if np.max(np.abs(x - x_old)) <= NEWTON_TOLERANCE:
            break

    # enforce exact symmetry about 0
    x = 0.5 * (x - x[::-1])
    x[0], x[-1] = -1.0, 1.0
    w = 2.0 / (N * (N + 1) * legendre(N, x) ** 2)
    return x, w


def barycentric_weights(nodes):
    # type: (np.ndarray) -> np.ndarray
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def differentiation_matrix(basis):
    # type: (Basis1D) -> np.ndarray
    """Collocation derivative: ``D @ u`` are the nodal values of the
    derivative of the degree-N interpolant of ``u``.
    """
    return _differentiation_matrix(basis.nodes, basis.barycentric)


def _differentiation_matrix(nodes, lam):
    # type: (np.ndarray, np.ndarray) -> np.ndarray
    n = len(nodes)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = (lam[j] / lam[i]) / (nodes[i] - nodes[j])
        # negative sum trick: rows of D annihilate constants
        D[i, i] = -np.sum(D[i, :])
    return D


def radau_correction(N, nodes):
    # type: (int, np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    """Left/right Radau correction functions and their derivatives at nodes.

    gL = ((-1)^N / 2)(P_N - P_{N+1}) vanishes at +1 and is one at -1;
    gR(x) = gL(-x).
    """
    c_left = np.zeros(N + 2)
    c_left[N] = 0.5 * (-1) ** N
    c_left[N + 1] = 0.5 * (-1) ** (N + 1)
    c_right = np.zeros(N + 2)
    c_right[N] = 0.5
    c_right[N + 1] = 0.5

    gL = leg.legval(nodes, c_left)
    gR = leg.legval(nodes, c_right)
    dgL = leg.legval(nodes, leg.legder(c_left))
    dgR = leg.legval(nodes, leg.legder(c_right))
    return gL, gR, dgL, dgR


def interpolation_matrix(basis, points):
    # type: (Basis1D, np.ndarray) -> np.ndarray
    """Rows evaluate the nodal interpolant at ``points``."""
    points = np.atleast_1d(np.asarray(points, dtype=float))
    diff = points[:, None] - basis.nodes[None, :]
    exact = np.isclose(diff, 0.0, atol=1.0e-15, rtol=0.0)
    diff[exact] = 1.0
    terms = basis.barycentric[None, :] / diff
    V = terms / np.sum(terms, axis=1, keepdims=True)
    hit = np.any(exact, axis=1)
    V[hit] = exact[hit].astype(float)
    return V


def gll_basis(N):
    # type: (int) -> Basis1D
    if not isinstance(N, (int, np.integer)) or isinstance(N, bool):
        raise ConfigurationError("Polynomial degree must be an integer", repr(N))
    if N < MIN_DEGREE or N > MAX_DEGREE:
        raise ConfigurationError("Unsupported polynomial degree",
                                 f"{N} not in [{MIN_DEGREE}, {MAX_DEGREE}]")

    nodes, weights = gll_nodes(int(N))
    lam = barycentric_weights(nodes)
    D = _differentiation_matrix(nodes, lam)
    gL, gR, dgL, dgR = radau_correction(int(N), nodes)
    logger.debug("built GLL basis of degree %d", N)
    return Basis1D(degree=int(N), nodes=nodes, weights=weights, barycentric=lam, D=D,
                   gL=gL, gR=gR, dgL=dgL, dgR=dgR)
