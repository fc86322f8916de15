"""Chebyshev and Hermite collocation derivatives.

Matrices are stored transposed (``Dx = D1.T``) because the solution matrix
``U`` carries time along rows and space along columns, so spatial
derivatives act from the right: ``U @ Dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NonConvergenceError

__all__ = [
    "SpectralDiscretization",
    "chebyshev_discretization",
    "hermite_discretization",
    "hermite_roots",
    "weighted_poldif",
]


@dataclass(frozen=True)
class SpectralDiscretization:
    kind: str
    nodes: np.ndarray = field(repr=False)
    Dx: np.ndarray = field(repr=False)
    Dx2: np.ndarray = field(repr=False)
    scale: tuple | float

    def __post_init__(self):
        for name in ("nodes", "Dx", "Dx2"):
            a = np.array(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def D1(self) -> np.ndarray:
        """Untransposed first-derivative matrix (acts on column vectors)."""
        return self.Dx.T

    @property
    def D2(self) -> np.ndarray:
        return self.Dx2.T


def chebyshev_discretization(N_x: int, x_a: float, x_b: float) -> SpectralDiscretization:
    """Chebyshev extrema grid on ``[x_a, x_b]`` with ``N_x + 1`` nodes.

    Nodes run from ``x_b`` down to ``x_a``. ``Dx2`` is the square of the
    first-derivative matrix.
    """
    if int(N_x) != N_x or N_x < 1:
        raise ValueError(f"N_x must be an integer >= 1, got {N_x!r}")
    x_a, x_b = float(x_a), float(x_b)
    if not (np.isfinite(x_a) and np.isfinite(x_b)) or not x_b > x_a:
        raise ValueError(f"need finite x_a < x_b, got [{x_a}, {x_b}]")
    N = int(N_x)
    j = np.arange(N + 1)
    x = np.cos(np.pi * j / N)
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** j
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    half = (x_b - x_a) / 2.0
    nodes = (x_a + x_b) / 2.0 + half * x
    nodes[0], nodes[-1] = x_b, x_a
    D1 = D / half
    return SpectralDiscretization("chebyshev", nodes, D1.T, (D1 @ D1).T, (x_a, x_b))


def hermite_roots(n: int, tol: float = 1e-14, max_iter: int = 100) -> np.ndarray:
    """Roots of the physicists' Hermite polynomial ``H_n``, ascending.

    Newton iteration on the orthonormal three-term recurrence, seeded with
    the classical asymptotic guesses for the largest roots.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    z = np.zeros((n + 1) // 2)
    pim4 = math.pi ** -0.25
    for i in range(z.shape[0]):
        if i == 0:
            g = math.sqrt(2 * n + 1) - 1.85575 * (2 * n + 1) ** (-1 / 6)
        elif i == 1:
            g = z[0] - 1.14 * n**0.426 / z[0]
        elif i == 2:
            g = 1.86 * z[1] - 0.86 * z[0]
        elif i == 3:
            g = 1.91 * z[2] - 0.91 * z[1]
        else:
            g = 2.0 * z[i - 1] - z[i - 2]
        for _ in range(max_iter):
            p1, p2 = pim4, 0.0
            for k in range(1, n + 1):
                p3, p2 = p2, p1
                p1 = g * math.sqrt(2.0 / k) * p2 - math.sqrt((k - 1) / k) * p3
            step = p1 / (math.sqrt(2.0 * n) * p2)
            g -= step
            if abs(step) <= tol * max(1.0, abs(g)):
                break
        else:
            raise NonConvergenceError(f"Newton iteration for root {i} of H_{n} did not converge")
        z[i] = g
    if n % 2:
        z[-1] = 0.0
    return np.sort(np.concatenate([-z, z[: n // 2]]))


def weighted_poldif(x: np.ndarray, weight: np.ndarray, beta: np.ndarray) -> list[np.ndarray]:
    """Derivative matrices of the weighted interpolant ``w(x) p(x)``.

    ``beta[l-1]`` holds ``w^(l)(x_j) / w(x_j)`` at the nodes. Returns the
    first ``len(beta)`` derivative matrices.
    """
    N = x.shape[0]
    eye = np.eye(N, dtype=bool)
    DX = x[:, None] - x[None, :]
    DX[eye] = 1.0
    c = weight * np.prod(DX, axis=1)
    C = c[:, None] / c[None, :]
    Z = 1.0 / DX
    Z[eye] = 0.0
    X = Z[~eye].reshape(N, N - 1).T
    Y = np.ones((N - 1, N))
    D = np.eye(N)
    out = []
    for ell in range(1, beta.shape[0] + 1):
        Y = np.cumsum(np.vstack([beta[ell - 1][None, :], ell * Y[: N - 1] * X]), axis=0)
        D = ell * Z * (C * np.diag(D)[:, None] - D)
        D[eye] = Y[N - 1]
        out.append(D)
    return out


def hermite_discretization(N_x: int, b: float = 1.0) -> SpectralDiscretization:
    """Hermite collocation on ``N_x`` scaled roots ``b * x_j`` of ``H_{N_x}``.

    The interpolant carries the factor ``exp(-x^2 / (2 b^2))``; derivative
    matrices are those of the unit problem divided by ``b`` and ``b^2``.
    """
    if int(N_x) != N_x or N_x < 2:
        raise ValueError(f"N_x must be an integer >= 2, got {N_x!r}")
    b = float(b)
    if not np.isfinite(b) or b <= 0:
        raise ValueError(f"Hermite scale must be positive, got {b!r}")
    x = hermite_roots(int(N_x))
    weight = np.exp(-(x**2) / 2.0)
    beta = np.empty((2, x.shape[0]))
    beta[0] = -x
    beta[1] = x * x - 1.0
    D1, D2 = weighted_poldif(x, weight, beta)
    D1 = D1 / b
    D2 = D2 / (b * b)
    return SpectralDiscretization("hermite", b * x, D1.T, D2.T, b)
