"""Dense operational matrix of the quadratic Caputo scheme.

``D @ (f_0, ..., f_N)`` reproduces :func:`fracsylv.quadrature.caputo_quadratic`
at every node. The matrix is lower triangular apart from the single entry
``D[1, 2]`` (``f_2`` enters the first-step interpolant), and its first row is
zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SampledSeries, TimeGrid
from .quadrature import FORMS, build_power_table, check_alpha, stable_kernels
from .specfun import gamma_fn

__all__ = ["OperationalMatrix", "build_operational_matrix", "apply", "DEFAULT_MAX_N"]

DEFAULT_MAX_N = 32768


@dataclass(frozen=True)
class OperationalMatrix:
    alpha: float
    grid: TimeGrid
    M: np.ndarray = field(repr=False)
    form: str = "stable"

    def to_csv(self, path) -> Path:
        """Write the matrix row by row (no header) for inspection."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            csv.writer(fh).writerows(self.M.tolist())
        return path


def _literal_lag_weights(alpha: float, N: int):
    tab = build_power_table(alpha, N)
    p1, p2 = tab.p1, tab.p2
    c = 1.0 / (2.0 - alpha)
    r = np.arange(1, N + 1)
    dp2 = p2[r] - p2[r - 1]
    first = (
        c * dp2 - 1.5 * p1[r] + 0.5 * p1[r - 1],
        -2.0 * c * dp2 + 2.0 * p1[r],
        c * dp2 - 0.5 * p1[r] - 0.5 * p1[r - 1],
    )
    k = np.arange(1, N)
    dk = p2[k] - p2[k - 1]
    w1 = c * dk - 0.5 * p1[k] - 0.5 * p1[k - 1]
    w2 = -2.0 * c * dk + 2.0 * p1[k - 1]
    w3 = c * dk + 0.5 * p1[k] - 1.5 * p1[k - 1]
    return first, (w1, w2, w3)


def _stable_lag_weights(alpha: float, N: int):
    # same weights expressed through the bounded kernels; index i <-> lag k = i
    g1, g2 = stable_kernels(alpha, N - 1)
    c = 1.0 / (2.0 - alpha)
    first = (c * g1 - 1.5 * g2, -2.0 * c * g1 + 2.0 * g2, c * g1 - 0.5 * g2)
    h1, h2 = g1[: N - 1], g2[: N - 1]
    return first, (c * h1 - 0.5 * h2, -2.0 * c * h1, c * h1 + 0.5 * h2)


def build_operational_matrix(alpha: float, grid: TimeGrid, *, max_n: int = DEFAULT_MAX_N,
                             form: str = "stable") -> OperationalMatrix:
    """Assemble the ``(N+1) x (N+1)`` Caputo matrix.

    Rows are filled in the order of the reference double loop: the three
    first-step columns are initialised, then each interior interval ``l``
    adds its contributions to columns ``l-1, l, l+1``. Within a row the
    updates are vectorized but applied in that same per-entry order.

    Parameters
    ----------
    alpha : float
        Fractional order in ``(0, 1)``.
    grid : TimeGrid
        Uniform grid with ``N >= 2``.
    max_n : int, optional
        Refuse larger grids; the matrix needs ``8 (N+1)^2`` bytes.
    form : {"stable", "literal"}
        ``"literal"`` evaluates each staggered weight from the power table
        exactly as the reference loop does and is bitwise identical to a
        scalar transcription; its entries lose about ``eps * N^(1-alpha)``
        to cancellation. ``"stable"`` computes the same weights from the
        bounded kernels of :func:`fracsylv.quadrature.stable_kernels`.
    """
    alpha = check_alpha(alpha)
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}, got {form!r}")
    N = grid.N
    if N < 2:
        raise ValueError("the operational matrix needs N >= 2")
    if N > max_n:
        raise ValueError(f"N = {N} exceeds max_n = {max_n} (dense (N+1)^2 storage)")
    if form == "literal":
        first, (w1, w2, w3) = _literal_lag_weights(alpha, N)
    else:
        first, (w1, w2, w3) = _stable_lag_weights(alpha, N)

    D = np.zeros((N + 1, N + 1))
    D[1:, 0], D[1:, 1], D[1:, 2] = first
    for row in range(2, N + 1):
        # intervals l = 1..row-1 pair with weight index row-2..0
        lag = slice(row - 2, None, -1) if row > 2 else slice(0, 1)
        D[row, 2 : row + 1] += w3[lag]
        D[row, 1:row] += w2[lag]
        D[row, 0 : row - 1] += w1[lag]

    D *= grid.h ** (-alpha) / gamma_fn(2.0 - alpha)
    D.flags.writeable = False
    return OperationalMatrix(alpha, grid, D, form)


def apply(opmat: OperationalMatrix, series: SampledSeries) -> np.ndarray:
    """Matrix-vector product ``D @ f``; ``out[0]`` is always 0."""
    if series.grid != opmat.grid:
        raise ValueError(f"grid mismatch: matrix on {opmat.grid}, series on {series.grid}")
    return opmat.M @ series.values
