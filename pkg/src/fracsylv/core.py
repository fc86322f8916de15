"""Grid and sample containers plus the sup-norm error used throughout.

Dense matrices are plain :class:`numpy.ndarray` objects. Real and complex
arrays are kept apart: promotion is explicit (``astype(complex)``) and
demotion goes through :func:`demote_real`, which refuses to silently drop a
non-negligible imaginary part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import ConsistencyError

__all__ = [
    "TimeGrid",
    "SampledSeries",
    "build_time_grid",
    "sample",
    "inf_error",
    "demote_real",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time nodes ``t_j = j*h`` on ``[0, t_f]`` with ``h = t_f/N``."""

    t_f: float
    N: int

    def __post_init__(self):
        if not np.isfinite(self.t_f) or self.t_f <= 0:
            raise ValueError(f"t_f must be positive, got {self.t_f!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "t_f", float(self.t_f))

    @property
    def h(self) -> float:
        return self.t_f / self.N

    def node(self, j: int) -> float:
        if not 0 <= j <= self.N:
            raise IndexError(f"node index {j} outside [0, {self.N}]")
        if j == self.N:
            return self.t_f
        return j * self.h

    @property
    def nodes(self) -> np.ndarray:
        # j*h rather than cumulative addition: no drift at N ~ 2**20
        t = np.arange(self.N + 1) * self.h
        t[-1] = self.t_f
        t.flags.writeable = False
        return t


def build_time_grid(t_f: float, N: int) -> TimeGrid:
    return TimeGrid(t_f, N)


@dataclass(frozen=True)
class SampledSeries:
    """Samples ``f_0, ..., f_N`` of a function on a :class:`TimeGrid`."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.shape[0] != self.grid.N + 1:
            raise ValueError(
                f"expected {self.grid.N + 1} samples for N={self.grid.N}, got shape {v.shape}"
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.shape[0]


def sample(func: Callable[[np.ndarray], np.ndarray], grid: TimeGrid) -> SampledSeries:
    """Evaluate a vectorized ``func(t)`` on every node of ``grid``."""
    t = grid.nodes
    return SampledSeries(grid, np.broadcast_to(func(t), t.shape))


def inf_error(A, B) -> float:
    """Largest absolute entrywise difference between two equal-shape arrays."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"incompatible shapes {A.shape} and {B.shape}")
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A - B)))


def demote_real(Z: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    """Return ``Z.real`` after checking the imaginary part is negligible."""
    Z = np.asarray(Z)
    if not np.iscomplexobj(Z):
        return Z
    scale = np.max(np.abs(Z.real)) if Z.size else 0.0
    leak = np.max(np.abs(Z.imag)) if Z.size else 0.0
    if leak > rtol * max(scale, np.finfo(float).tiny):
        raise ConsistencyError(
            f"imaginary residue {leak:.3e} exceeds {rtol:g} x |result| = {rtol * scale:.3e}"
        )
    return np.ascontiguousarray(Z.real)
