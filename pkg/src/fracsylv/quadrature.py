"""Direct (O(N^2)) evaluation of Caputo derivatives at every grid node.

Three schemes are provided:

* :func:`caputo_linear` -- piecewise-linear interpolation, order ``2 - alpha``,
  valid on arbitrary increasing partitions;
* :func:`caputo_quadratic` -- piecewise-quadratic interpolation, order
  ``3 - alpha``, with a quadratic through ``f_0, f_1, f_2`` on the first step;
* :func:`caputo_quadratic_star` -- the same but linear on the first step.

The direct evaluators double as the correctness oracle for the FFT path in
:mod:`fracsylv.fastconv`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SampledSeries
from .specfun import gamma_fn

__all__ = [
    "PowerTable",
    "build_power_table",
    "check_alpha",
    "caputo_linear",
    "caputo_quadratic",
    "caputo_quadratic_star",
    "caputo_quadratic_batch",
    "stable_kernels",
]


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    return alpha


@dataclass(frozen=True)
class PowerTable:
    """``p1[j] = j**(1-alpha)`` and ``p2[j] = j**(2-alpha)`` for ``0 <= j <= N``."""

    alpha: float
    p1: np.ndarray
    p2: np.ndarray

    @property
    def N(self) -> int:
        return self.p1.shape[0] - 1


def build_power_table(alpha: float, N: int) -> PowerTable:
    if N < 0:
        raise ValueError("N must be >= 0")
    j = np.arange(N + 1, dtype=float)
    p1 = j ** (1.0 - alpha)
    p2 = j ** (2.0 - alpha)
    p1.flags.writeable = False
    p2.flags.writeable = False
    return PowerTable(float(alpha), p1, p2)


def caputo_linear(nodes, values, alpha: float) -> np.ndarray:
    """Order ``2 - alpha`` scheme on a (possibly nonuniform) partition.

    Parameters
    ----------
    nodes : array_like
        Strictly increasing time nodes with ``nodes[0] == 0``.
    values : array_like
        Function samples at ``nodes``.
    alpha : float
        Fractional order in ``(0, 1)``.
    """
    alpha = check_alpha(alpha)
    t = np.asarray(nodes, dtype=float)
    f = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != f.shape:
        raise ValueError("nodes and values must be 1-d arrays of equal length")
    if t[0] != 0.0:
        raise ValueError("nodes must start at 0")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise ValueError("nodes must be strictly increasing")
    slope = np.diff(f) / dt
    out = np.zeros_like(t)
    e = 1.0 - alpha
    for j in range(1, t.shape[0]):
        dist = t[j] - t[: j + 1]
        dist[-1] = 0.0
        w = dist[:-1] ** e - dist[1:] ** e
        out[j] = slope[:j] @ w
    return out / gamma_fn(2.0 - alpha)


def stable_kernels(alpha: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Bounded history kernels at lags ``k = 0..N``.

    ``g1[k] = (k+1)^(2-a) - k^(2-a) - (2-a) k^(1-a)`` and
    ``g2[k] = (k+1)^(1-a) - k^(1-a)``. Both are O(k^-a), evaluated without
    forming the O(k^(2-a)) differences explicitly.
    """
    b1, b2 = 2.0 - alpha, 1.0 - alpha
    g1 = np.ones(N + 1)
    g2 = np.ones(N + 1)
    k = np.arange(1, N + 1, dtype=float)
    g2[1:] = k**b2 * np.expm1(b2 * np.log1p(1.0 / k))
    small = k < 8
    ks = k[small]
    g1[1:][small] = (ks + 1.0) ** b1 - ks**b1 - b1 * ks**b2
    # binomial tail sum_{n>=2} C(b1, n) u^n, u = 1/k <= 1/8
    u = 1.0 / k[~small]
    coef = b1 * (b1 - 1.0) / 2.0
    upow = u * u
    tail = coef * upow
    for n in range(2, 40):
        coef *= (b1 - n) / (n + 1)
        upow = upow * u
        tail += coef * upow
    g1[1:][~small] = k[~small] ** b1 * tail
    return g1, g2


def _coefficients(f: np.ndarray, alpha: float, form: str) -> np.ndarray:
    """Interval coefficients for l = 1..N-1, shape ``(N-1, m, S)``.

    ``f`` has shape ``(S, N+1)``. The literal form carries the three
    coefficients of each quadratic interpolant; the stable form folds the
    third into the first two using ``A2 + A3 = -(2-a) A1``.
    """
    if form == "stable":
        # first differences: constant data cancels exactly
        d = np.diff(f, axis=1).T
        dm, dp = d[:-1], d[1:]
        w = np.empty((dm.shape[0], 2, dm.shape[1]))
        w[:, 0] = (dp - dm) / (2.0 - alpha)
        w[:, 1] = (dp + dm) / 2.0
        return w
    fm, f0, fp = f[:, :-2].T, f[:, 1:-1].T, f[:, 2:].T
    w = np.empty((fm.shape[0], 3, fm.shape[1]))
    w[:, 0] = (fp - 2.0 * f0 + fm) / (2.0 - alpha)
    w[:, 1] = (fp - fm) / 2.0
    w[:, 2] = -(3.0 * fp - 4.0 * f0 + fm) / 2.0
    return w


def _lag_kernels(alpha: float, N: int, form: str) -> np.ndarray:
    """Kernel rows indexed by lag ``k = j - l - 1``, shape ``(N, m)``."""
    if form == "stable":
        g1, g2 = stable_kernels(alpha, N - 1)
        return np.stack([g1, g2], axis=1)
    tab = build_power_table(alpha, N)
    k = np.arange(N)
    return np.stack([tab.p2[k + 1] - tab.p2[k], tab.p1[k + 1], tab.p1[k]], axis=1)


def _history_sums(f: np.ndarray, alpha: float, form: str, compensated: bool) -> np.ndarray:
    """``sum_{l=1}^{j-1}`` contributions of the interior intervals, for every j."""
    S, N = f.shape[0], f.shape[1] - 1
    w = _coefficients(f, alpha, form)
    m = w.shape[1]
    wf = w.reshape(-1, S)
    # reversed so the lags j-2, ..., 0 paired with l = 1, ..., j-1 form a contiguous slice
    kf = _lag_kernels(alpha, N, form)[::-1].ravel()
    kf = np.ascontiguousarray(kf)
    out = np.zeros((S, N + 1))
    for j in range(2, N + 1):
        a = wf[: m * (j - 1)]
        b = kf[m * (N - j + 1) :]
        if compensated:
            out[:, j] = [math.fsum(col * b) for col in a.T]
        else:
            out[:, j] = b @ a
    return out


def _first_interval(f: np.ndarray, alpha: float, form: str, star: bool) -> np.ndarray:
    """Contribution of ``[t_0, t_1]`` to nodes j = 1..N (unscaled), shape ``(S, N)``."""
    N = f.shape[1] - 1
    d0, d1 = f[:, 1:2] - f[:, :1], f[:, 2:3] - f[:, 1:2]
    if form == "stable":
        g1, g2 = stable_kernels(alpha, N - 1)
        if star:
            return d0 * g2
        return (d1 - d0) / (2.0 - alpha) * g1 - (d1 - 3.0 * d0) / 2.0 * g2
    f0, f1, f2 = f[:, :1], f[:, 1:2], f[:, 2:3]
    tab = build_power_table(alpha, N)
    p1, p2 = tab.p1, tab.p2
    if star:
        return (f1 - f0) * (p1[1:] - p1[:-1])
    return (
        (f2 - 2.0 * f1 + f0) / (2.0 - alpha) * (p2[1:] - p2[:-1])
        - (f2 - 4.0 * f1 + 3.0 * f0) / 2.0 * p1[1:]
        - (f2 - f0) / 2.0 * p1[:-1]
    )


FORMS = ("stable", "literal")


def _direct(values, h: float, alpha: float, star: bool, form: str, compensated: bool) -> np.ndarray:
    alpha = check_alpha(alpha)
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}, got {form!r}")
    f = np.atleast_2d(np.asarray(values, dtype=float))
    N = f.shape[1] - 1
    if N < 2:
        raise ValueError("quadratic schemes need N >= 2 (samples f_0, f_1, f_2)")
    out = _history_sums(f, alpha, form, compensated)
    out[:, 1:] += _first_interval(f, alpha, form, star)
    out *= h ** (-alpha) / gamma_fn(2.0 - alpha)
    out[:, 0] = 0.0
    return out


def caputo_quadratic_batch(values, h: float, alpha: float, *, star: bool = False,
                           form: str = "stable", compensated: bool = False) -> np.ndarray:
    """Direct scheme applied to each row of ``values`` (shape ``(S, N+1)``).

    All rows share one pass over the kernel, which is what makes the O(N^2)
    path affordable for several series at large N.
    """
    return _direct(values, h, alpha, star, form, compensated)


def caputo_quadratic(series: SampledSeries, alpha: float, *, form: str = "stable",
                     compensated: bool = False) -> np.ndarray:
    """Order ``3 - alpha`` approximation of the Caputo derivative at all nodes.

    Each interval ``[t_l, t_{l+1}]`` with ``l >= 1`` uses the quadratic through
    ``f_{l-1}, f_l, f_{l+1}``; the first interval uses the quadratic through
    ``f_0, f_1, f_2``, so the scheme is exact for polynomials of degree <= 2.

    Parameters
    ----------
    series : SampledSeries
        Samples on a uniform grid with ``N >= 2``.
    alpha : float
        Fractional order in ``(0, 1)``.
    form : {"stable", "literal"}
        ``"literal"`` sums the three power-law kernels of each interpolant as
        written, whose terms grow like ``N^(1-alpha)`` and cancel; roundoff
        then grows with N. ``"stable"`` regroups the same weights onto two
        bounded kernels (see :func:`stable_kernels`).
    compensated : bool, optional
        Sum each node's history exactly (``math.fsum``) instead of in plain
        double precision. Slower; meant for roundoff-floor studies.

    Returns
    -------
    numpy.ndarray
        Length ``N + 1`` vector, ``out[0] == 0``.
    """
    g = series.grid
    return _direct(series.values, g.h, alpha, False, form, compensated)[0]


def caputo_quadratic_star(series: SampledSeries, alpha: float, *, form: str = "stable",
                          compensated: bool = False) -> np.ndarray:
    """As :func:`caputo_quadratic` but with the linear interpolant on ``[t_0, t_1]``."""
    g = series.grid
    return _direct(series.values, g.h, alpha, True, form, compensated)[0]
