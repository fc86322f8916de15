"""Radix-2 FFT, discrete convolutions and the O(N log N) Caputo evaluator.

The history sum of the quadratic scheme is a sum of aperiodic convolutions
(three in the literal form, two in the regrouped stable form). Zero-padding
them to a period ``P >= 2N - 3`` turns each into a periodic convolution that
the discrete convolution theorem evaluates with FFTs. Kernel spectra depend
only on ``(alpha, N)`` and are cached in a :class:`ConvolutionPlan`, so one
evaluation costs one forward transform per kernel and a single inverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import SampledSeries
from .quadrature import FORMS, build_power_table, check_alpha, stable_kernels
from .specfun import gamma_fn

__all__ = [
    "dft",
    "idft",
    "PeriodicSequence",
    "periodic_convolve",
    "aperiodic_convolve",
    "ConvolutionPlan",
    "build_convolution_plan",
    "caputo_fast",
    "next_pow2",
]


def next_pow2(n: int) -> int:
    """Smallest power of two ``>= n`` (and ``>= 1``)."""
    return 1 if n <= 1 else 1 << (int(n) - 1).bit_length()


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@lru_cache(maxsize=32)
def _bitrev(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


@lru_cache(maxsize=32)
def _twiddles(n: int) -> np.ndarray:
    # exp(-2 pi i k / n), k < n/2, each entry computed directly (no recurrence)
    return np.exp(-2j * np.pi * np.arange(n // 2) / n)


def _fft_radix2(a: np.ndarray) -> np.ndarray:
    """Iterative decimation-in-time FFT, vectorized across butterflies."""
    n = a.shape[0]
    x = a[_bitrev(n)].astype(complex)
    table = _twiddles(n)
    size = 2
    while size <= n:
        half = size // 2
        w = table[:: n // size]
        blocks = x.reshape(-1, size)
        even = blocks[:, :half]
        odd = blocks[:, half:] * w
        x = np.concatenate((even + odd, even - odd), axis=1).ravel()
        size *= 2
    return x


def _dft_direct(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ a


def dft(values) -> np.ndarray:
    """Discrete Fourier transform ``hat a_k = sum_j a_j exp(-2 pi i j k / P)``.

    Power-of-two lengths use the radix-2 FFT; other lengths fall back to
    direct O(P^2) summation.
    """
    a = np.asarray(values, dtype=complex)
    if a.ndim != 1 or a.shape[0] < 1:
        raise ValueError("dft expects a non-empty 1-d sequence")
    if _is_pow2(a.shape[0]):
        return _fft_radix2(a)
    return _dft_direct(a)


def idft(values) -> np.ndarray:
    """Inverse transform, ``a_j = (1/P) sum_k hat a_k exp(2 pi i j k / P)``."""
    a = np.asarray(values, dtype=complex)
    return np.conj(dft(np.conj(a))) / a.shape[0]


@dataclass(frozen=True)
class PeriodicSequence:
    """One period ``a_0 .. a_{P-1}`` of a P-periodic complex sequence."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim != 1 or v.shape[0] < 1:
            raise ValueError("a periodic sequence needs at least one value per period")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def period(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, j: int) -> complex:
        return self.values[j % self.period]


def periodic_convolve(a: PeriodicSequence, b: PeriodicSequence) -> PeriodicSequence:
    """Circular convolution ``(a*b)_j = sum_l a_l b_{j-l}`` via the convolution theorem."""
    if a.period != b.period:
        raise ValueError(f"period mismatch: {a.period} vs {b.period}")
    return PeriodicSequence(idft(dft(a.values) * dft(b.values)))


def aperiodic_convolve(a, b) -> np.ndarray:
    """``c_j = sum_{l=0}^{M-1} a_l b_{j-l}`` for ``0 <= j < M``.

    Parameters
    ----------
    a : array_like, length M
    b : array_like, length 2M - 1
        Kernel values ``b_{-M+1}, ..., b_{M-1}``; ``b[k + M - 1]`` holds ``b_k``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    M = a.shape[0]
    if M < 1 or b.shape != (2 * M - 1,):
        raise ValueError("need len(a) = M >= 1 and len(b) = 2M - 1")
    P = next_pow2(2 * M - 1)
    at = np.zeros(P, dtype=complex)
    at[:M] = a
    bt = np.zeros(P, dtype=complex)
    bt[:M] = b[M - 1 :]
    if M > 1:
        bt[P - M + 1 :] = b[: M - 1]
    c = idft(dft(at) * dft(bt))[:M]
    if not (np.iscomplexobj(a) or np.iscomplexobj(b)):
        return c.real.copy()
    return c


@dataclass(frozen=True)
class ConvolutionPlan:
    """Kernel spectra for the fast Caputo evaluator at fixed ``(alpha, N)``.

    ``form="literal"`` caches the three power-law kernels of the quadratic
    interpolants; ``form="stable"`` caches the two bounded kernels of
    :func:`fracsylv.quadrature.stable_kernels` (same weights, regrouped).
    """

    alpha: float
    N: int
    P: int
    form: str
    kernel_spectra: np.ndarray = field(repr=False)
    first_kernels: np.ndarray = field(repr=False)


def build_convolution_plan(alpha: float, N: int, form: str = "stable") -> ConvolutionPlan:
    alpha = check_alpha(alpha)
    if N < 2:
        raise ValueError("the fast evaluator needs N >= 2")
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}, got {form!r}")
    M = N - 1
    P = next_pow2(2 * N - 3)
    if form == "stable":
        g1, g2 = stable_kernels(alpha, N - 1)
        kern = np.zeros((2, P))
        kern[0, :M] = g1[:M]
        kern[1, :M] = g2[:M]
        first = np.stack([g1, g2])
    else:
        tab = build_power_table(alpha, N)
        kern = np.zeros((3, P))
        kern[0, :M] = tab.p2[1 : M + 1] - tab.p2[:M]
        kern[1, :M] = tab.p1[1 : M + 1]
        kern[2, :M] = tab.p1[:M]
        first = np.stack([tab.p2[1:] - tab.p2[:-1], tab.p1[1:], tab.p1[:-1]])
    spectra = np.stack([dft(k) for k in kern])
    spectra.flags.writeable = False
    first.flags.writeable = False
    return ConvolutionPlan(alpha, N, P, form, spectra, first)


def caputo_fast(series: SampledSeries, alpha: float, plan: ConvolutionPlan | None = None) -> np.ndarray:
    """FFT evaluation of :func:`fracsylv.quadrature.caputo_quadratic`.

    Same weights as the direct scheme of the plan's ``form``, different
    summation order; cost O(N log N). Pass a prebuilt ``plan`` to reuse the
    kernel spectra across many series with the same ``(alpha, N)``.
    """
    alpha = check_alpha(alpha)
    N = series.grid.N
    if plan is None:
        plan = build_convolution_plan(alpha, N)
    if plan.N != N or plan.alpha != alpha:
        raise ValueError(
            f"plan built for (alpha={plan.alpha}, N={plan.N}), series has (alpha={alpha}, N={N})"
        )
    f = series.values
    M = N - 1
    m = plan.kernel_spectra.shape[0]
    coeffs = np.zeros((m, plan.P))
    if m == 2:
        # first differences keep constant data exactly zero
        d = np.diff(f)
        dm, dp = d[:M], d[1:]
        coeffs[0, :M] = (dp - dm) / (2.0 - alpha)
        coeffs[1, :M] = (dp + dm) / 2.0
    else:
        fm, f0, fp = f[:M], f[1 : M + 1], f[2:]
        coeffs[0, :M] = (fp - 2.0 * f0 + fm) / (2.0 - alpha)
        coeffs[1, :M] = (fp - fm) / 2.0
        coeffs[2, :M] = -(3.0 * fp - 4.0 * f0 + fm) / 2.0
    # linearity: sum the product spectra, invert once
    spec = sum(dft(coeffs[i]) * plan.kernel_spectra[i] for i in range(m))
    hist = idft(spec).real[:M]

    k = plan.first_kernels
    out = np.zeros(N + 1)
    if m == 3:
        A = (f[2] - 2.0 * f[1] + f[0]) / (2.0 - alpha)
        B = -(f[2] - 4.0 * f[1] + 3.0 * f[0]) / 2.0
        out[1:] = A * k[0] + B * k[1] - (f[2] - f[0]) / 2.0 * k[2]
    else:
        d0, d1 = f[1] - f[0], f[2] - f[1]
        out[1:] = (d1 - d0) / (2.0 - alpha) * k[0, :N] - (d1 - 3.0 * d0) / 2.0 * k[1, :N]
    out[2:] += hist
    out *= series.grid.h ** (-alpha) / gamma_fn(2.0 - alpha)
    return out
