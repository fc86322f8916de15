"""Convergence studies, speed benchmarks and PDE runs with CSV output."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .cases import BUILTIN_CASES, load_config, make_case
from .core import build_time_grid, sample
from .exceptions import ConfigurationError, ConsistencyError
from .expr import Expression, ParseError
from .fastconv import build_convolution_plan, caputo_fast
from .opmatrix import OperationalMatrix, build_operational_matrix
from .pde import PdeProblem, RealLine, assemble, boundary_residuals, reduction_residual, solve_pde, sup_error
from .quadrature import caputo_linear, caputo_quadratic_batch, check_alpha
from .specfun import caputo_exp2_exact, caputo_monomial_exact

__all__ = [
    "STUDY_COLUMNS",
    "PDE_COLUMNS",
    "METHODS",
    "TestFunction",
    "test_function",
    "StudyRow",
    "StudyResult",
    "fit_slope",
    "run_caputo_study",
    "run_speed_benchmark",
    "PdeReport",
    "run_pde_case",
    "sweep_hermite_scale",
    "write_study_csv",
    "write_pde_csv",
]

STUDY_COLUMNS = ("alpha", "N", "method", "max_error", "runtime_s")
PDE_COLUMNS = (
    "case", "alpha", "nt", "nx", "sup_error", "sylvester_residual",
    "boundary_residual_a", "boundary_residual_b", "runtime_s",
)
METHODS = ("linear", "quadratic", "star", "fft")
DEFAULT_FIT_WINDOW = (8, 9, 10, 11)


@dataclass(frozen=True)
class TestFunction:
    """A sampled function ``f(t)`` with its exact Caputo derivative ``exact(alpha, t)``."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    exact: Callable[[float, np.ndarray], np.ndarray]

    __test__ = False  # not a pytest class


def test_function(spec: str = "exp2t", exact: Optional[str] = None) -> TestFunction:
    """Resolve ``"exp2t"``, ``"monomial:<beta>"`` or an expression in ``t``.

    An expression needs ``exact``: the Caputo derivative as an expression
    in ``t`` and ``alpha``.
    """
    if spec == "exp2t":
        return TestFunction("exp2t", lambda t: np.exp(2.0 * t), caputo_exp2_exact)
    if spec.startswith("monomial"):
        _, _, beta = spec.partition(":")
        try:
            b = float(beta) if beta else 2.0
        except ValueError:
            raise ConfigurationError(f"bad monomial exponent {beta!r}") from None
        if b < 0:
            raise ConfigurationError(f"monomial exponent must be >= 0, got {b}")
        return TestFunction(f"monomial:{b:g}", lambda t: np.asarray(t, dtype=float) ** b,
                            lambda a, t: caputo_monomial_exact(b, a, t))
    if exact is None:
        raise ConfigurationError(
            f"test function {spec!r} has no known Caputo derivative; supply an exact expression"
        )
    try:
        fe = Expression(spec)
        ee = Expression(exact)
    except ParseError as exc:
        raise ConfigurationError(str(exc)) from exc
    return TestFunction(spec, lambda t: fe(t, 0.0),
                        lambda a, t: Expression(exact, a)(t, 0.0))


@dataclass(frozen=True, order=True)
class StudyRow:
    alpha: float
    N: int
    method: str
    max_error: float = field(compare=False)
    runtime_s: float = field(compare=False)


@dataclass
class StudyResult:
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)  # (alpha, method) -> (slope, intercept, rho)
    extra: dict = field(default_factory=dict)

    def errors(self, alpha: float, method: str) -> dict:
        return {r.N: r.max_error for r in self.rows if r.alpha == alpha and r.method == method}


def fit_slope(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Least-squares line through ``(x, y)`` points; returns ``(slope, intercept, rho)``."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise ValueError("fit_slope needs at least two (x, y) points")
    if np.ptp(pts[:, 0]) == 0:
        raise ValueError("fit_slope needs at least two distinct x values")
    res = stats.linregress(pts[:, 0], pts[:, 1])
    rho = float(np.clip(res.rvalue, -1.0, 1.0))
    return float(res.slope), float(res.intercept), rho


def _evaluate(method: str, alpha: float, grid, values: np.ndarray) -> np.ndarray:
    if method == "linear":
        return caputo_linear(grid.nodes, values, alpha)
    if method == "quadratic":
        return caputo_quadratic_batch(values, grid.h, alpha)[0]
    if method == "star":
        return caputo_quadratic_batch(values, grid.h, alpha, star=True)[0]
    if method == "fft":
        from .core import SampledSeries

        return caputo_fast(SampledSeries(grid, values), alpha)
    raise ConfigurationError(f"unknown method {method!r}; choose from {METHODS}")


def _study_cell(alpha, N, method, t_f, tf: TestFunction) -> StudyRow:
    grid = build_time_grid(t_f, N)
    t = grid.nodes
    vals = np.broadcast_to(tf.f(t), t.shape).astype(float)
    ref = np.asarray(tf.exact(alpha, t[1:]), dtype=float)
    t0 = time.perf_counter()
    approx = _evaluate(method, alpha, grid, vals)
    dt = time.perf_counter() - t0
    return StudyRow(alpha, N, method, float(np.max(np.abs(approx[1:] - ref))), dt)


def run_caputo_study(alphas: Iterable[float], Ns: Iterable[int], t_f: float = 1.2,
                     test_fn: TestFunction | str = "exp2t", methods: Iterable[str] = ("quadratic",),
                     fit_window: Iterable[int] = DEFAULT_FIT_WINDOW, threads: int = 1) -> StudyResult:
    """Max-over-nodes errors for every ``(alpha, N, method)`` plus log2-log2 slope fits.

    Slopes use the ``N`` with ``log2(N)`` in ``fit_window``; a fit needs at
    least two such points and is skipped otherwise.
    """
    tf = test_function(test_fn) if isinstance(test_fn, str) else test_fn
    alphas = [check_alpha(a) for a in alphas]
    Ns = [int(n) for n in Ns]
    if any(n < 2 for n in Ns):
        raise ConfigurationError("every N must be >= 2")
    methods = list(methods)
    for m in methods:
        if m not in METHODS:
            raise ConfigurationError(f"unknown method {m!r}; choose from {METHODS}")
    cells = [(a, n, m) for a in alphas for n in Ns for m in methods]
    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda c: _study_cell(*c, t_f, tf), cells))
    else:
        rows = [_study_cell(*c, t_f, tf) for c in cells]
    rows.sort()
    result = StudyResult(rows)
    window = {float(w) for w in fit_window}
    for a in alphas:
        for m in methods:
            pts = [
                (math.log2(r.N), math.log2(r.max_error))
                for r in rows
                if r.alpha == a and r.method == m and math.log2(r.N) in window and r.max_error > 0
            ]
            if len(pts) >= 2:
                result.fits[(a, m)] = fit_slope(pts)
    return result


def run_speed_benchmark(alpha: float, Ns: Iterable[int], t_f: float = 1.2,
                        tol: float = 1e-10) -> StudyResult:
    """Time the direct and FFT evaluators on ``exp(2t)``.

    Outputs are compared before timings are reported; a scaled discrepancy
    above ``tol`` raises :class:`ConsistencyError`. ``extra`` maps each N to
    ``{"speedup": ..., "scaled_diff": ...}``.
    """
    alpha = check_alpha(alpha)
    Ns = [int(n) for n in Ns]
    if Ns != sorted(Ns):
        raise ConfigurationError("Ns must be sorted ascending")
    result = StudyResult()
    for N in Ns:
        grid = build_time_grid(t_f, N)
        s = sample(lambda t: np.exp(2.0 * t), grid)
        ref = caputo_exp2_exact(alpha, grid.nodes[1:])
        t0 = time.perf_counter()
        direct = caputo_quadratic_batch(s.values, grid.h, alpha)[0]
        t1 = time.perf_counter()
        plan = build_convolution_plan(alpha, N)
        fast = caputo_fast(s, alpha, plan)
        t2 = time.perf_counter()
        diff = float(np.max(np.abs(direct - fast)) / max(np.max(np.abs(direct)), np.finfo(float).tiny))
        if diff > tol:
            raise ConsistencyError(f"direct and FFT outputs differ by {diff:.3e} (scaled) at N = {N}")
        result.rows.append(StudyRow(alpha, N, "quadratic", float(np.max(np.abs(direct[1:] - ref))), t1 - t0))
        result.rows.append(StudyRow(alpha, N, "fft", float(np.max(np.abs(fast[1:] - ref))), t2 - t1))
        result.extra[N] = {"speedup": (t1 - t0) / max(t2 - t1, 1e-12), "scaled_diff": diff}
    result.rows.sort()
    return result


@dataclass(frozen=True)
class PdeReport:
    case: str
    alpha: float
    nt: int
    nx: int
    sup_error: float
    sylvester_residual: float
    boundary_residual_a: float
    boundary_residual_b: float
    runtime_s: float
    hermite_scale: Optional[float] = None
    U: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def row(self) -> tuple:
        return tuple(getattr(self, c) for c in PDE_COLUMNS)


def _solve_report(problem: PdeProblem, opmat: Optional[OperationalMatrix] = None,
                  keep_solution: bool = False) -> PdeReport:
    t0 = time.perf_counter()
    red = assemble(problem, opmat)
    U = solve_pde(red)
    dt = time.perf_counter() - t0
    ra, rb = boundary_residuals(red, U)
    b = problem.domain.hermite_scale if isinstance(problem.domain, RealLine) else None
    return PdeReport(
        problem.name, problem.alpha, problem.N_t, problem.domain.nx, sup_error(red, U),
        reduction_residual(red, U), ra, rb, dt, b, U if keep_solution else None,
    )


def run_pde_case(case: str, alpha: Optional[float] = None, N_t: Optional[int] = None,
                 nx: Optional[int] = None, hermite_scale: Optional[float] = None,
                 keep_solution: bool = False) -> PdeReport:
    """Solve a built-in case (``edp1``/``edp2``/``edp3``) or a JSON config file path."""
    if case in BUILTIN_CASES:
        problem = make_case(case, alpha=alpha, N_t=N_t, nx=nx, hermite_scale=hermite_scale)
    else:
        problem = load_config(case, alpha=alpha, N_t=N_t, nx=nx, hermite_scale=hermite_scale)
    return _solve_report(problem, keep_solution=keep_solution)


def sweep_hermite_scale(problem: PdeProblem, scales: Iterable[float]) -> list[PdeReport]:
    """Solve a real-line problem for each Hermite scale, reusing one operational matrix."""
    if not isinstance(problem.domain, RealLine):
        raise ConfigurationError("a Hermite scale sweep needs a real-line problem")
    opmat = build_operational_matrix(problem.alpha, problem.grid)
    out = []
    for b in scales:
        p = PdeProblem(**{**problem.__dict__, "domain": RealLine(problem.domain.nx, float(b))})
        out.append(_solve_report(p, opmat))
    return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(rows: Iterable[tuple], columns: Sequence[str], out) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            Path(out).write_text(text)
    return text


def write_study_csv(result: StudyResult, out=None) -> str:
    """CSV with columns ``alpha,N,method,max_error,runtime_s``; returns the text."""
    rows = [(r.alpha, r.N, r.method, r.max_error, r.runtime_s) for r in sorted(result.rows)]
    return _write(rows, STUDY_COLUMNS, out)


def write_pde_csv(reports: Iterable[PdeReport], out=None) -> str:
    rows = sorted((r.row() for r in reports), key=lambda r: (r[0], r[1], r[2], r[3]))
    return _write(rows, PDE_COLUMNS, out)
