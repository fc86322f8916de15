"""Reproduction checks, shared by the test-suite and ``fracsylv --self-test``.

Each check returns a :class:`CriterionResult`; none of them raise on a
numerical miss, so a report can list every outcome.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cases import EDP1_HERMITE_SCALE, make_edp1, make_edp2, make_edp3
from .core import SampledSeries, build_time_grid, sample
from .fastconv import build_convolution_plan, caputo_fast
from .linalg import SylvesterSystem, schur_decompose, solve_sylvester
from .opmatrix import apply, build_operational_matrix
from .pde import assemble, boundary_residuals, reduction_residual, solve_pde, sup_error
from .quadrature import caputo_linear, caputo_quadratic, caputo_quadratic_batch, caputo_quadratic_star
from .specfun import caputo_exp2_exact, caputo_monomial_exact, gamma_fn, lower_incomplete_gamma, upper_incomplete_gamma
from .study import run_caputo_study, sweep_hermite_scale

__all__ = ["CriterionResult", "CRITERIA", "run_all"]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    runtime_s: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d}. {self.title}: {self.detail} ({self.runtime_s:.2f} s)"


def _timed(number: int, title: str, limit_s: float):
    def wrap(fn: Callable[[], tuple[bool, str]]):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            ok, detail = fn()
            dt = time.perf_counter() - t0
            if dt > limit_s:
                ok = False
                detail += f"; runtime {dt:.1f} s exceeds {limit_s:g} s"
            return CriterionResult(number, title, ok, detail, dt)

        run.number = number
        run.title = title
        return run

    return wrap


def _exp_series(N: int, t_f: float = 1.2):
    return sample(lambda t: np.exp(2.0 * t), build_time_grid(t_f, N))


def _scaled(a, b) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), np.finfo(float).tiny))


@_timed(1, "convergence ratios", 5.0)
def criterion_1():
    target = (2.7403, 2.7574, 2.7698, 2.7769)
    errs = []
    for N in (100, 200, 400, 800, 1600):
        s = _exp_series(N)
        errs.append(abs(caputo_quadratic(s, 0.17)[-1] - caputo_exp2_exact(0.17, 1.2)))
    ratios = [math.log2(errs[i] / errs[i + 1]) for i in range(4)]
    ok = all(abs(r - t) <= 0.02 for r, t in zip(ratios, target))
    return ok, "log2 ratios " + ", ".join(f"{r:.4f}" for r in ratios) + " vs " + ", ".join(map(str, target))


@_timed(2, "first-node errors at N=1600", 5.0)
def criterion_2():
    s = _exp_series(1600)
    ref = caputo_exp2_exact(0.17, s.grid.nodes[1])
    eq = abs(caputo_quadratic(s, 0.17)[1] - ref)
    es = abs(caputo_quadratic_star(s, 0.17)[1] - ref)
    ok = abs(eq / 1.7425e-9 - 1) <= 0.1 and abs(es / 1.3460e-6 - 1) <= 0.1
    return ok, f"quadratic {eq:.4e} (target 1.7425e-09), starred {es:.4e} (target 1.3460e-06), +-10%"


@_timed(3, "order law over alpha", 60.0)
def criterion_3():
    alphas = [round(0.05 + 0.1 * i, 2) for i in range(10)]
    res = run_caputo_study(alphas, [2**k for k in range(8, 12)], methods=["fft"])
    worst_slope, worst_rho, ok = 0.0, -1.0, True
    for a in alphas:
        slope, _, rho = res.fits[(a, "fft")]
        dev = abs(slope + (3 - a))
        worst_slope = max(worst_slope, dev)
        worst_rho = max(worst_rho, rho)
        ok &= dev <= 0.1 and rho <= -0.9999
    return ok, f"max |slope + (3 - alpha)| = {worst_slope:.4f} (<= 0.1), max rho = {worst_rho:.7f} (<= -0.9999)"


@_timed(4, "fast path equivalence and speedup", 30.0)
def criterion_4():
    rng = np.random.default_rng(20240401)
    alpha = 0.5
    worst = 0.0
    for N in (2, 3, 5, 17, 100, 1000):
        for vals in (np.exp(2.0 * build_time_grid(1.2, N).nodes), rng.standard_normal(N + 1)):
            g = build_time_grid(1.2, N)
            d = caputo_quadratic_batch(vals, g.h, alpha)[0]
            f = caputo_fast(SampledSeries(g, vals), alpha)
            worst = max(worst, _scaled(f, d))
    N = 2**17
    g = build_time_grid(1.2, N)
    batch = np.vstack([np.exp(2.0 * g.nodes), rng.standard_normal(N + 1)])
    t0 = time.perf_counter()
    direct = caputo_quadratic_batch(batch, g.h, alpha)
    t_direct = (time.perf_counter() - t0) / batch.shape[0]
    t0 = time.perf_counter()
    plan = build_convolution_plan(alpha, N)
    fast = [caputo_fast(SampledSeries(g, row), alpha, plan) for row in batch]
    t_fast = (time.perf_counter() - t0) / batch.shape[0]
    for f, d in zip(fast, direct):
        worst = max(worst, _scaled(f, d))
    speedup = t_direct / t_fast
    ok = worst <= 1e-10 and speedup >= 10
    return ok, f"max scaled diff {worst:.2e} (<= 1e-10), speedup at 2^17 {speedup:.1f}x (>= 10)"


@_timed(5, "operational matrix equivalence", 20.0)
def criterion_5():
    rng = np.random.default_rng(5)
    worst, worst_row = 0.0, 0.0
    for _ in range(20):
        alpha = float(rng.uniform(0.02, 0.98))
        N = int(rng.integers(2, 2001))
        g = build_time_grid(float(rng.uniform(0.5, 2.0)), N)
        s = sample(lambda t: rng.standard_normal(t.shape), g)
        op = build_operational_matrix(alpha, g)
        worst = max(worst, _scaled(apply(op, s), caputo_quadratic(s, alpha)))
        M = op.M
        rowmax = np.max(np.abs(M[1:]), axis=1)
        worst_row = max(worst_row, float(np.max(np.abs(M[1:].sum(axis=1)) / rowmax)))
    ok = worst <= 1e-12 and worst_row <= 1e-10
    return ok, f"max scaled diff {worst:.2e} (<= 1e-12), max |row sum|/max|row| {worst_row:.2e} (<= 1e-10)"


@_timed(6, "polynomial exactness", 2.0)
def criterion_6():
    worst_const, worst_mono = 0.0, 0.0
    for alpha in (0.1, 0.5, 0.9):
        for N in (2, 7, 64):
            g = build_time_grid(1.3, N)
            one = sample(lambda t: np.ones_like(t), g)
            outs = [
                caputo_quadratic(one, alpha),
                caputo_quadratic_star(one, alpha),
                caputo_linear(g.nodes, one.values, alpha),
                caputo_fast(one, alpha),
            ]
            worst_const = max(worst_const, max(float(np.max(np.abs(o))) for o in outs))
            for beta in (1, 2):
                s = sample(lambda t: t**beta, g)
                ref = caputo_monomial_exact(beta, alpha, g.nodes[1:])
                got = caputo_quadratic(s, alpha)[1:]
                worst_mono = max(worst_mono, float(np.max(np.abs(got - ref) / np.abs(ref))))
    ok = worst_const == 0.0 and worst_mono <= 1e-11
    return ok, f"constants -> max |out| {worst_const:.1e} (== 0), monomials max rel err {worst_mono:.2e} (<= 1e-11)"


@_timed(7, "Sylvester solver", 10.0)
def criterion_7():
    rng = np.random.default_rng(7)
    worst_kron = 0.0
    for n, m in [(1, 1), (2, 2), (3, 5), (10, 4), (20, 20), (40, 10), (100, 4), (25, 16)]:
        A = np.tril(rng.standard_normal((n, n))) + n * np.eye(n)
        if n > 1:
            A[0, 1] = rng.standard_normal()
        B = rng.standard_normal((m, m))
        C = rng.standard_normal((n, m))
        U = solve_sylvester(SylvesterSystem(A, B, C))
        K = np.kron(np.eye(m), A) + np.kron(B.T, np.eye(n))
        ref = np.linalg.solve(K, C.reshape(-1, order="F")).reshape((n, m), order="F")
        worst_kron = max(worst_kron, _scaled(U, ref))
    worst_pde = 0.0
    for p in (make_edp1(N_t=300), make_edp2(N_t=300), make_edp3(0.338, N_t=300)):
        red = assemble(p)
        worst_pde = max(worst_pde, reduction_residual(red, solve_pde(red)))
    worst_schur = 0.0
    for m in range(1, 17):
        B = rng.standard_normal((m, m))
        s = schur_decompose(B)
        R = s.Q @ s.T @ s.Q.conj().T - B
        worst_schur = max(worst_schur, np.abs(R).sum(1).max() / np.abs(B).sum(1).max())
    ok = worst_kron <= 1e-9 and worst_pde <= 1e-8 and worst_schur <= 1e-10
    return ok, (f"Kronecker rel diff {worst_kron:.1e} (<= 1e-9), PDE residual {worst_pde:.1e} (<= 1e-8), "
                f"Schur residual {worst_schur:.1e} (<= 1e-10)")


def _pde(problem):
    red = assemble(problem)
    U = solve_pde(red)
    return sup_error(red, U), reduction_residual(red, U), boundary_residuals(red, U)


@_timed(8, "EDP3 reproduction", 180.0)
def criterion_8():
    targets = {0.1: 2.8880e-11, 0.2: 1.6116e-10, 0.338: 7.2384e-10}
    parts, ok = [], True
    for a, tgt in targets.items():
        t0 = time.perf_counter()
        err, res, _ = _pde(make_edp3(a, N_t=3500, nx=10))
        dt = time.perf_counter() - t0
        within = tgt / 3 <= err <= 3 * tgt and res <= 1e-8 and dt < 60
        ok &= within
        parts.append(f"alpha={a}: {err:.4e} vs {tgt:.4e}")
    return ok, "; ".join(parts) + " (factor 3)"


@_timed(9, "EDP2 reproduction", 60.0)
def criterion_9():
    err, res, (ra, rb) = _pde(make_edp2(0.17, N_t=2700, nx=15))
    tgt = 1.8371e-10
    ok = err <= 1e-8 and tgt / 3 <= err <= 3 * tgt and max(ra, rb) <= 1e-8 and res <= 1e-8
    return ok, (f"sup error {err:.4e} vs {tgt:.4e} (factor 3, ceiling 1e-8), "
                f"boundary residuals {ra:.1e}/{rb:.1e}")


@_timed(10, "EDP1 reproduction", 120.0)
def criterion_10():
    scales = [0.5, 0.6, 0.65, 0.7, EDP1_HERMITE_SCALE, 0.75, 0.8, 0.9, 1.0]
    reports = sweep_hermite_scale(make_edp1(0.17, N_t=2700, nx=16), scales)
    best = min(reports, key=lambda r: r.sup_error)
    tgt = 1.6502e-10
    ok = best.sup_error <= 1e-7 and tgt / 10 <= best.sup_error <= 10 * tgt and best.sylvester_residual <= 1e-8
    return ok, f"best b = {best.hermite_scale:.6f}: sup error {best.sup_error:.4e} vs {tgt:.4e} (factor 10)"


@_timed(11, "special functions", 2.0)
def criterion_11():
    rng = np.random.default_rng(11)
    s = rng.uniform(0.05, 5.0, 200)
    g_rec = float(np.max(np.abs(gamma_fn(s + 1) / (s * gamma_fn(s)) - 1)))
    S, X = np.meshgrid(np.linspace(0.02, 2.0, 50), np.linspace(0.0, 20.0, 50))
    up = upper_incomplete_gamma(S + 1, X)
    rhs = S * upper_incomplete_gamma(S, X) + X**S * np.exp(-X)
    u_rec = float(np.max(np.abs(up / rhs - 1)))
    lo = lower_incomplete_gamma(S + 1, X)
    rhs_lo = S * lower_incomplete_gamma(S, X) - X**S * np.exp(-X)
    mask = lo > 1e-300
    l_rec = float(np.max(np.abs(lo[mask] - rhs_lo[mask]) / lo[mask]))
    x = np.linspace(0.0, 20.0, 401)
    g1 = float(np.max(np.abs(upper_incomplete_gamma(1.0, x) / np.exp(-x) - 1)))
    ok = g_rec <= 1e-11 and u_rec <= 1e-11 and l_rec <= 1e-11 and g1 <= 1e-13
    return ok, (f"Gamma recurrence {g_rec:.1e}, upper recurrence {u_rec:.1e}, lower recurrence {l_rec:.1e} "
                f"(<= 1e-11); Gamma(1,x)/e^-x - 1 {g1:.1e} (<= 1e-13)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


def run_all(echo: Callable[[str], None] | None = print) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        r = crit()
        results.append(r)
        if echo is not None:
            echo(r.line())
    return results

