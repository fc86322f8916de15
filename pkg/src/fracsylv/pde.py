"""Time-fractional advection-diffusion problems reduced to Sylvester equations.

The model is

    D_t^a u = a1(x) u_xx + a2(x) u_x + a3(x) u + a4(t, x),   u(0, x) = u0(x),

collocated in time by the operational matrix and in space by a spectral
differentiation matrix. With time along rows of ``U`` and space along
columns, the discrete equation reads ``D U = U B_x + A4``. The known first
row (initial data) and, on an interval, the two boundary columns are
eliminated, leaving ``A U_in + U_in B = C`` for the unknown block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .core import TimeGrid
from .exceptions import IllPosedBoundaryError
from .linalg import GramFactor, SylvesterSystem, solve_sylvester, sylvester_residual
from .opmatrix import OperationalMatrix, build_operational_matrix
from .spectral import SpectralDiscretization, chebyshev_discretization, hermite_discretization

__all__ = [
    "RealLine",
    "Interval",
    "BoundaryConditions",
    "PdeProblem",
    "AssembledReduction",
    "assemble",
    "assemble_unbounded",
    "assemble_bounded",
    "solve_pde",
    "boundary_residuals",
    "reduction_residual",
    "sup_error",
]

FuncX = Callable[[np.ndarray], np.ndarray]
FuncT = Callable[[np.ndarray], np.ndarray]
FuncTX = Callable[[np.ndarray, np.ndarray], np.ndarray]

DET_RTOL = 1e-12


@dataclass(frozen=True)
class RealLine:
    """Whole real line, Hermite collocation on ``nx`` nodes with scale ``hermite_scale``."""

    nx: int
    hermite_scale: float = 1.0


@dataclass(frozen=True)
class Interval:
    """``[xa, xb]`` with Chebyshev collocation on ``nx + 1`` nodes."""

    xa: float
    xb: float
    nx: int


@dataclass(frozen=True)
class BoundaryConditions:
    """Robin data ``ca u + da u_x = ua(t)`` at ``xa`` and ``cb u + db u_x = ub(t)`` at ``xb``."""

    ca: float
    da: float
    ua: FuncT
    cb: float
    db: float
    ub: FuncT

    def __post_init__(self):
        if abs(self.ca) + abs(self.da) == 0:
            raise IllPosedBoundaryError("left boundary has ca = da = 0")
        if abs(self.cb) + abs(self.db) == 0:
            raise IllPosedBoundaryError("right boundary has cb = db = 0")

    @classmethod
    def dirichlet(cls, ua: FuncT, ub: FuncT) -> "BoundaryConditions":
        return cls(1.0, 0.0, ua, 1.0, 0.0, ub)


@dataclass(frozen=True)
class PdeProblem:
    alpha: float
    t_f: float
    N_t: int
    domain: Union[RealLine, Interval]
    a1: FuncX
    a2: FuncX
    a3: FuncX
    a4: FuncTX
    u0: FuncX
    bc: Optional[BoundaryConditions] = None
    exact: Optional[FuncTX] = None
    name: str = "custom"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if isinstance(self.domain, Interval) and self.bc is None:
            raise ValueError("an interval domain needs boundary conditions")
        if isinstance(self.domain, RealLine) and self.bc is not None:
            raise ValueError("boundary conditions are not used on the real line")

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.t_f, self.N_t)


def _sample_x(f: FuncX, x: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(f(x), dtype=float)
    v = np.broadcast_to(v, x.shape).copy()
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} is not finite at every spatial node")
    return v


def _sample_tx(f: FuncTX, t: np.ndarray, x: np.ndarray, what: str) -> np.ndarray:
    T, X = t[:, None], x[None, :]
    v = np.asarray(f(T, X), dtype=float)
    v = np.broadcast_to(v, (t.shape[0], x.shape[0])).copy()
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} is not finite at every space-time node")
    return v


@dataclass(frozen=True)
class AssembledReduction:
    """Everything needed to solve a problem and rebuild the full ``U``.

    ``U = E_t U_in E_x + E_t F_x[1:] + F_t``; on the real line ``E_x`` is the
    identity and ``F_x`` vanishes. ``E_t`` (zero row atop the identity) and
    ``F_t`` (``u0`` in the first row) are exposed as properties; assembly
    itself uses submatrix and outer-product forms instead.
    """

    problem: PdeProblem
    sys: SylvesterSystem
    discretization: SpectralDiscretization
    opmat: OperationalMatrix
    u0: np.ndarray = field(repr=False)
    Bx: np.ndarray = field(repr=False)
    E_x: Optional[np.ndarray] = field(default=None, repr=False)
    F_x: Optional[np.ndarray] = field(default=None, repr=False)
    ua: Optional[np.ndarray] = field(default=None, repr=False)
    ub: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def bounded(self) -> bool:
        return self.E_x is not None

    @property
    def E_t(self) -> np.ndarray:
        n = self.opmat.grid.N
        return np.vstack([np.zeros((1, n)), np.eye(n)])

    @property
    def F_t(self) -> np.ndarray:
        F = np.zeros((self.opmat.grid.N + 1, self.u0.shape[0]))
        F[0] = self.u0
        return F

    def reconstruct(self, U_in: np.ndarray) -> np.ndarray:
        rows = [self.u0[None, :]]
        if self.bounded:
            rows.append(U_in @ self.E_x + self.F_x[1:])
        else:
            rows.append(U_in)
        U = np.vstack(rows)
        return U


def _time_operator(problem: PdeProblem, opmat: Optional[OperationalMatrix]) -> OperationalMatrix:
    grid = problem.grid
    if opmat is None:
        return build_operational_matrix(problem.alpha, grid)
    if opmat.grid != grid or opmat.alpha != problem.alpha:
        raise ValueError("supplied operational matrix does not match the problem's alpha/grid")
    return opmat


def _spatial_operator(problem: PdeProblem, disc: SpectralDiscretization):
    x = disc.nodes
    a1 = _sample_x(problem.a1, x, "a1")
    a2 = _sample_x(problem.a2, x, "a2")
    a3 = _sample_x(problem.a3, x, "a3")
    return disc.Dx2 * a1[None, :] + disc.Dx * a2[None, :] + np.diag(a3)


def assemble_unbounded(problem: PdeProblem, opmat: Optional[OperationalMatrix] = None) -> AssembledReduction:
    """Hermite reduction: ``A = D[1:, 1:]``, ``B = -B_x``, ``C = A4[1:] - D[1:, 0] u0``.

    Pass ``opmat`` to reuse one operational matrix across several spatial
    discretizations (e.g. a sweep over the Hermite scale).
    """
    if not isinstance(problem.domain, RealLine):
        raise ValueError("assemble_unbounded needs a RealLine domain")
    if problem.N_t < 2 or problem.domain.nx < 2:
        raise ValueError("need N_t >= 2 and nx >= 2")
    op = _time_operator(problem, opmat)
    disc = hermite_discretization(problem.domain.nx, problem.domain.hermite_scale)
    x = disc.nodes
    t = op.grid.nodes
    u0 = _sample_x(problem.u0, x, "u0")
    Bx = _spatial_operator(problem, disc)
    A4 = _sample_tx(problem.a4, t, x, "a4")
    D = op.M
    C = A4[1:] - np.outer(D[1:, 0], u0)
    sys = SylvesterSystem(D[1:, 1:], -Bx, C)
    return AssembledReduction(problem, sys, disc, op, u0, Bx)


def assemble_bounded(problem: PdeProblem, bc: Optional[BoundaryConditions] = None,
                     opmat: Optional[OperationalMatrix] = None) -> AssembledReduction:
    """Chebyshev reduction with the two boundary columns eliminated.

    The Robin conditions at ``x_a`` (last node) and ``x_b`` (first node) form
    a 2x2 system for the boundary values in terms of the interior ones, which
    yields ``U[1:] = U_in E_x + F_x[1:]``. Right-multiplying the collocated
    equation by ``E_x†`` gives ``A U_in + U_in B = C`` with ``B = -E_x B_x E_x†``.

    Raises
    ------
    IllPosedBoundaryError
        If the 2x2 boundary system is singular.
    """
    if not isinstance(problem.domain, Interval):
        raise ValueError("assemble_bounded needs an Interval domain")
    bc = bc if bc is not None else problem.bc
    if bc is None:
        raise ValueError("boundary conditions required")
    dom = problem.domain
    if problem.N_t < 2 or dom.nx < 2:
        raise ValueError("need N_t >= 2 and nx >= 2 (at least one interior node)")
    op = _time_operator(problem, opmat)
    disc = chebyshev_discretization(dom.nx, dom.xa, dom.xb)
    N = dom.nx
    Dx = disc.Dx
    c11 = bc.da * Dx[0, N]
    c12 = bc.ca + bc.da * Dx[N, N]
    c21 = bc.cb + bc.db * Dx[0, 0]
    c22 = bc.db * Dx[N, 0]
    det = c11 * c22 - c12 * c21
    scale = max(abs(c11), abs(c12), abs(c21), abs(c22)) ** 2
    if abs(det) <= DET_RTOL * scale:
        raise IllPosedBoundaryError(
            f"boundary system is singular: det = {det:.3e} (c11={c11:.3g}, c12={c12:.3g}, "
            f"c21={c21:.3g}, c22={c22:.3g})"
        )

    t = op.grid.nodes
    x = disc.nodes
    ua = np.broadcast_to(np.asarray(bc.ua(t), dtype=float), t.shape).copy()
    ub = np.broadcast_to(np.asarray(bc.ub(t), dtype=float), t.shape).copy()
    inner = slice(1, N)
    E_x = np.zeros((N - 1, N + 1))
    E_x[:, 1:N] = np.eye(N - 1)
    E_x[:, 0] = (-bc.da * c22 * Dx[inner, N] + bc.db * c12 * Dx[inner, 0]) / det
    E_x[:, N] = (bc.da * c21 * Dx[inner, N] - bc.db * c11 * Dx[inner, 0]) / det
    F_x = np.zeros((t.shape[0], N + 1))
    F_x[:, 0] = (c22 * ua - c12 * ub) / det
    F_x[:, N] = (-c21 * ua + c11 * ub) / det

    u0 = _sample_x(problem.u0, x, "u0")
    Bx = _spatial_operator(problem, disc)
    A4 = _sample_tx(problem.a4, t, x, "a4")
    D = op.M
    A = D[1:, 1:]
    gram = GramFactor.of(E_x)
    Fx1 = F_x[1:]
    rhs = A4[1:] - np.outer(D[1:, 0], u0) - A @ Fx1 + Fx1 @ Bx
    B = -gram.right_divide(E_x @ Bx)
    C = gram.right_divide(rhs)
    sys = SylvesterSystem(A, B, C)
    return AssembledReduction(problem, sys, disc, op, u0, Bx, E_x, F_x, ua, ub)


def assemble(problem: PdeProblem, opmat: Optional[OperationalMatrix] = None) -> AssembledReduction:
    """Dispatch on the domain type."""
    if isinstance(problem.domain, RealLine):
        return assemble_unbounded(problem, opmat)
    return assemble_bounded(problem, opmat=opmat)


def solve_pde(red: AssembledReduction) -> np.ndarray:
    """Solve the reduced system and rebuild the ``(N_t+1) x n_space`` solution."""
    U_in = solve_sylvester(red.sys)
    return red.reconstruct(U_in)


def reduction_residual(red: AssembledReduction, U: np.ndarray) -> float:
    """Scaled Sylvester residual of the unknown block of ``U``."""
    U_in = U[1:, 1:-1] if red.bounded else U[1:]
    return sylvester_residual(red.sys, U_in)


def boundary_residuals(red: AssembledReduction, U: np.ndarray) -> tuple[float, float]:
    """Largest Robin-condition defect at ``x_a`` and ``x_b`` over ``t_i``, ``i >= 1``.

    Each defect is divided by ``max(1, max_i |u_a(t_i)|)`` (resp. ``u_b``).
    Returns ``(0.0, 0.0)`` on the real line.
    """
    if not red.bounded:
        return 0.0, 0.0
    bc = red.problem.bc
    Ux = U @ red.discretization.Dx
    ra = np.abs(bc.ca * U[1:, -1] + bc.da * Ux[1:, -1] - red.ua[1:])
    rb = np.abs(bc.cb * U[1:, 0] + bc.db * Ux[1:, 0] - red.ub[1:])
    return (
        float(ra.max() / max(1.0, np.abs(red.ua).max())),
        float(rb.max() / max(1.0, np.abs(red.ub).max())),
    )


def sup_error(red: AssembledReduction, U: np.ndarray) -> float:
    """``max |U - u_exact|`` over all space-time nodes (NaN without an exact solution)."""
    exact = red.problem.exact
    if exact is None:
        return float("nan")
    ref = _sample_tx(exact, red.opmat.grid.nodes, red.discretization.nodes, "exact")
    return float(np.max(np.abs(U - ref)))
