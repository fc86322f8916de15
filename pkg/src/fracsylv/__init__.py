"""Order 3-alpha Caputo quadrature, FFT evaluation and Sylvester-based fractional PDE solvers."""

from .cases import load_config, make_case
from .core import SampledSeries, TimeGrid, build_time_grid, sample
from .estimators import CaputoDerivative, FractionalPdeSolver
from .exceptions import (
    ConfigurationError,
    ConsistencyError,
    DomainError,
    FracSylvError,
    IllPosedBoundaryError,
    NonConvergenceError,
    NumericalError,
    RankDeficiencyError,
    SingularSystemError,
)
from .expr import Expression
from .fastconv import build_convolution_plan, caputo_fast
from .linalg import SylvesterSystem, solve_sylvester
from .opmatrix import OperationalMatrix, build_operational_matrix
from .pde import BoundaryConditions, Interval, PdeProblem, RealLine, assemble, solve_pde
from .quadrature import caputo_linear, caputo_quadratic, caputo_quadratic_star
from .specfun import caputo_exp2_exact, gamma_fn, upper_incomplete_gamma

__version__ = "0.1.0"

__all__ = [
    "BoundaryConditions", "CaputoDerivative", "ConfigurationError", "ConsistencyError", "DomainError",
    "Expression", "FracSylvError", "FractionalPdeSolver", "IllPosedBoundaryError", "Interval",
    "NonConvergenceError", "NumericalError", "OperationalMatrix", "PdeProblem", "RankDeficiencyError",
    "RealLine", "SampledSeries", "SingularSystemError", "SylvesterSystem", "TimeGrid", "assemble",
    "build_convolution_plan", "build_operational_matrix", "build_time_grid", "caputo_exp2_exact",
    "caputo_fast", "caputo_linear", "caputo_quadratic", "caputo_quadratic_star", "gamma_fn",
    "load_config", "make_case", "sample", "solve_pde", "solve_sylvester", "upper_incomplete_gamma",
]
