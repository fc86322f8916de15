"""scikit-learn style wrappers.

``CaputoDerivative`` treats each row of ``X`` as one series sampled on the
uniform grid ``t_j = j * t_final / N`` (``N = n_features - 1``) and maps it
to the Caputo derivative at every node. It is stateless: ``fit`` only
validates and records the input width.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .core import SampledSeries, build_time_grid
from .fastconv import build_convolution_plan, caputo_fast
from .opmatrix import build_operational_matrix
from .pde import PdeProblem, assemble, boundary_residuals, reduction_residual, solve_pde, sup_error
from .quadrature import FORMS, caputo_linear, caputo_quadratic_batch, check_alpha

__all__ = ["CaputoDerivative", "FractionalPdeSolver"]

_METHODS = ("quadratic", "star", "linear", "fast", "matrix")


class CaputoDerivative(TransformerMixin, BaseEstimator):
    """Caputo derivative of order ``alpha`` applied row-wise.

    Parameters
    ----------
    alpha : float, default=0.5
        Order in ``(0, 1)``.
    t_final : float, default=1.0
        Right end of the time grid shared by all rows.
    method : {"quadratic", "star", "linear", "fast", "matrix"}, default="quadratic"
        Evaluation scheme. ``"fast"`` and ``"matrix"`` compute the same
        weights as ``"quadratic"`` by FFT convolution and by the dense
        operational matrix respectively.
    form : {"stable", "literal"}, default="stable"
        Kernel grouping used by the quadratic direct and fast paths.

    Attributes
    ----------
    n_features_in_ : int
        Number of samples per series seen in ``fit``.
    """

    def __init__(self, alpha=0.5, t_final=1.0, method="quadratic", form="stable"):
        self.alpha = alpha
        self.t_final = t_final
        self.method = method
        self.form = form

    def _check_params(self):
        check_alpha(self.alpha)
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}, got {self.form!r}")
        if not np.isfinite(self.t_final) or self.t_final <= 0:
            raise ValueError(f"t_final must be positive, got {self.t_final!r}")

    def fit(self, X, y=None):
        self._check_params()
        X = validate_data(self, X, dtype=float, ensure_min_features=3)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        self._check_params()
        X = validate_data(self, X, dtype=float, reset=False, ensure_min_features=3)
        N = X.shape[1] - 1
        grid = build_time_grid(self.t_final, N)
        a = float(self.alpha)
        if self.method in ("quadratic", "star"):
            return caputo_quadratic_batch(X, grid.h, a, star=self.method == "star", form=self.form)
        if self.method == "linear":
            return np.vstack([caputo_linear(grid.nodes, row, a) for row in X])
        if self.method == "matrix":
            return X @ build_operational_matrix(a, grid).M.T
        plan = build_convolution_plan(a, N, self.form)
        return np.vstack([caputo_fast(SampledSeries(grid, row), a, plan) for row in X])


class FractionalPdeSolver(BaseEstimator):
    """Thin estimator facade over :func:`fracsylv.pde.assemble` and :func:`solve_pde`.

    ``fit(problem)`` solves the problem and stores ``solution_`` (time along
    rows), ``nodes_``, ``times_`` and diagnostic residuals. ``score`` is the
    negative sup-norm error against the problem's exact solution.
    """

    def __init__(self, opmat=None):
        self.opmat = opmat

    def fit(self, problem: PdeProblem, y=None):
        if not isinstance(problem, PdeProblem):
            raise TypeError(f"expected a PdeProblem, got {type(problem).__name__}")
        red = assemble(problem, self.opmat)
        U = solve_pde(red)
        self.solution_ = U
        self.nodes_ = red.discretization.nodes
        self.times_ = red.opmat.grid.nodes
        self.sylvester_residual_ = reduction_residual(red, U)
        self.boundary_residuals_ = boundary_residuals(red, U)
        self.sup_error_ = sup_error(red, U)
        return self

    def predict(self, problem=None):
        check_is_fitted(self, "solution_")
        return self.solution_

    def score(self, problem=None, y=None):
        check_is_fitted(self, "solution_")
        return -self.sup_error_

