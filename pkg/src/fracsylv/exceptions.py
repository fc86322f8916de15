"""Exception hierarchy shared by the numerical modules and the CLI."""


class FracSylvError(Exception):
    """Base class for all package errors."""


class DomainError(FracSylvError, ValueError):
    """Argument outside the domain of a special function."""


class ConfigurationError(FracSylvError, ValueError):
    """Invalid problem definition or config file (CLI exit code 2)."""


class NumericalError(FracSylvError, ArithmeticError):
    """Numerical failure: non-convergence, singularity, leakage (CLI exit code 3)."""


class NonConvergenceError(NumericalError):
    pass


class SingularSystemError(NumericalError):
    pass


class RankDeficiencyError(NumericalError):
    pass


class ConsistencyError(NumericalError):
    pass


class IllPosedBoundaryError(ConfigurationError):
    """Robin data whose reduced 2x2 boundary system is singular."""
