"""Exception types shared across the package."""


class GGMSelectError(Exception):
    """Base class for all package-specific errors."""


class DomainError(GGMSelectError, ValueError):
    """An argument is outside the documented domain of an operation."""


class ConvergenceError(GGMSelectError, RuntimeError):
    """An iterative routine failed to converge or diverged."""


class DegenerateDirectionError(ConvergenceError):
    """The active-set system of the l1 path became singular.

    Parameters
    ----------
    message : str
    lam : float
        Regularization level at which the degeneracy was detected.
    """

    def __init__(self, message, lam):
        super().__init__(f"{message} (at lambda={lam:.6g})")
        self.lam = lam
