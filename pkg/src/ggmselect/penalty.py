"""Penalty computation for penalized neighborhood selection.

The penalty attached to a neighborhood of size ``d`` (out of ``p - 1``
candidate neighbors, with ``n`` observations) is

    pen(d) = K * (n - d) / (n - d - 1) * EDKhi[d + 1, n - d - 1, q_d],

    q_d = 1 / (binom(p - 1, d) * (d + 1)**2),

where ``EDKhi[d, N, q]`` inverts, in its last argument, the tail functional

    DKhi(d, N, x) = P(F_{d+2,N} >= x / (d + 2))
                    - (x / d) * P(F_{d,N+2} >= (N + 2) * x / (N * d)),

``F_{a,b}`` being a Fisher variable.  DKhi decreases from 1 to 0 on
``x in (0, inf)``, so the inversion is a bracketed bisection.

For ``d = 0`` the quantile ``q_0`` equals 1 exactly and the inverted value is
0, hence ``pen(0) = 0``: an empty neighborhood carries no penalty, and every
``d >= 1`` entry is strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError

__all__ = [
    "PenaltyParams",
    "PenaltyTable",
    "fisher_tail",
    "dkhi",
    "edkhi",
    "pen_table",
]

# Bisection controls (see module docstring; the bracket is expanded by
# doubling until it contains the solution, then halved to relative width).
_BRACKET_DOUBLINGS = 60
_BISECT_MAX_ITER = 200
_BISECT_REL_WIDTH = 1e-8


def fisher_tail(d: float, N: float, f: float) -> float:
    """Upper tail P(F_{d,N} >= f) of the Fisher distribution.

    Computed through the regularized incomplete beta function:
    ``P(F_{d,N} >= f) = I_{N/(N+d f)}(N/2, d/2)`` for ``f > 0``.
    """
    if d < 1 or N < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got d={d}, N={N}")
    if f <= 0.0:
        return 1.0
    x = N / (N + d * f)
    return float(special.betainc(N / 2.0, d / 2.0, x))


def dkhi(d: float, N: float, x: float) -> float:
    """Tail functional DKhi(d, N, x), decreasing from 1 to 0 in ``x > 0``."""
    if d < 1 or N < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got d={d}, N={N}")
    if x <= 0.0:
        raise DomainError(f"x must be positive, got {x}")
    a = fisher_tail(d + 2, N, x / (d + 2))
    b = fisher_tail(d, N + 2, (N + 2) * x / (N * d))
    return a - (x / d) * b


def edkhi(d: float, N: float, q: float) -> float:
    """Solve DKhi(d, N, x) = q for x, given ``0 < q < 1``.

    Bracketed bisection: the upper end starts at ``d + N`` and doubles until
    the tail drops below ``q`` (at most 60 doublings), then the bracket is
    halved down to relative width 1e-8 (at most 200 iterations).
    """
    if not (0.0 < q < 1.0):
        raise DomainError(f"q must lie strictly in (0, 1), got {q}")
    lo = 0.0
    hi = float(max(d + N, 10.0))
    for _ in range(_BRACKET_DOUBLINGS):
        if dkhi(d, N, hi) < q:
            break
        hi *= 2.0
    else:
        raise ConvergenceError(
            f"failed to bracket DKhi({d}, {N}, x) = {q} after "
            f"{_BRACKET_DOUBLINGS} doublings"
        )
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if dkhi(d, N, mid) >= q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _BISECT_REL_WIDTH * hi:
            break
    return 0.5 * (lo + hi)


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


@dataclass(frozen=True)
class PenaltyParams:
    """Inputs of a penalty table.

    Attributes
    ----------
    n : int
        Sample size; must satisfy ``n >= 9``.
    p : int
        Number of variables (graph nodes), ``p >= 2``.
    K : float
        Penalty multiplier, ``K > 1``.
    d_max : int
        Largest neighborhood size tabulated; ``0 <= d_max <= min(n-3, p-1)``.
    """

    n: int
    p: int
    K: float
    d_max: int

    def __post_init__(self):
        if self.n < 9:
            raise DomainError(f"n must be >= 9, got {self.n}")
        if self.p < 2:
            raise DomainError(f"p must be >= 2, got {self.p}")
        if not self.K > 1.0:
            raise DomainError(f"K must be > 1, got {self.K}")
        if not (0 <= self.d_max <= min(self.n - 3, self.p - 1)):
            raise DomainError(
                f"d_max must lie in [0, min(n-3, p-1)] = "
                f"[0, {min(self.n - 3, self.p - 1)}], got {self.d_max}"
            )


@dataclass(frozen=True)
class PenaltyTable:
    """Tabulated penalties pen(0..d_max) for fixed (n, p, K).

    ``values[d]`` is nonnegative, nondecreasing in ``d`` and strictly
    positive for ``d >= 1`` (``values[0]`` is exactly 0).
    """

    params: PenaltyParams
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.params.d_max + 1,):
            raise DomainError(
                f"values must have shape ({self.params.d_max + 1},), "
                f"got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)) or np.any(vals < 0.0):
            raise DomainError("penalty values must be finite and nonnegative")
        if vals is self.values:
            vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def pen(self, d: int) -> float:
        """Penalty for neighborhood size ``d``."""
        if not (0 <= d <= self.params.d_max):
            raise DomainError(
                f"d={d} outside tabulated range [0, {self.params.d_max}]"
            )
        return float(self.values[d])


def pen_table(params: PenaltyParams) -> PenaltyTable:
    """Compute the penalty table for ``params``.

    For each ``d`` the quantile ``q_d = 1/(binom(p-1, d) * (d+1)^2)`` is
    formed in log space (so huge binomials never overflow), inverted through
    :func:`edkhi`, and scaled by ``K (n-d)/(n-d-1)``.
    """
    n, p, K, d_max = params.n, params.p, params.K, params.d_max
    values = np.empty(d_max + 1)
    for d in range(d_max + 1):
        log_q = -(_log_binom(p - 1, d) + 2.0 * math.log(d + 1))
        q = math.exp(log_q)
        if q >= 1.0:
            # Only d = 0 reaches this: binom(p-1,0) * 1^2 = 1, and the
            # inverted tail value at q = 1 is the lower bracket end, 0.
            values[d] = 0.0
            continue
        x = edkhi(d + 1, n - d - 1, q)
        values[d] = K * (n - d) / (n - d - 1.0) * x
    return PenaltyTable(params=params, values=values)
