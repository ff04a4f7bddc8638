"""Weighted lasso regularization path with exact breakpoints.

Solves, for one response column ``a`` of the data matrix,

    min_v ||X_a - X v||^2 + lambda * sum_b w_b |v_b|,    v_a = 0,

for the whole continuum of ``lambda`` at once.  The solution is piecewise
linear in ``lambda``; this module computes every breakpoint (variable
entries and sign-change drops) by the homotopy method on the rescaled design
``X_b / w_b``, mapping coefficients back afterwards.  Columns with infinite
weight are excluded outright.

Stationarity at level ``lambda`` reads ``|2 <X_b, r>| <= lambda * w_b`` with
equality on the active set, so the path starts at
``lambda_1 = max_b 2 |<X_b, X_a>| / w_b`` and walks downward, adding the
variable whose boundary is hit first and removing any active variable whose
coefficient crosses zero (the lasso modification of forward stagewise
walks).  Equal-correlation ties are broken toward the lowest column index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DegenerateDirectionError, DomainError
from .linmodel import as_data_matrix

__all__ = ["LassoPath", "lasso_path"]

# Candidate events must occur strictly below the current lambda (relative
# guard), and stationarity violations beyond _KKT_SWEEP_RTOL of lambda force
# a corrective entry; both guards exist for near-tie robustness only.
_EVENT_RTOL = 1e-10
_KKT_SWEEP_RTOL = 1e-8


@dataclass(frozen=True)
class LassoPath:
    """Piecewise-linear solution path of the weighted l1 problem.

    Attributes
    ----------
    node : int
        Response column.
    p : int
        Number of design columns; coefficient vectors live in R^p with the
        response coordinate pinned to 0.
    breakpoints : np.ndarray
        Strictly decreasing event levels ``lambda_1 > lambda_2 > ...``.
    supports : list[tuple[int, ...]]
        ``supports[k]`` is the active set on the segment *below*
        ``breakpoints[k]`` (down to the next breakpoint).
    coefs : np.ndarray
        ``coefs[k]`` is the coefficient vector exactly at ``breakpoints[k]``.
    final_coefs : np.ndarray
        Coefficients at ``lambda = 0`` (the least-squares end), or at the
        last breakpoint when the path was truncated by ``max_support``.
    truncated : bool
        True when the walk stopped early because the support reached
        ``max_support``.
    excluded : tuple[int, ...]
        Columns removed up front (infinite weight).
    """

    node: int
    p: int
    breakpoints: np.ndarray = field(repr=False)
    supports: list = field(repr=False)
    coefs: np.ndarray = field(repr=False)
    final_coefs: np.ndarray = field(repr=False)
    truncated: bool
    excluded: tuple = ()

    def support_at(self, lam: float) -> tuple[int, ...]:
        """Active set on the segment just below ``lam`` (a segment includes
        its own starting breakpoint)."""
        if lam < 0:
            raise DomainError(f"lambda must be >= 0, got {lam}")
        bp = self.breakpoints
        if bp.size == 0 or lam > bp[0]:
            return ()
        k = int(np.searchsorted(-bp, -lam, side="right")) - 1
        return self.supports[k]

    def coef_at(self, lam: float) -> np.ndarray:
        """Coefficient vector at level ``lam`` (linear between breakpoints).

        Below the last breakpoint the path continues to its least-squares
        end, except on truncated paths where the last value extends
        constantly.
        """
        if lam < 0:
            raise DomainError(f"lambda must be >= 0, got {lam}")
        bp = self.breakpoints
        if bp.size == 0 or lam >= bp[0]:
            return np.zeros(self.p)
        k = int(np.searchsorted(-bp, -lam, side="right")) - 1
        if k + 1 < bp.size:
            left, right = bp[k], bp[k + 1]
            right_coef = self.coefs[k + 1]
        else:
            if self.truncated:
                return self.final_coefs.copy()
            left, right = bp[k], 0.0
            right_coef = self.final_coefs
        if left == right:
            return self.coefs[k].copy()
        t = (left - lam) / (left - right)
        return (1.0 - t) * self.coefs[k] + t * right_coef


def lasso_path(X, a: int, weights=None, max_support: int | None = None) -> LassoPath:
    """Exact homotopy path of the weighted l1 regression of column ``a``.

    Parameters
    ----------
    X : array (n, p)
    a : int
        Response column; always excluded from the regressors.
    weights : array (p,), optional
        Positive per-column weights; ``np.inf`` excludes a column.  Omitted
        means unit weights.
    max_support : int, optional
        Stop once the active set reaches this size.  Defaults to
        ``min(p - 1, n - 1)`` and is clipped to never exceed ``n - 1``.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    if not (0 <= a < p):
        raise DomainError(f"node {a} outside 0..{p - 1}")
    if weights is None:
        w = np.ones(p)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (p,):
            raise DomainError(f"weights must have shape ({p},), got {w.shape}")
        if np.any(np.isnan(w)) or np.any(w <= 0.0):
            raise DomainError("weights must be positive (np.inf to exclude)")
    cap = min(p - 1, n - 1)
    if max_support is None:
        max_support = cap
    if not (1 <= max_support <= n - 1):
        raise DomainError(
            f"max_support must be in [1, n-1] = [1, {n - 1}], got {max_support}"
        )
    max_support = min(max_support, cap)

    usable = np.array(
        [j for j in range(p) if j != a and np.isfinite(w[j])], dtype=int
    )
    excluded = tuple(int(j) for j in range(p) if j != a and not np.isfinite(w[j]))
    y = X[:, a]

    def finish(bps, sups, cfs, final, truncated):
        return LassoPath(
            node=a,
            p=p,
            breakpoints=np.array(bps, dtype=float),
            supports=sups,
            coefs=np.array(cfs, dtype=float).reshape(len(cfs), p),
            final_coefs=np.asarray(final, dtype=float),
            truncated=truncated,
            excluded=excluded,
        )

    if usable.size == 0:
        return finish([], [], np.zeros((0, p)), np.zeros(p), False)

    A = X[:, usable] / w[usable]
    m = usable.size
    Gm = A.T @ A
    Ay = A.T @ y

    def to_full(v_scaled: np.ndarray) -> np.ndarray:
        full = np.zeros(p)
        full[usable] = v_scaled / w[usable]
        return full

    v = np.zeros(m)
    c = Ay.copy()
    lam = 2.0 * float(np.max(np.abs(c)))
    if lam <= 0.0:
        return finish([], [], np.zeros((0, p)), np.zeros(p), False)

    active: list[int] = []
    in_active = np.zeros(m, dtype=bool)

    def add_active(j: int):
        active.append(j)
        in_active[j] = True

    def record(bps, sups, cfs):
        bps.append(lam)
        sups.append(tuple(int(usable[t]) for t in sorted(active)))
        cfs.append(to_full(v))

    breakpoints: list[float] = []
    supports: list[tuple[int, ...]] = []
    coefs: list[np.ndarray] = []

    # First entry at lambda_1: largest |c|, lowest index on ties.
    tol1 = (1.0 - 1e-15) * lam / 2.0
    j0 = int(np.flatnonzero(np.abs(c) >= tol1)[0])
    add_active(j0)
    # The recorded coefficient at a breakpoint is the value just *at* it,
    # before moving along the new segment, i.e. zeros here.
    breakpoints.append(lam)
    supports.append(tuple(int(usable[t]) for t in sorted(active)))
    coefs.append(to_full(v))

    truncated = False
    final = None
    max_events = 16 * m * (min(n, m) + 2)
    for _ in range(max_events):
        if max_support < m and len(active) >= max_support:
            truncated = True
            final = to_full(v)
            break
        idxA = np.array(sorted(active), dtype=int)
        s = np.sign(c[idxA])
        s[s == 0.0] = 1.0
        try:
            Lch = np.linalg.cholesky(Gm[np.ix_(idxA, idxA)])
        except np.linalg.LinAlgError:
            raise DegenerateDirectionError(
                "active columns are exactly collinear", lam
            ) from None
        delta = np.linalg.solve(Lch.T, np.linalg.solve(Lch, s))
        g = Gm[:, idxA] @ delta

        # Entry events: inactive c_j(t) reaches the boundary +/- lambda/2.
        best_entry_lam, best_entry_j = 0.0, -1
        for j in range(m):
            if in_active[j]:
                continue
            num = 2.0 * c[j] - lam * g[j]
            for sigma in (1.0, -1.0):
                denom = sigma - g[j]
                if abs(denom) < 1e-14:
                    continue
                cand = num / denom
                if 0.0 < cand < lam * (1.0 - _EVENT_RTOL):
                    if cand > best_entry_lam * (1.0 + 1e-14):
                        best_entry_lam, best_entry_j = cand, j

        # Drop events: active coefficient crosses zero.
        best_drop_lam, best_drop_j = 0.0, -1
        for pos, j in enumerate(idxA):
            dj = delta[pos]
            if dj == 0.0:
                continue
            cand = lam + 2.0 * v[j] / dj
            if 0.0 < cand < lam * (1.0 - _EVENT_RTOL) and cand > best_drop_lam:
                best_drop_lam, best_drop_j = cand, int(j)

        lam_next = max(best_entry_lam, best_drop_lam)
        if lam_next <= 0.0:
            # No further event: the path runs linearly to lambda = 0.
            v_end = v.copy()
            v_end[idxA] += (lam / 2.0) * delta
            final = to_full(v_end)
            break

        step = (lam - lam_next) / 2.0
        v[idxA] += step * delta
        lam = lam_next
        idx_all = np.flatnonzero(in_active)
        c = Ay - Gm[:, idx_all] @ v[idx_all]  # exact refresh, no drift

        if best_drop_lam > best_entry_lam:
            v[best_drop_j] = 0.0
            active.remove(best_drop_j)
            in_active[best_drop_j] = False
        else:
            add_active(best_entry_j)
        record(breakpoints, supports, coefs)

        # Near-tie safety net: force in any inactive variable whose
        # stationarity bound is violated beyond tolerance (measure-zero
        # configurations; records a nudged, still-decreasing breakpoint).
        viol = np.abs(c) - lam / 2.0
        viol[in_active] = -np.inf
        jv = int(np.argmax(viol))
        if viol[jv] > _KKT_SWEEP_RTOL * lam:
            add_active(jv)
            lam = lam * (1.0 - 1e-12)
            record(breakpoints, supports, coefs)
    else:
        raise ConvergenceError(
            f"l1 path event budget ({max_events}) exhausted at lambda={lam:.3g}"
        )

    if final is None:
        final = to_full(v)
    return finish(breakpoints, supports, coefs, final, truncated)
