"""Edge-recovery and prediction-error metrics."""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .graphs import Graph

__all__ = ["fdr_power", "msep"]


def fdr_power(G_true: Graph, G_hat: Graph) -> tuple[float, float]:
    """False discovery rate and power of an estimated edge set.

    fdr is the fraction of estimated edges absent from the truth (0 for an
    empty estimate, by convention); power is the fraction of true edges
    recovered (1 for an empty truth).
    """
    if G_true.p != G_hat.p:
        raise DomainError(
            f"graphs disagree on p: {G_true.p} != {G_hat.p}"
        )
    true_edges = set(G_true.edges)
    hat_edges = set(G_hat.edges)
    fdr = len(hat_edges - true_edges) / len(hat_edges) if hat_edges else 0.0
    power = (
        len(hat_edges & true_edges) / len(true_edges) if true_edges else 1.0
    )
    return float(fdr), float(power)


def msep(Sigma: np.ndarray, theta_true: np.ndarray, theta_hat: np.ndarray) -> float:
    """Squared prediction distance Tr((theta_hat - theta)^T Sigma (theta_hat - theta)).

    ``Sigma`` must be symmetric positive definite; the value is the squared
    Frobenius norm of ``Sigma^{1/2} (theta_hat - theta)``, computed without
    forming the square root.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    theta_true = np.asarray(theta_true, dtype=float)
    theta_hat = np.asarray(theta_hat, dtype=float)
    p = Sigma.shape[0]
    if Sigma.shape != (p, p):
        raise DomainError(f"Sigma must be square, got {Sigma.shape}")
    if theta_true.shape != (p, p) or theta_hat.shape != (p, p):
        raise DomainError(
            "coefficient matrices must match Sigma's shape "
            f"{(p, p)}, got {theta_true.shape} and {theta_hat.shape}"
        )
    if not np.allclose(Sigma, Sigma.T, atol=1e-10):
        raise DomainError("Sigma must be symmetric")
    try:
        np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError as exc:
        raise DomainError("Sigma must be positive definite") from exc
    d = theta_hat - theta_true
    return float(np.sum(d * (Sigma @ d)))
