"""Coherence analysis, the robustness radius of the LP estimate, and recovery metrics.

The coherence is taken on the unnormalized columns of QA:
mu = max_{j != h} |QA_j^T QA_h|, and rho bounds every column norm. The
robustness guarantee ||x* - x||_1 < T needs

    2 (dA + rho)^2 < 2 - mu - rho^2
    k <= (2 - rho^2 + mu) / (2 (mu + dA^2 + 2 dA rho + (rho sqrt(m) + dA m) 2 dy / T))

and the second condition, solved for T, gives the radius returned by
robustness_bound.
"""
import math
from typing import Optional

import numpy as np

from domain.models import CoherenceReport, MetricsRecord


def mutual_coherence(QA) -> float:
    """Largest absolute inner product between two distinct columns.

    Raises:
        ValueError: If QA has fewer than two columns.
    """
    QA = np.asarray(QA, dtype=float)
    if QA.ndim != 2 or QA.shape[1] < 2:
        raise ValueError("Mutual coherence needs a matrix with at least two columns")
    gram = np.abs(QA.T @ QA)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


def max_column_norm(QA) -> float:
    QA = np.asarray(QA, dtype=float)
    return float(np.max(np.linalg.norm(QA, axis=0), initial=0.0))


def hypothesis_gap_ok(mu: float, rho: float, delta_A: float) -> bool:
    return 2.0 * (delta_A + rho) ** 2 < 2.0 - mu - rho ** 2


def _cross_talk(mu: float, rho: float, delta_A: float) -> float:
    # Bound on the off-diagonal entries of A^T A
    return mu + delta_A ** 2 + 2.0 * delta_A * rho


def robustness_bound(
    mu: float,
    rho: float,
    delta_A: float,
    delta_y: float,
    m: int,
    k: int,
) -> Optional[float]:
    """Radius T with ||x* - x||_1 < T, or None when the hypotheses fail.

    T = 2 dy (rho sqrt(m) + dA m) / ((2 - rho^2 + mu) / (2k) - (mu + dA^2 + 2 dA rho))

    Raises:
        ValueError: If m < 1 or k < 1.
    """
    if m < 1 or k < 1:
        raise ValueError(f"robustness_bound needs m >= 1 and k >= 1, got m={m}, k={k}")
    if not hypothesis_gap_ok(mu, rho, delta_A):
        return None
    denominator = (2.0 - rho ** 2 + mu) / (2.0 * k) - _cross_talk(mu, rho, delta_A)
    if not denominator > 0:
        return None
    numerator = 2.0 * delta_y * (rho * math.sqrt(m) + delta_A * m)
    return numerator / denominator


def k_max_for_T(mu: float, rho: float, delta_A: float, n: int) -> Optional[int]:
    """Largest k <= n for which robustness_bound is finite."""
    if not hypothesis_gap_ok(mu, rho, delta_A):
        return None
    cross_talk = _cross_talk(mu, rho, delta_A)
    if cross_talk <= 0:
        return n
    # strict: k < (2 - rho^2 + mu) / (2 cross_talk)
    limit = (2.0 - rho ** 2 + mu) / (2.0 * cross_talk)
    k_max = min(n, math.ceil(limit) - 1)
    return k_max if k_max >= 1 else None


def coherence_report(
    QA,
    delta_A: float,
    delta_y: float,
    k: int,
    rho: Optional[float] = None,
) -> CoherenceReport:
    """Coherence figures of QA and the robustness radius for sparsity k.

    Args:
        QA: Quantized predictor matrix.
        delta_A: Entrywise error bound of QA.
        delta_y: Entrywise error bound of the measurements.
        k: Sparsity of the signal.
        rho: Column-norm bound; defaults to the tight max column norm.
    """
    QA = np.asarray(QA, dtype=float)
    mu = mutual_coherence(QA)
    rho = max_column_norm(QA) if rho is None else float(rho)
    m, n = QA.shape
    return CoherenceReport(
        mu=mu,
        rho=rho,
        hypothesis_gap_ok=hypothesis_gap_ok(mu, rho, delta_A),
        k_max_for_T=k_max_for_T(mu, rho, delta_A, n),
        T=robustness_bound(mu, rho, delta_A, delta_y, m, k) if k >= 1 else None,
    )


def compute_metrics(x_hat, x_true, k: int, zero_tol: float) -> MetricsRecord:
    """Relative errors and support statistics of one recovery.

    An entry counts as nonzero iff its magnitude exceeds zero_tol. The l1
    error is ||x_hat - x||_1 / ||x||_1, unsquared.

    Raises:
        ValueError: On length mismatch, zero_tol <= 0 or an all-zero x_true.
    """
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if x_hat.shape != x_true.shape or x_hat.ndim != 1:
        raise ValueError(f"Estimate shape {x_hat.shape} does not match truth {x_true.shape}")
    if not zero_tol > 0:
        raise ValueError(f"zero_tol must be positive, got {zero_tol}")
    if not np.any(x_true):
        raise ValueError("Relative errors are undefined for an all-zero x_true")

    n = x_true.shape[0]
    diff = x_hat - x_true
    est_nonzero = np.abs(x_hat) > zero_tol
    true_nonzero = x_true != 0

    false_pos = np.count_nonzero(est_nonzero & ~true_nonzero)
    false_neg = np.count_nonzero(~est_nonzero & true_nonzero)
    return MetricsRecord(
        rel_l2_sq=float(np.sum(diff ** 2) / np.sum(x_true ** 2)),
        rel_l1=float(np.sum(np.abs(diff)) / np.sum(np.abs(x_true))),
        sparsity=np.count_nonzero(est_nonzero) / n,
        fpr=false_pos / (n - k) if n > k else 0.0,
        fnr=false_neg / k if k > 0 else 0.0,
        zero_tol=zero_tol,
    )
