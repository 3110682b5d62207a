"""Sparse recovery methods compared in the benchmark.

- QCS-LP: the errors-in-variables LP on x >= 0.
- BPDN-inf: min ||x||_1 s.t. ||QA x - Qy||_inf <= eps, solved as an LP.
- BPDN-2: min ||x||_1 s.t. ||QA x - Qy||_2 <= eps, solved by linearized ADMM.
- NIHT: normalized iterative hard thresholding with step backtracking.

Every solver is pure per call and returns a RecoveryResult.
"""
import logging
import time
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.config import settings
from domain.models import LpSolution, Method, ProblemInstance, RecoveryResult, SolverStatus
from services.lp_model_service import build_bpdn_inf_lp, build_lp_constraints, build_qcs_lp
from services.lp_solver_service import LpSolverOptions, solve_lp

logger = logging.getLogger(__name__)


class Bpdn2Options(BaseModel):
    model_config = ConfigDict(frozen=True)

    tol: float = Field(default_factory=lambda: settings.BPDN2_TOL, gt=0)
    max_iters: int = Field(default_factory=lambda: settings.BPDN2_MAX_ITERS, ge=1)
    penalty: float = Field(default_factory=lambda: settings.BPDN2_PENALTY, gt=0)
    # Residual balancing of the penalty during the first iterations
    residual_gap: float = Field(default=10.0, gt=1)
    penalty_factor: float = Field(default=1.5, gt=1)
    adapt_iters: int = Field(default=100, ge=0)


class NihtOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    tol: float = Field(default_factory=lambda: settings.NIHT_TOL, gt=0)
    max_iters: int = Field(default_factory=lambda: settings.NIHT_MAX_ITERS, ge=1)
    # Step acceptance uses (1 - shrink_margin) * ||dx||^2 / ||A dx||^2
    shrink_margin: float = Field(default=0.01, ge=0, lt=1)
    max_backtracks: int = Field(default=60, ge=0)


def _lp_result(solution: LpSolution, x_hat: np.ndarray, method: Method, started: float) -> RecoveryResult:
    return RecoveryResult(
        x_hat=x_hat,
        method=method,
        solver_status=solution.status,
        iterations=solution.iterations,
        wall_time=time.perf_counter() - started,
    )


def solve_qcs_lp(
    QA,
    Qy,
    delta_A: float,
    delta_y: float,
    opts: Optional[LpSolverOptions] = None,
) -> RecoveryResult:
    """Minimum l1-norm nonnegative x consistent with the quantized data.

    Args:
        QA: Quantized predictor matrix.
        Qy: Quantized measurements.
        delta_A: Entrywise error bound of QA.
        delta_y: Entrywise error bound of Qy.
        opts: Simplex options.

    Returns:
        RecoveryResult; x_hat is NaN unless the LP was solved to optimality.
    """
    started = time.perf_counter()
    opts = opts or LpSolverOptions()
    problem = build_qcs_lp(QA, Qy, delta_A, delta_y)
    solution = solve_lp(problem, opts)

    if solution.status is SolverStatus.OPTIMAL:
        C, c = build_lp_constraints(QA, Qy, delta_A, delta_y)
        violation = float(np.max(C @ solution.z - c, initial=0.0))
        if violation > opts.feas_tol:
            logger.warning(f"QCS-LP estimate breaks quantization consistency by {violation:.3e}")
    else:
        logger.warning(f"QCS-LP ended with status {solution.status.value}")
    return _lp_result(solution, solution.z, Method.QCS_LP, started)


def solve_qcs_lp_instance(p: ProblemInstance, opts: Optional[LpSolverOptions] = None) -> RecoveryResult:
    """solve_qcs_lp on the quantized data and error bounds carried by an instance."""
    return solve_qcs_lp(p.QA, p.Qy, p.delta_A_bound, p.delta_y_bound, opts)


def solve_bpdn_inf(
    QA,
    Qy,
    epsilon: float,
    opts: Optional[LpSolverOptions] = None,
    *,
    nonneg: bool = False,
) -> RecoveryResult:
    """BPDN with an l-infinity residual bound; signed unless nonneg=True."""
    started = time.perf_counter()
    problem = build_bpdn_inf_lp(QA, Qy, epsilon, nonneg=nonneg)
    solution = solve_lp(problem, opts)

    n = np.asarray(QA).shape[1]
    x_hat = solution.z if nonneg else solution.z[:n] - solution.z[n:]
    if not solution.status.is_success:
        logger.warning(f"BPDN-inf ended with status {solution.status.value}")
    method = Method.BPDN_INF_NN if nonneg else Method.BPDN_INF
    return _lp_result(solution, x_hat, method, started)


def soft_threshold(v: np.ndarray, threshold: float) -> np.ndarray:
    """Proximal operator of threshold * ||.||_1."""
    return np.maximum(0.0, v - threshold) + np.minimum(0.0, v + threshold)


def project_l2_ball(v: np.ndarray, radius: float) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm <= radius:
        return v
    return v * (radius / norm)


def solve_bpdn_2(QA, Qy, epsilon: float, opts: Optional[Bpdn2Options] = None) -> RecoveryResult:
    """BPDN with an l2 residual bound via linearized ADMM.

    Splitting: minimize ||x||_1 + I_ball(z) subject to QA x - Qy - z = 0,
    where I_ball is the indicator of the l2 ball of radius epsilon. Each
    iteration takes a soft-thresholding step in x (linearized around the
    previous point), projects the residual variable onto the ball and
    updates the scaled dual. The step size is held at 0.99 * pen / ||QA||^2
    so the linearization majorizes the augmented term.

    Args:
        QA: Predictor matrix, m x n.
        Qy: Measurements, length m.
        epsilon: l2 radius of the residual constraint.
        opts: Tolerance, iteration limit and penalty parameter.

    Returns:
        RecoveryResult with status Converged, or NonConverged when the
        iteration limit is reached (the last iterate is still returned).
    """
    started = time.perf_counter()
    opts = opts or Bpdn2Options()
    A = np.asarray(QA, dtype=float)
    b = np.asarray(Qy, dtype=float)
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")

    m, n = A.shape
    op_norm_sq = float(np.linalg.norm(A, 2) ** 2) if A.size else 0.0
    pen = opts.penalty

    def step_for(penalty: float) -> float:
        return 0.99 * penalty / op_norm_sq if op_norm_sq > 0 else 1.0

    step = step_for(pen)
    x = np.zeros(n)
    Ax = A @ x
    u = np.zeros(m)
    Asu = np.zeros(n)
    Asu_old = Asu
    status = SolverStatus.NON_CONVERGED
    iteration = 0

    for iteration in range(1, opts.max_iters + 1):
        x_new = soft_threshold(x - (step / pen) * (2 * Asu - Asu_old), step)
        Ax_new = A @ x_new
        z = project_l2_ball(Ax_new - b + u, epsilon)
        r = Ax_new - b - z
        u = u + r
        Asu_new = A.T @ u
        s = (Asu_new - Asu) / pen + (Asu_old - Asu) / pen + (x - x_new) / step

        x, Ax = x_new, Ax_new
        Asu_old, Asu = Asu, Asu_new

        r_norm = np.linalg.norm(r)
        s_norm = np.linalg.norm(s)
        s_thresh = opts.tol * max(1.0, np.linalg.norm(Asu) / pen, np.linalg.norm(x) / step)
        if r_norm <= opts.tol and s_norm <= s_thresh:
            status = SolverStatus.CONVERGED
            break

        if iteration <= opts.adapt_iters:
            # u is the dual scaled by pen; rescale it when pen changes
            if r_norm > opts.residual_gap * s_norm:
                factor = 1.0 / opts.penalty_factor
            elif s_norm > opts.residual_gap * r_norm:
                factor = opts.penalty_factor
            else:
                factor = 1.0
            if factor != 1.0:
                pen *= factor
                u = u * factor
                Asu = Asu * factor
                Asu_old = Asu_old * factor
                step = step_for(pen)

    if status is SolverStatus.NON_CONVERGED:
        logger.warning(f"BPDN-2 did not converge in {opts.max_iters} iterations")
    return RecoveryResult(
        x_hat=x,
        method=Method.BPDN_2,
        solver_status=status,
        iterations=iteration,
        wall_time=time.perf_counter() - started,
    )


def hard_threshold(x: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Keep the k largest-magnitude entries; ties go to the lowest index.

    Returns:
        (thresholded vector, sorted indices of the kept entries)
    """
    order = np.argsort(-np.abs(x), kind="stable")
    support = np.sort(order[:k])
    out = np.zeros_like(x)
    out[support] = x[support]
    return out, support


def niht(QA, Qy, k: int, opts: Optional[NihtOptions] = None) -> RecoveryResult:
    """Normalized iterative hard thresholding started at x = 0.

    Each iteration takes the gradient g = QA^T (Qy - QA x), the step
    mu = ||g_S||^2 / ||QA_S g_S||^2 on the current support S, and
    x_new = H_k(x + mu g). When the support changes the step is halved
    until mu <= (1 - c) ||x_new - x||^2 / ||QA (x_new - x)||^2.

    Raises:
        ValueError: If k is outside [1, n].
    """
    started = time.perf_counter()
    opts = opts or NihtOptions()
    A = np.asarray(QA, dtype=float)
    y = np.asarray(Qy, dtype=float)
    n = A.shape[1]
    if not 1 <= k <= n:
        raise ValueError(f"NIHT sparsity k={k} must lie in [1, {n}]")

    x = np.zeros(n)
    _, support = hard_threshold(A.T @ y, k)
    status = SolverStatus.NON_CONVERGED
    iterations = 0

    for iteration in range(1, opts.max_iters + 1):
        g = A.T @ (y - A @ x)
        g_s = g[support]
        denom = np.linalg.norm(A[:, support] @ g_s) ** 2
        if np.linalg.norm(g_s) == 0.0 or denom == 0.0:
            # Stationary on the current support
            status = SolverStatus.CONVERGED
            iterations = iteration - 1
            break
        mu = np.linalg.norm(g_s) ** 2 / denom

        x_new, support_new = hard_threshold(x + mu * g, k)
        for _ in range(opts.max_backtracks):
            if np.array_equal(support_new, support):
                break
            diff = x_new - x
            a_diff = np.linalg.norm(A @ diff) ** 2
            if a_diff == 0.0:
                break
            omega = (1.0 - opts.shrink_margin) * np.linalg.norm(diff) ** 2 / a_diff
            if mu <= omega:
                break
            mu /= 2.0
            x_new, support_new = hard_threshold(x + mu * g, k)

        change = np.linalg.norm(x_new - x)
        reference = np.linalg.norm(x)
        x, support = x_new, support_new
        iterations = iteration
        if change <= opts.tol * reference:
            status = SolverStatus.CONVERGED
            break

    if status is SolverStatus.NON_CONVERGED:
        logger.warning(f"NIHT did not converge in {opts.max_iters} iterations")
    return RecoveryResult(
        x_hat=x,
        method=Method.NIHT,
        solver_status=status,
        iterations=iterations,
        wall_time=time.perf_counter() - started,
    )
