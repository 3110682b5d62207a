"""Dense two-phase primal simplex for min c^T z, G z <= h, z >= 0.

The tableau is the slack-augmented standard form G z + s = h. Rows with a
negative right-hand side are negated and receive an artificial variable;
Phase 1 minimizes the sum of artificials, Phase 2 the true objective.
Bland's rule is the default pivoting rule and guarantees termination.
"""
import itertools
import logging
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.config import settings
from core.constants import ORACLE_MAX_SIZE
from core.exceptions import LpNumericalError, OracleSizeError
from domain.models import LpProblem, LpSolution, SolverStatus

logger = logging.getLogger(__name__)


class LpSolverOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    feas_tol: float = Field(default_factory=lambda: settings.LP_FEAS_TOL, gt=0)
    pivot_tol: float = Field(default_factory=lambda: settings.LP_PIVOT_TOL, gt=0)
    rule: Literal["bland", "dantzig"] = Field(default_factory=lambda: settings.LP_PIVOT_RULE)
    # None means 50 * (num_vars + num_rows)
    max_iters: Optional[int] = Field(default=None, ge=1)

    def iteration_limit(self, problem: LpProblem) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return 50 * (problem.num_vars + problem.num_rows)


class _Tableau:
    """Rows 0..p-1 hold [A | b]; the last row holds reduced costs and -objective."""

    def __init__(self, table: np.ndarray, basis: np.ndarray, opts: LpSolverOptions):
        self.table = table
        self.basis = basis
        self.opts = opts

    @property
    def num_rows(self) -> int:
        return self.table.shape[0] - 1

    def price(self, costs: np.ndarray) -> None:
        """Reset the objective row to the reduced costs of `costs` for the current basis."""
        row = np.zeros(self.table.shape[1])
        row[: costs.shape[0]] = costs
        basic_costs = row[self.basis]
        row -= basic_costs @ self.table[:-1]
        self.table[-1] = row

    def pivot(self, row: int, col: int) -> None:
        table = self.table
        table[row] /= table[row, col]
        column = table[:, col].copy()
        column[row] = 0.0
        table -= np.outer(column, table[row])
        rhs = table[:-1, -1]
        # Snap roundoff-level negatives so the ratio test stays well defined
        rhs[(rhs < 0) & (rhs > -self.opts.pivot_tol)] = 0.0
        self.basis[row] = col

    def entering(self, allowed: int) -> Optional[int]:
        reduced = self.table[-1, :allowed]
        candidates = np.flatnonzero(reduced < -self.opts.pivot_tol)
        if candidates.size == 0:
            return None
        if self.opts.rule == "bland":
            return int(candidates[0])
        return int(candidates[np.argmin(reduced[candidates])])

    def leaving(self, col: int) -> Optional[int]:
        column = self.table[:-1, col]
        rows = np.flatnonzero(column > self.opts.pivot_tol)
        if rows.size == 0:
            return None
        ratios = self.table[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + self.opts.pivot_tol * max(1.0, abs(best))]
        if self.opts.rule == "bland":
            # Smallest basic variable index among the tied rows
            return int(ties[np.argmin(self.basis[ties])])
        return int(ties[0])

    def run(self, allowed: int, budget: int) -> tuple[SolverStatus, int]:
        """Pivot until optimal, unbounded or out of budget; returns (status, pivots)."""
        pivots = 0
        while True:
            col = self.entering(allowed)
            if col is None:
                return SolverStatus.OPTIMAL, pivots
            row = self.leaving(col)
            if row is None:
                return SolverStatus.UNBOUNDED, pivots
            if pivots >= budget:
                return SolverStatus.ITERATION_LIMIT, pivots
            self.pivot(row, col)
            pivots += 1


def _failed(problem: LpProblem, status: SolverStatus, iterations: int) -> LpSolution:
    return LpSolution(
        status=status,
        z=np.full(problem.num_vars, np.nan),
        objective_value=float("nan"),
        iterations=iterations,
    )


def solve_lp(problem: LpProblem, opts: Optional[LpSolverOptions] = None) -> LpSolution:
    """Solve a nonnegative inequality-form LP with the two-phase simplex.

    Args:
        problem: LP with nonneg=True; signed problems must be pre-split.
        opts: Tolerances, pivoting rule and iteration limit.

    Returns:
        LpSolution with status Optimal, Infeasible, Unbounded or
        IterationLimit. z and objective_value are NaN unless Optimal.

    Raises:
        ValueError: If the problem is not sign-constrained.
        LpNumericalError: If an Optimal point violates G z <= h + feas_tol.
    """
    opts = opts or LpSolverOptions()
    if not problem.nonneg:
        raise ValueError("solve_lp expects z >= 0; split free variables first")

    G, h, c = problem.G, problem.h, problem.objective
    p, n = G.shape
    budget = opts.iteration_limit(problem)

    flip = h < 0
    artificial_rows = np.flatnonzero(flip)
    num_art = artificial_rows.size
    width = n + p + num_art

    table = np.zeros((p + 1, width + 1))
    table[:p, :n] = G
    table[:p, n:n + p] = np.eye(p)
    table[:p, -1] = h
    table[:p][flip] *= -1.0
    table[artificial_rows, n + p + np.arange(num_art)] = 1.0

    basis = np.arange(n, n + p)
    basis[artificial_rows] = n + p + np.arange(num_art)
    tableau = _Tableau(table, basis, opts)
    iterations = 0

    if num_art:
        phase1_costs = np.zeros(width)
        phase1_costs[n + p:] = 1.0
        tableau.price(phase1_costs)
        status, used = tableau.run(width, budget)
        iterations += used
        if status is SolverStatus.ITERATION_LIMIT:
            return _failed(problem, status, iterations)
        infeasibility = -tableau.table[-1, -1]
        if infeasibility > opts.feas_tol * (1.0 + np.max(np.abs(h))):
            logger.debug(f"Phase 1 ended with infeasibility {infeasibility:.3e}")
            return _failed(problem, SolverStatus.INFEASIBLE, iterations)

        # Drive artificials out of the basis; rows that cannot pivot are redundant
        keep = np.ones(p, dtype=bool)
        for row in np.flatnonzero(tableau.basis >= n + p):
            candidates = np.flatnonzero(np.abs(tableau.table[row, :n + p]) > opts.pivot_tol)
            if candidates.size:
                tableau.pivot(row, int(candidates[0]))
                iterations += 1
            else:
                keep[row] = False
        kept = np.append(np.flatnonzero(keep), p)
        tableau = _Tableau(
            np.delete(tableau.table[kept], np.s_[n + p:width], axis=1),
            tableau.basis[keep].copy(),
            opts,
        )

    tableau.price(np.concatenate([c, np.zeros(p)]))
    status, used = tableau.run(n + p, budget - iterations)
    iterations += used
    if status is not SolverStatus.OPTIMAL:
        logger.debug(f"Simplex stopped with status {status.value} after {iterations} pivots")
        return _failed(problem, status, iterations)

    z = _basic_solution(G, h, tableau.basis, tableau.table[:-1, -1])[:n]
    _check_feasible(problem, z, opts.feas_tol)
    z = np.maximum(z, 0.0)
    return LpSolution(
        status=SolverStatus.OPTIMAL,
        z=z,
        objective_value=float(c @ z),
        iterations=iterations,
    )


def _basic_solution(G: np.ndarray, h: np.ndarray, basis: np.ndarray, tableau_values: np.ndarray) -> np.ndarray:
    """Basic solution of the final basis re-solved on the original [G | I] z = h.

    One refinement step follows the solve. Rows dropped as redundant in
    Phase 1 leave B with more rows than columns; lstsq covers that case.
    """
    p, n = G.shape
    B = np.hstack([G, np.eye(p)])[:, basis]
    full = np.zeros(n + p)
    try:
        if B.shape[0] == B.shape[1]:
            z_B = np.linalg.solve(B, h)
            z_B += np.linalg.solve(B, h - B @ z_B)
        else:
            z_B = np.linalg.lstsq(B, h, rcond=None)[0]
            z_B += np.linalg.lstsq(B, h - B @ z_B, rcond=None)[0]
    except np.linalg.LinAlgError:
        logger.debug("Final basis is singular; keeping the tableau values")
        z_B = tableau_values
    full[basis] = z_B
    return full


def _check_feasible(problem: LpProblem, z: np.ndarray, feas_tol: float) -> None:
    violation = max(
        float(np.max(problem.G @ z - problem.h, initial=0.0)),
        float(np.max(-z, initial=0.0)),
    )
    if violation > feas_tol:
        logger.warning(f"Simplex point violates constraints by {violation:.3e}")
        raise LpNumericalError(f"Optimal point violates constraints by {violation:.3e}")


def enumerate_vertices_oracle(problem: LpProblem, tol: float = 1e-9) -> LpSolution:
    """Brute-force LP solution by enumerating every basic feasible point.

    The constraint set is G z <= h together with -z <= 0. Every choice of
    num_vars linearly independent active constraints yields a candidate
    vertex. Unboundedness is detected on the normalized recession cone
    {d >= 0, G d <= 0, 1^T d = 1}, whose vertices are enumerated the same way.

    Raises:
        OracleSizeError: If num_vars + num_rows exceeds the enumeration guard.
    """
    if problem.num_vars + problem.num_rows > ORACLE_MAX_SIZE:
        raise OracleSizeError(
            f"Vertex enumeration is limited to num_vars + num_rows <= {ORACLE_MAX_SIZE}"
        )
    n = problem.num_vars
    M = np.vstack([problem.G, -np.eye(n)])
    rhs = np.concatenate([problem.h, np.zeros(n)])
    c = problem.objective

    best_z, best_value, visited = None, np.inf, 0
    for active in itertools.combinations(range(M.shape[0]), n):
        visited += 1
        point = _solve_square(M[list(active)], rhs[list(active)])
        if point is None or np.any(M @ point > rhs + tol * (1.0 + np.abs(rhs))):
            continue
        value = float(c @ point)
        if value < best_value:
            best_z, best_value = point, value

    if best_z is None:
        return _failed(problem, SolverStatus.INFEASIBLE, visited)

    # Recession directions: d >= 0, G d <= 0, normalized by 1^T d = 1
    cone = np.vstack([problem.G, -np.eye(n)])
    for active in itertools.combinations(range(cone.shape[0]), n - 1):
        system = np.vstack([cone[list(active)], np.ones((1, n))])
        rhs_d = np.zeros(n)
        rhs_d[-1] = 1.0
        direction = _solve_square(system, rhs_d)
        if direction is None or np.any(cone @ direction > tol):
            continue
        if c @ direction < -tol:
            return _failed(problem, SolverStatus.UNBOUNDED, visited)

    return LpSolution(
        status=SolverStatus.OPTIMAL,
        z=best_z,
        objective_value=best_value,
        iterations=visited,
    )


def _solve_square(system: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    if system.shape[0] == 0:
        return np.zeros(0)
    if np.linalg.matrix_rank(system) < system.shape[1]:
        return None
    return np.linalg.solve(system, rhs)
