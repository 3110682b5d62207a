"""Tests for the dense simplex and the vertex enumeration oracle."""
import numpy as np
import pytest

from core.exceptions import OracleSizeError
from domain.models import LpProblem, SolverStatus
from services.lp_solver_service import LpSolverOptions, enumerate_vertices_oracle, solve_lp


def lp(objective, G, h, nonneg=True):
    return LpProblem(
        objective=np.asarray(objective, dtype=float),
        G=np.asarray(G, dtype=float),
        h=np.asarray(h, dtype=float),
        nonneg=nonneg,
    )


EXAMPLES = {
    "covering": (lp([1.0, 1.0], [[-1.0, 0.0]], [-1.0]), SolverStatus.OPTIMAL, 1.0),
    "infeasible": (lp([1.0], [[1.0]], [-1.0]), SolverStatus.INFEASIBLE, None),
    "unbounded": (lp([-1.0], [[0.0]], [1.0]), SolverStatus.UNBOUNDED, None),
}


class TestSolveLp:
    """Tests for solve_lp on hand-built problems."""

    def test_covering_example(self):
        """Test min x1 + x2 s.t. x1 >= 1."""
        solution = solve_lp(EXAMPLES["covering"][0])
        assert solution.status is SolverStatus.OPTIMAL
        np.testing.assert_allclose(solution.z, [1.0, 0.0])
        assert solution.objective_value == pytest.approx(1.0)

    def test_infeasible(self):
        """Test x1 <= -1 with x >= 0."""
        solution = solve_lp(EXAMPLES["infeasible"][0])
        assert solution.status is SolverStatus.INFEASIBLE
        assert np.all(np.isnan(solution.z))

    def test_unbounded(self):
        """Test min -x1 with no binding constraint."""
        solution = solve_lp(EXAMPLES["unbounded"][0])
        assert solution.status is SolverStatus.UNBOUNDED

    def test_equality_system(self):
        """Test a 1-D equality written as two inequalities."""
        solution = solve_lp(lp([1.0], [[1.0], [-1.0]], [2.0, -2.0]))
        assert solution.status is SolverStatus.OPTIMAL
        assert solution.z[0] == pytest.approx(2.0)

    def test_degenerate_duplicated_constraint(self):
        """Test a vertex where a duplicated constraint makes the basis degenerate."""
        problem = lp(
            [-1.0, -1.0],
            [[1.0, 2.0], [1.0, 2.0], [2.0, 1.0]],
            [4.0, 4.0, 5.0],
        )
        solution = solve_lp(problem)
        oracle = enumerate_vertices_oracle(problem)
        assert solution.status is SolverStatus.OPTIMAL
        assert solution.objective_value == pytest.approx(oracle.objective_value, abs=1e-8)
        assert solution.objective_value == pytest.approx(-3.0)

    def test_iteration_limit(self):
        """Test that an exhausted pivot budget is reported, not raised."""
        problem = lp([-1.0, -1.0], [[1.0, 2.0], [2.0, 1.0]], [4.0, 5.0])
        solution = solve_lp(problem, LpSolverOptions(max_iters=1))
        assert solution.status is SolverStatus.ITERATION_LIMIT
        assert np.all(np.isnan(solution.z))

    def test_rejects_free_variables(self):
        """Test that signed problems must be split before solving."""
        with pytest.raises(ValueError):
            solve_lp(lp([1.0], [[1.0]], [1.0], nonneg=False))

    def test_default_limit_scales_with_size(self):
        """Test the 50 * (vars + rows) default pivot budget."""
        problem = lp([1.0, 1.0], [[1.0, 1.0]], [1.0])
        assert LpSolverOptions().iteration_limit(problem) == 150
        assert LpSolverOptions(max_iters=7).iteration_limit(problem) == 7


class TestOracle:
    """Tests for enumerate_vertices_oracle."""

    @pytest.mark.parametrize("name", sorted(EXAMPLES))
    def test_examples(self, name):
        """Test that the oracle reproduces the hand examples."""
        problem, status, objective = EXAMPLES[name]
        solution = enumerate_vertices_oracle(problem)
        assert solution.status is status
        if objective is not None:
            assert solution.objective_value == pytest.approx(objective)

    def test_size_guard(self):
        """Test that large problems are refused."""
        problem = lp(np.ones(8), np.ones((5, 8)), np.ones(5))
        with pytest.raises(OracleSizeError):
            enumerate_vertices_oracle(problem)


class TestSimplexAgainstOracle:
    """solve_lp agrees with brute-force enumeration on small random LPs."""

    @staticmethod
    def random_lp(rng):
        n = int(rng.integers(1, 6))
        rows = int(rng.integers(1, 11 - n))
        G = rng.normal(size=(rows, n))
        h = rng.normal(size=rows) + 0.5
        c = rng.normal(size=n)
        return lp(c, G, h)

    @pytest.mark.parametrize("rule", ["bland", "dantzig"])
    def test_random_lps(self, rng, rule):
        """Test status and objective on 200 random LPs with vars + rows <= 10."""
        opts = LpSolverOptions(rule=rule)
        statuses = set()
        for _ in range(200):
            problem = self.random_lp(rng)
            expected = enumerate_vertices_oracle(problem)
            solution = solve_lp(problem, opts)
            assert solution.status is expected.status
            statuses.add(solution.status)
            if expected.status is SolverStatus.OPTIMAL:
                assert solution.objective_value == pytest.approx(expected.objective_value, abs=1e-8)
                assert np.all(problem.G @ solution.z <= problem.h + 1e-9)
                assert np.all(solution.z >= 0)
        # The generator hits every outcome
        assert statuses == {SolverStatus.OPTIMAL, SolverStatus.INFEASIBLE, SolverStatus.UNBOUNDED}
