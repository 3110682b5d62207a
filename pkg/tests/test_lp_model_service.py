"""Tests for the LP formulations and noise bounds."""
import itertools
import math

import numpy as np
import pytest

from services.lp_model_service import (
    build_bpdn_inf_lp,
    build_lp_constraints,
    build_qcs_lp,
    eiv_feasible,
    epsilon_setting1,
    epsilon_setting1_l2,
    epsilon_setting2,
    epsilon_setting2_l2,
    format_lp,
)


class TestBuildLpConstraints:
    """Tests for build_lp_constraints."""

    def test_zero_error_one_dimensional(self):
        """Test that zero bounds collapse to the equality QA x = Qy."""
        C, c = build_lp_constraints([[1.0]], [2.0], 0.0, 0.0)
        np.testing.assert_array_equal(C, [[1.0], [-1.0]])
        np.testing.assert_array_equal(c, [2.0, -2.0])

    def test_hand_example(self):
        """Test the row-stacked formula on a 1x2 system."""
        C, c = build_lp_constraints([[1.0, -1.0]], [1.0], 0.5, 0.25)
        np.testing.assert_allclose(C, [[0.5, -1.5], [-1.5, 0.5]])
        np.testing.assert_allclose(c, [1.25, -0.75])

    def test_zero_error_equality(self, rng):
        """Test that with zero bounds x is feasible iff QA x = Qy."""
        QA = rng.normal(size=(3, 4))
        x = rng.uniform(0, 1, size=4)
        Qy = QA @ x
        C, c = build_lp_constraints(QA, Qy, 0.0, 0.0)
        assert np.all(C @ x <= c + 1e-12)
        assert not np.all(C @ (x + 0.1) <= c + 1e-12)

    def test_shapes(self, default_instance):
        """Test 2m x n constraints at the default size."""
        C, c = build_lp_constraints(
            default_instance.QA, default_instance.Qy, default_instance.delta_A_bound, default_instance.delta_y_bound
        )
        assert C.shape == (80, 100)
        assert c.shape == (80,)

    @pytest.mark.parametrize("bounds", [(-0.1, 0.0), (0.0, -0.1)])
    def test_negative_bounds(self, bounds):
        """Test that negative error bounds are rejected."""
        with pytest.raises(ValueError):
            build_lp_constraints([[1.0]], [1.0], *bounds)

    def test_shape_mismatch(self):
        """Test that Qy must have one entry per row of QA."""
        with pytest.raises(ValueError):
            build_lp_constraints([[1.0, 2.0]], [1.0, 2.0], 0.0, 0.0)


class TestErrorsInVariablesEquivalence:
    """The polytope C x <= c equals the set of x >= 0 explained by some bounded matrix error."""

    @staticmethod
    def witness(QA, Qy, delta_A, x):
        # For x >= 0 row i of (QA - d) x sweeps QA_i x -/+ delta_A * sum(x)
        # as d_i runs over constant rows in [-delta_A, delta_A]
        total = x.sum()
        if delta_A == 0 or total == 0:
            return np.zeros_like(QA)
        t = np.clip((QA @ x - Qy) / (delta_A * total), -1.0, 1.0)
        return np.outer(t, np.ones(QA.shape[1])) * delta_A

    def test_random_tiny_instances(self, rng):
        """Test 500 tiny instances against the constructive matrix-error witness."""
        checked = 0
        while checked < 500:
            m, n = rng.integers(1, 4, size=2)
            QA = rng.normal(size=(m, n))
            x0 = rng.uniform(0.0, 2.0, size=n)
            delta_A = rng.uniform(0.0, 0.3)
            delta_y = rng.uniform(0.0, 0.3)
            Qy = QA @ x0 + rng.uniform(-0.5, 0.5, size=m)
            x = np.maximum(x0 + rng.normal(scale=0.3, size=n), 0.0)

            C, c = build_lp_constraints(QA, Qy, delta_A, delta_y)
            margin = np.max(C @ x - c)
            if abs(margin) < 1e-9:
                continue
            in_polytope = margin <= 0
            perturbation = self.witness(QA, Qy, delta_A, x)
            assert eiv_feasible(QA, Qy, delta_A, delta_y, x, perturbation, tol=1e-12) == in_polytope
            checked += 1

    def test_extremal_grid_is_sound(self, rng):
        """Test that any {-d, 0, d} matrix error explaining the data implies polytope membership."""
        for _ in range(100):
            m, n = rng.integers(1, 4, size=2)
            QA = rng.normal(size=(m, n))
            x = rng.uniform(0.0, 1.5, size=n)
            delta_A = rng.uniform(0.05, 0.3)
            delta_y = rng.uniform(0.0, 0.2)
            Qy = QA @ x + rng.uniform(-0.6, 0.6, size=m)
            C, c = build_lp_constraints(QA, Qy, delta_A, delta_y)
            in_polytope = bool(np.all(C @ x <= c + 1e-12))

            # Rows decouple, so search each row's 3^n grid separately
            explained = True
            for i in range(m):
                explained &= any(
                    abs(Qy[i] - (QA[i] - delta_A * np.array(signs)) @ x) <= delta_y
                    for signs in itertools.product((-1.0, 0.0, 1.0), repeat=n)
                )
            if explained:
                assert in_polytope

    def test_perturbation_above_bound(self):
        """Test that a matrix error larger than delta_A is not admissible."""
        assert not eiv_feasible([[1.0]], [1.0], 0.1, 1.0, [1.0], [[0.2]])


class TestBuildQcsLp:
    """Tests for build_qcs_lp."""

    def test_one_dimensional(self):
        """Test the all-ones objective and the forced point x=2."""
        lp = build_qcs_lp([[1.0]], [2.0], 0.0, 0.0)
        np.testing.assert_array_equal(lp.objective, [1.0])
        assert lp.nonneg
        assert np.all(lp.G @ [2.0] <= lp.h)

    def test_default_size(self, default_instance):
        """Test 80 rows and 100 variables."""
        p = default_instance
        lp = build_qcs_lp(p.QA, p.Qy, p.delta_A_bound, p.delta_y_bound)
        assert lp.num_rows == 80
        assert lp.num_vars == 100
        np.testing.assert_array_equal(lp.objective, np.ones(100))


class TestBuildBpdnInfLp:
    """Tests for build_bpdn_inf_lp."""

    def test_signed_split(self):
        """Test the 2n-variable split encoding."""
        lp = build_bpdn_inf_lp([[1.0, 2.0]], [1.0], 0.5)
        assert lp.num_vars == 4
        np.testing.assert_array_equal(lp.G, [[1.0, 2.0, -1.0, -2.0], [-1.0, -2.0, 1.0, 2.0]])
        np.testing.assert_array_equal(lp.h, [1.5, -0.5])

    def test_nonneg_variant(self):
        """Test the n-variable sign-constrained encoding."""
        lp = build_bpdn_inf_lp([[1.0, 2.0]], [1.0], 0.5, nonneg=True)
        assert lp.num_vars == 2

    def test_negative_epsilon(self):
        """Test that a negative radius is rejected."""
        with pytest.raises(ValueError):
            build_bpdn_inf_lp([[1.0]], [1.0], -0.1)


class TestNoiseBounds:
    """Tests for the two BPDN noise settings."""

    def test_setting1(self):
        """Test that Setting 1 is the measurement bound."""
        assert epsilon_setting1(0.05) == 0.05

    def test_setting2(self):
        """Test the hand value 0.1*10*10 + 0.05."""
        assert epsilon_setting2(0.1, 10, 10, 0.05) == pytest.approx(10.05)

    def test_setting2_without_matrix_error(self):
        """Test that Setting 2 reduces to Setting 1 when delta_A is 0."""
        assert epsilon_setting2(0.0, 10, 10.0, 0.05) == epsilon_setting1(0.05)

    def test_l2_variants(self):
        """Test the sqrt(m) scaling of the l2 radii."""
        assert epsilon_setting1_l2(0.05, 40) == pytest.approx(0.05 * math.sqrt(40))
        assert epsilon_setting2_l2(0.1, 10, 10.0, 0.05, 40) == pytest.approx(10.05 * math.sqrt(40))

    def test_negative_inputs(self):
        """Test that negative inputs are rejected."""
        with pytest.raises(ValueError):
            epsilon_setting1(-0.1)
        with pytest.raises(ValueError):
            epsilon_setting2(0.1, -1, 10.0, 0.05)


class TestFormatLp:
    """Tests for the plain-text LP dump."""

    def test_layout(self):
        """Test header, objective and one line per row."""
        text = format_lp(build_qcs_lp([[1.0]], [2.0], 0.0, 0.0))
        lines = text.splitlines()
        assert lines[0].startswith("# minimize")
        assert lines[1] == "# vars 1 rows 2"
        assert lines[2] == "obj 1.0"
        assert lines[3] == "1.0 <= 2.0"
        assert lines[4] == "-1.0 <= -2.0"
