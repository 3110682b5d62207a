"""Tests for the uniform quantizer."""
import numpy as np
import pytest

from services.quantizer_service import (
    codebook,
    make_uniform_quantizer,
    quantize_array,
    quantize_matrix,
    quantize_scalar,
    quantize_vector,
    saturation_count,
)


class TestMakeUniformQuantizer:
    """Tests for quantizer construction."""

    def test_three_levels(self):
        """Test step, error bound and codebook of a 3-level quantizer."""
        q = make_uniform_quantizer(3, -1.0, 1.0)
        assert q.step == 1.0
        assert q.max_error == 0.5
        assert codebook(q).tolist() == [-1.0, 0.0, 1.0]

    def test_two_levels(self):
        """Test that the two-point codebook is the range endpoints."""
        q = make_uniform_quantizer(2, 0.0, 1.0)
        assert codebook(q).tolist() == [0.0, 1.0]
        assert q.max_error == 0.5

    def test_default_range(self):
        """Test the error bound over [-r, r] with r=10."""
        q = make_uniform_quantizer(1000, -10.0, 10.0)
        assert q.max_error == pytest.approx(10.0 / 999)

    @pytest.mark.parametrize("levels", [1, 0, -3])
    def test_too_few_levels(self, levels):
        """Test that fewer than two levels is rejected."""
        with pytest.raises(ValueError):
            make_uniform_quantizer(levels, 0.0, 1.0)

    def test_empty_range(self):
        """Test that an empty range is rejected."""
        with pytest.raises(ValueError):
            make_uniform_quantizer(5, 1.0, 1.0)


class TestQuantizeScalar:
    """Tests for nearest-level mapping."""

    @pytest.fixture
    def q(self):
        return make_uniform_quantizer(3, -1.0, 1.0)

    @pytest.mark.parametrize(
        "value, expected",
        [
            (0.4, 0.0),
            (1.0, 1.0),
            (0.5, 1.0),  # tie goes to the larger level
            (-0.5, 0.0),
            (7.0, 1.0),
            (-7.0, -1.0),
        ],
    )
    def test_examples(self, q, value, expected):
        """Test nearest level, ties and saturation."""
        assert quantize_scalar(q, value) == expected

    def test_result_is_on_codebook(self, q, rng):
        """Test that every output is a codebook point within max_error of an in-range input."""
        values = rng.uniform(-1.0, 1.0, size=500)
        out = quantize_array(q, values)
        assert np.all(np.isin(out, codebook(q)))
        assert np.max(np.abs(out - values)) <= q.max_error + 1e-15

    def test_fine_quantizer_error_bound(self, rng):
        """Test the error bound of a many-level quantizer."""
        q = make_uniform_quantizer(5000, -10.0, 10.0)
        values = rng.uniform(-10.0, 10.0, size=2000)
        assert np.max(np.abs(quantize_array(q, values) - values)) <= q.max_error + 1e-12

    def test_idempotent(self, rng):
        """Test that quantizing a quantized value leaves it unchanged."""
        q = make_uniform_quantizer(250, -10.0, 10.0)
        once = quantize_array(q, rng.uniform(-12.0, 12.0, size=300))
        np.testing.assert_array_equal(quantize_array(q, once), once)

    def test_monotone(self, rng):
        """Test that quantization preserves order."""
        q = make_uniform_quantizer(100, -10.0, 10.0)
        values = np.sort(rng.uniform(-11.0, 11.0, size=400))
        assert np.all(np.diff(quantize_array(q, values)) >= 0)


class TestQuantizeMatrix:
    """Tests for elementwise matrix and vector quantization."""

    @pytest.fixture
    def q(self):
        return make_uniform_quantizer(3, -1.0, 1.0)

    def test_identity_unchanged(self, q):
        """Test that entries already on levels pass through."""
        np.testing.assert_array_equal(quantize_matrix(q, np.eye(2)), np.eye(2))

    def test_row(self, q):
        """Test elementwise nearest level."""
        np.testing.assert_array_equal(quantize_matrix(q, [[0.4, -0.4]]), [[0.0, 0.0]])

    def test_empty(self, q):
        """Test that an empty matrix stays empty with its shape."""
        out = quantize_matrix(q, np.zeros((0, 3)))
        assert out.shape == (0, 3)

    def test_vector(self, q):
        """Test vector quantization."""
        np.testing.assert_array_equal(quantize_vector(q, [0.2, 0.6, -0.9]), [0.0, 1.0, -1.0])


class TestSaturationCount:
    """Tests for out-of-range counting."""

    def test_counts_both_sides(self):
        """Test that values beyond either end are counted, endpoints are not."""
        q = make_uniform_quantizer(3, -1.0, 1.0)
        assert saturation_count(q, [-1.5, -1.0, 0.0, 1.0, 1.0001]) == 2

    def test_none_in_range(self):
        """Test that in-range data saturates nothing."""
        q = make_uniform_quantizer(100, -10.0, 10.0)
        assert saturation_count(q, np.linspace(-10, 10, 50)) == 0
