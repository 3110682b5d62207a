"""Uniform scalar quantization with explicit worst-case error bounds.

The codebook holds `levels` equidistant points spanning [range_lo, range_hi]
with both endpoints included. Values are mapped to the closest point; exact
midpoints go to the larger level and out-of-range values saturate.
"""
import numpy as np

from domain.models import Quantizer


def make_uniform_quantizer(levels: int, range_lo: float, range_hi: float) -> Quantizer:
    """Build a uniform quantizer over a closed range.

    Args:
        levels: Number of codebook points, at least 2.
        range_lo: Lower end of the range (first codebook point).
        range_hi: Upper end of the range (last codebook point).

    Returns:
        Quantizer with step (range_hi - range_lo)/(levels - 1) and
        max_error step/2.

    Raises:
        ValueError: If levels < 2 or the range is empty.
    """
    if int(levels) != levels or levels < 2:
        raise ValueError(f"Quantizer needs at least 2 levels, got {levels}")
    if not range_lo < range_hi:
        raise ValueError(f"Empty quantization range [{range_lo}, {range_hi}]")

    step = (range_hi - range_lo) / (levels - 1)
    return Quantizer(
        levels=int(levels),
        range_lo=float(range_lo),
        range_hi=float(range_hi),
        step=step,
        max_error=step / 2,
    )


def codebook(q: Quantizer) -> np.ndarray:
    """All codebook points in increasing order."""
    return q.range_lo + np.arange(q.levels) * q.step


def quantize_array(q: Quantizer, values) -> np.ndarray:
    """Elementwise nearest-level quantization of an array of any shape."""
    values = np.asarray(values, dtype=float)
    clamped = np.clip(values, q.range_lo, q.range_hi)
    # floor(t + 1/2) sends ties to the larger level
    index = np.floor((clamped - q.range_lo) / q.step + 0.5)
    index = np.clip(index, 0, q.levels - 1)
    return q.range_lo + index * q.step


def quantize_scalar(q: Quantizer, v: float) -> float:
    return float(quantize_array(q, v))


def quantize_vector(q: Quantizer, v) -> np.ndarray:
    return quantize_array(q, np.asarray(v, dtype=float).reshape(-1))


def quantize_matrix(q: Quantizer, M) -> np.ndarray:
    return quantize_array(q, np.asarray(M, dtype=float))


def saturation_count(q: Quantizer, values) -> int:
    """Number of entries lying outside [range_lo, range_hi]."""
    values = np.asarray(values, dtype=float)
    return int(np.count_nonzero((values < q.range_lo) | (values > q.range_hi)))
