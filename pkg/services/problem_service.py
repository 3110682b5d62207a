"""Ground-truth instance generation and the quantized problem data model.

Random draws come from numpy's PCG64 bit generator seeded with the instance
seed, so a given (n, m, k, r, quantizer, seed) reproduces bit for bit.
"""
import logging
from typing import Optional

import numpy as np

from core.constants import INSTANCE_SCHEMA_VERSION
from core.exceptions import InstanceFormatError
from domain.models import InstanceDocument, ProblemInstance, Quantizer
from services.quantizer_service import quantize_matrix, quantize_vector, saturation_count

logger = logging.getLogger(__name__)

# y must equal A @ x_true up to accumulation roundoff
MEASUREMENT_REL_TOL = 1e-10
# Slack for the arithmetic in range_lo + index * step
QUANTIZATION_ROUNDOFF = 1e-12


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=float)
    array.setflags(write=False)
    return array


def generate_instance(
    n: int,
    m: int,
    k: int,
    r: float,
    quantizer: Optional[Quantizer],
    seed: int,
    *,
    measurement_quantizer: Optional[Quantizer] = None,
    column_norm: Optional[float] = None,
) -> ProblemInstance:
    """Draw a sparse nonnegative signal, a Gaussian matrix and their quantized forms.

    A has i.i.d. N(0, 1/m) entries; the support of x_true is a uniform random
    k-subset and its nonzeros are uniform on (0, r].

    Args:
        n: Signal dimension.
        m: Number of measurements.
        k: Number of nonzeros in x_true.
        r: Amplitude bound of the nonzeros.
        quantizer: Applied to A (and to y unless measurement_quantizer is
            given). None produces an unquantized instance with zero bounds.
        seed: Nonnegative seed of the PCG64 generator.
        measurement_quantizer: Optional separate quantizer for y.
        column_norm: If set, every column of A is rescaled to this l2 norm
            before measuring.

    Returns:
        ProblemInstance with read-only arrays.

    Raises:
        ValueError: On nonpositive dimensions, k outside [0, n], r <= 0 or a
            negative seed.
    """
    if n < 1 or m < 1:
        raise ValueError(f"Dimensions must be positive, got n={n}, m={m}")
    if not 0 <= k <= n:
        raise ValueError(f"Sparsity k={k} must lie in [0, n={n}]")
    if not r > 0:
        raise ValueError(f"Amplitude bound r must be positive, got {r}")
    if seed < 0:
        raise ValueError(f"Seed must be nonnegative, got {seed}")
    if column_norm is not None and not column_norm > 0:
        raise ValueError(f"column_norm must be positive, got {column_norm}")

    rng = make_rng(seed)
    A = rng.normal(0.0, 1.0 / np.sqrt(m), size=(m, n))
    if column_norm is not None:
        A = A * (column_norm / np.linalg.norm(A, axis=0))

    support = np.sort(rng.choice(n, size=k, replace=False))
    x_true = np.zeros(n)
    # 1 - U[0, 1) lies in (0, 1], so no drawn entry is exactly zero
    x_true[support] = r * (1.0 - rng.random(k))
    y = A @ x_true

    y_quantizer = measurement_quantizer or quantizer
    if quantizer is None:
        QA, delta_A, saturated = A.copy(), 0.0, 0
    else:
        QA = quantize_matrix(quantizer, A)
        delta_A = quantizer.max_error
        saturated = saturation_count(quantizer, A)

    if y_quantizer is None:
        Qy, delta_y = y.copy(), 0.0
    else:
        Qy = quantize_vector(y_quantizer, y)
        delta_y = y_quantizer.max_error
        saturated += saturation_count(y_quantizer, y)

    if saturated:
        logger.warning(f"Instance seed={seed}: {saturated} entries saturated by the quantizer")

    return ProblemInstance(
        n=n,
        m=m,
        k=k,
        A=_frozen(A),
        x_true=_frozen(x_true),
        y=_frozen(y),
        QA=_frozen(QA),
        Qy=_frozen(Qy),
        delta_A_bound=delta_A,
        delta_y_bound=delta_y,
        r=float(r),
        seed=int(seed),
        levels=quantizer.levels if quantizer is not None else None,
        saturation_count=saturated,
    )


def verify_instance(p: ProblemInstance) -> bool:
    """Check every ProblemInstance invariant; used as a test oracle."""
    if p.A.shape != (p.m, p.n) or p.QA.shape != (p.m, p.n):
        return False
    if p.x_true.shape != (p.n,) or p.y.shape != (p.m,) or p.Qy.shape != (p.m,):
        return False
    if p.delta_A_bound < 0 or p.delta_y_bound < 0 or not p.r > 0:
        return False
    if not all(np.all(np.isfinite(a)) for a in (p.A, p.x_true, p.y, p.QA, p.Qy)):
        return False

    # Nonnegativity and exact sparsity
    if np.any(p.x_true < 0) or np.any(p.x_true > p.r):
        return False
    if np.count_nonzero(p.x_true) != p.k:
        return False

    scale = 1.0 + float(np.max(np.abs(p.A) @ np.abs(p.x_true), initial=0.0))
    if np.max(np.abs(p.y - p.A @ p.x_true), initial=0.0) > MEASUREMENT_REL_TOL * scale:
        return False

    if np.max(np.abs(p.QA - p.A), initial=0.0) > p.delta_A_bound + QUANTIZATION_ROUNDOFF:
        return False
    if np.max(np.abs(p.Qy - p.y), initial=0.0) > p.delta_y_bound + QUANTIZATION_ROUNDOFF:
        return False
    return True


def instance_to_document(p: ProblemInstance) -> InstanceDocument:
    return InstanceDocument(
        schema_version=INSTANCE_SCHEMA_VERSION,
        n=p.n,
        m=p.m,
        k=p.k,
        r=p.r,
        seed=p.seed,
        A=p.A.tolist(),
        x_true=p.x_true.tolist(),
        y=p.y.tolist(),
        QA=p.QA.tolist(),
        Qy=p.Qy.tolist(),
        delta_A_bound=p.delta_A_bound,
        delta_y_bound=p.delta_y_bound,
        levels=p.levels,
        saturation_count=p.saturation_count,
    )


def _matrix(doc: InstanceDocument, name: str) -> np.ndarray:
    rows = getattr(doc, name)
    if len(rows) != doc.m or any(len(row) != doc.n for row in rows):
        raise InstanceFormatError(name, f"expected a {doc.m}x{doc.n} matrix")
    return _frozen(np.array(rows, dtype=float).reshape(doc.m, doc.n))


def _vector(doc: InstanceDocument, name: str, length: int) -> np.ndarray:
    values = getattr(doc, name)
    if len(values) != length:
        raise InstanceFormatError(name, f"expected {length} entries, got {len(values)}")
    return _frozen(np.array(values, dtype=float))


def instance_from_document(doc: InstanceDocument) -> ProblemInstance:
    """Rebuild a ProblemInstance, naming the first malformed field.

    Raises:
        InstanceFormatError: On an unsupported schema version or a field
            whose shape or range is inconsistent with the header.
    """
    if doc.schema_version != INSTANCE_SCHEMA_VERSION:
        raise InstanceFormatError(
            "schema_version", f"unsupported version {doc.schema_version}, expected {INSTANCE_SCHEMA_VERSION}"
        )
    for name in ("n", "m"):
        if getattr(doc, name) < 1:
            raise InstanceFormatError(name, "must be positive")
    if not 0 <= doc.k <= doc.n:
        raise InstanceFormatError("k", f"must lie in [0, {doc.n}]")
    if not doc.r > 0:
        raise InstanceFormatError("r", "must be positive")
    for name in ("delta_A_bound", "delta_y_bound"):
        if getattr(doc, name) < 0:
            raise InstanceFormatError(name, "must be nonnegative")

    return ProblemInstance(
        n=doc.n,
        m=doc.m,
        k=doc.k,
        A=_matrix(doc, "A"),
        x_true=_vector(doc, "x_true", doc.n),
        y=_vector(doc, "y", doc.m),
        QA=_matrix(doc, "QA"),
        Qy=_vector(doc, "Qy", doc.m),
        delta_A_bound=doc.delta_A_bound,
        delta_y_bound=doc.delta_y_bound,
        r=doc.r,
        seed=doc.seed,
        levels=doc.levels,
        saturation_count=doc.saturation_count,
    )
