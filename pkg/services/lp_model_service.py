"""LP formulations built from quantized data.

The errors-in-variables program keeps x >= 0 and folds the bounded matrix
perturbation into the constraint matrix:

    minimize  1^T x   subject to   C x <= c,  x >= 0
    C = [ QA - dA 11^T ; -QA - dA 11^T ],   c = [ Qy + dy 1 ; -Qy + dy 1 ]

BPDN-inf baselines are signed unless asked otherwise and are encoded with
the split x = x_plus - x_minus.
"""
import math

import numpy as np

from domain.models import LpProblem


def _check_data(QA, Qy) -> tuple[np.ndarray, np.ndarray]:
    QA = np.asarray(QA, dtype=float)
    Qy = np.asarray(Qy, dtype=float)
    if QA.ndim != 2:
        raise ValueError(f"QA must be a matrix, got shape {QA.shape}")
    if Qy.ndim != 1 or Qy.shape[0] != QA.shape[0]:
        raise ValueError(f"Qy of shape {Qy.shape} does not match QA of shape {QA.shape}")
    return QA, Qy


def build_lp_constraints(QA, Qy, delta_A: float, delta_y: float) -> tuple[np.ndarray, np.ndarray]:
    """Stack the two-sided consistency constraints C x <= c.

    Args:
        QA: Quantized m x n predictor matrix.
        Qy: Quantized length-m measurements.
        delta_A: Entrywise bound on the error of QA.
        delta_y: Entrywise bound on the error of Qy.

    Returns:
        (C, c) with C of shape 2m x n and c of length 2m.

    Raises:
        ValueError: On mismatched shapes or negative bounds.
    """
    QA, Qy = _check_data(QA, Qy)
    if delta_A < 0 or delta_y < 0:
        raise ValueError(f"Error bounds must be nonnegative, got {delta_A}, {delta_y}")

    C = np.vstack([QA - delta_A, -QA - delta_A])
    c = np.concatenate([Qy + delta_y, -Qy + delta_y])
    return C, c


def build_qcs_lp(QA, Qy, delta_A: float, delta_y: float) -> LpProblem:
    C, c = build_lp_constraints(QA, Qy, delta_A, delta_y)
    # 1^T x equals ||x||_1 on the nonnegative orthant
    return LpProblem(objective=np.ones(C.shape[1]), G=C, h=c, nonneg=True)


def build_bpdn_inf_lp(QA, Qy, epsilon: float, *, nonneg: bool = False) -> LpProblem:
    """min ||x||_1 subject to ||QA x - Qy||_inf <= epsilon.

    The signed problem uses 2n variables (x_plus, x_minus); with nonneg=True
    the sign constraint x >= 0 is imposed directly on n variables.
    """
    QA, Qy = _check_data(QA, Qy)
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")

    block = QA if nonneg else np.hstack([QA, -QA])
    G = np.vstack([block, -block])
    h = np.concatenate([Qy + epsilon, -Qy + epsilon])
    return LpProblem(objective=np.ones(G.shape[1]), G=G, h=h, nonneg=True)


def epsilon_setting1(delta_y: float) -> float:
    """Noise bound when the quantization of A is ignored."""
    _check_nonnegative(delta_y=delta_y)
    return float(delta_y)


def epsilon_setting2(delta_A: float, k: int, r: float, delta_y: float) -> float:
    """Noise bound with the matrix error moved onto the measurements.

    From QA x - Qy = dA x - dy and ||x||_1 <= k r.
    """
    _check_nonnegative(delta_A=delta_A, k=k, r=r, delta_y=delta_y)
    return float(delta_A * k * r + delta_y)


def epsilon_setting1_l2(delta_y: float, m: int) -> float:
    return math.sqrt(m) * epsilon_setting1(delta_y)


def epsilon_setting2_l2(delta_A: float, k: int, r: float, delta_y: float, m: int) -> float:
    return math.sqrt(m) * epsilon_setting2(delta_A, k, r, delta_y)


def _check_nonnegative(**values: float) -> None:
    for name, value in values.items():
        if value < 0:
            raise ValueError(f"{name} must be nonnegative, got {value}")


def eiv_feasible(QA, Qy, delta_A: float, delta_y: float, x, perturbation, tol: float = 0.0) -> bool:
    """Membership of x in the errors-in-variables set for one realization of dA.

    True iff ||perturbation||_inf <= delta_A and
    ||Qy - (QA - perturbation) x||_inf <= delta_y + tol.
    """
    QA, Qy = _check_data(QA, Qy)
    perturbation = np.asarray(perturbation, dtype=float)
    if perturbation.shape != QA.shape:
        raise ValueError(f"Perturbation shape {perturbation.shape} does not match QA {QA.shape}")
    if np.max(np.abs(perturbation), initial=0.0) > delta_A:
        return False
    residual = Qy - (QA - perturbation) @ np.asarray(x, dtype=float)
    return bool(np.max(np.abs(residual), initial=0.0) <= delta_y + tol)


def format_lp(problem: LpProblem) -> str:
    """Plain-text dump: a header, the objective row, then one row per inequality."""
    lines = [
        f"# minimize c^T z subject to G z <= h{', z >= 0' if problem.nonneg else ''}",
        f"# vars {problem.num_vars} rows {problem.num_rows}",
        "obj " + " ".join(repr(float(v)) for v in problem.objective),
    ]
    for row, rhs in zip(problem.G, problem.h):
        lines.append(" ".join(repr(float(v)) for v in row) + f" <= {float(rhs)!r}")
    return "\n".join(lines) + "\n"
