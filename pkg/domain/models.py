from dataclasses import dataclass, field
from enum import Enum as PyEnum
from typing import Optional

import msgspec
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.constants import (
    DEFAULT_K,
    DEFAULT_LEVELS,
    DEFAULT_M,
    DEFAULT_N,
    DEFAULT_R,
    DEFAULT_TRIALS,
    INT64_MAX,
    INT64_MIN,
)


class Method(str, PyEnum):
    QCS_LP = "qcs-lp"
    BPDN_INF = "bpdn-inf"
    BPDN_INF_NN = "bpdn-inf-nn"
    BPDN_2 = "bpdn-2"
    NIHT = "niht"

    @property
    def uses_setting(self) -> bool:
        """BPDN variants need a noise bound chosen by one of the two settings."""
        return self in (Method.BPDN_INF, Method.BPDN_INF_NN, Method.BPDN_2)


class BpdnSetting(str, PyEnum):
    # Setting 1 ignores the quantization of A, Setting 2 moves it onto y
    SETTING1 = "setting1"
    SETTING2 = "setting2"


class SettingChoice(str, PyEnum):
    SETTING1 = "setting1"
    SETTING2 = "setting2"
    BOTH = "both"

    def expand(self) -> tuple[BpdnSetting, ...]:
        if self is SettingChoice.BOTH:
            return (BpdnSetting.SETTING1, BpdnSetting.SETTING2)
        return (BpdnSetting(self.value),)


class SolverStatus(str, PyEnum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"
    CONVERGED = "converged"
    NON_CONVERGED = "non_converged"
    ERROR = "error"

    @property
    def is_success(self) -> bool:
        return self in (SolverStatus.OPTIMAL, SolverStatus.CONVERGED)


@dataclass(frozen=True)
class Quantizer:
    """Uniform codebook range_lo + i*step, i = 0..levels-1, endpoints included."""
    levels: int
    range_lo: float
    range_hi: float
    step: float
    max_error: float


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    n: int
    m: int
    k: int
    A: np.ndarray
    x_true: np.ndarray
    y: np.ndarray
    QA: np.ndarray
    Qy: np.ndarray
    delta_A_bound: float
    delta_y_bound: float
    r: float
    seed: int
    levels: Optional[int] = None
    saturation_count: int = 0


@dataclass(frozen=True, eq=False)
class LpProblem:
    """minimize objective @ z subject to G @ z <= h (and z >= 0 when nonneg)."""
    objective: np.ndarray
    G: np.ndarray
    h: np.ndarray
    nonneg: bool = True

    def __post_init__(self):
        if self.G.ndim != 2 or self.h.ndim != 1 or self.objective.ndim != 1:
            raise ValueError("LP data must be a matrix G and vectors h, objective")
        if self.G.shape[0] != self.h.shape[0]:
            raise ValueError(f"G has {self.G.shape[0]} rows but h has {self.h.shape[0]} entries")
        if self.G.shape[1] != self.objective.shape[0]:
            raise ValueError(
                f"G has {self.G.shape[1]} columns but objective has {self.objective.shape[0]} entries"
            )

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def num_rows(self) -> int:
        return self.G.shape[0]


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: SolverStatus
    z: np.ndarray
    objective_value: float
    iterations: int


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    x_hat: np.ndarray
    method: Method
    solver_status: SolverStatus
    iterations: int
    wall_time: float


class MetricsRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    rel_l2_sq: float
    rel_l1: float
    sparsity: float
    fpr: float
    fnr: float
    zero_tol: float

    @classmethod
    def missing(cls, zero_tol: float) -> "MetricsRecord":
        """Placeholder for a recovery that produced no estimate."""
        nan = float("nan")
        return cls(rel_l2_sq=nan, rel_l1=nan, sparsity=nan, fpr=nan, fnr=nan, zero_tol=zero_tol)


class CoherenceReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    mu: float
    rho: float
    hypothesis_gap_ok: bool
    k_max_for_T: Optional[int]
    T: Optional[float]


class SolveReport(BaseModel):
    """Stdout payload of the `solve` command."""
    method: Method
    setting: Optional[BpdnSetting]
    status: SolverStatus
    iterations: int
    metrics: MetricsRecord


def _split_csv(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class SweepConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(default=DEFAULT_N, ge=1)
    m: int = Field(default=DEFAULT_M, ge=1)
    k: int = Field(default=DEFAULT_K, ge=0)
    r: float = Field(default=DEFAULT_R, gt=0)
    levels_list: tuple[int, ...] = DEFAULT_LEVELS
    trials: int = Field(default=DEFAULT_TRIALS, ge=1, le=INT64_MAX)
    base_seed: int = Field(default=0, ge=INT64_MIN, le=INT64_MAX)
    methods: tuple[Method, ...] = (Method.QCS_LP, Method.BPDN_INF, Method.BPDN_2, Method.NIHT)
    bpdn_setting: SettingChoice = SettingChoice.BOTH
    zero_tol: Optional[float] = Field(default=None, gt=0)

    @field_validator("levels_list", "methods", mode="before")
    @classmethod
    def parse_comma_list(cls, value):
        return _split_csv(value)

    @field_validator("levels_list")
    @classmethod
    def check_levels(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value:
            raise ValueError("levels_list must not be empty")
        if any(not 2 <= levels <= INT64_MAX for levels in value):
            raise ValueError("every entry of levels_list must lie in [2, 2**63 - 1]")
        if len(set(value)) != len(value):
            raise ValueError("levels_list must not repeat a level")
        return value

    @field_validator("methods")
    @classmethod
    def dedupe_methods(cls, value: tuple[Method, ...]) -> tuple[Method, ...]:
        if not value:
            raise ValueError("methods must not be empty")
        return tuple(dict.fromkeys(value))

    @model_validator(mode="after")
    def check_dimensions(self) -> "SweepConfig":
        if self.k > self.n:
            raise ValueError(f"k={self.k} exceeds n={self.n}")
        return self

    def effective_zero_tol(self, factor: float) -> float:
        return self.zero_tol if self.zero_tol is not None else factor * self.r

    def method_settings(self) -> list[tuple[Method, Optional[BpdnSetting]]]:
        """Every (method, setting) combination one trial produces a row for."""
        combos: list[tuple[Method, Optional[BpdnSetting]]] = []
        for method in self.methods:
            if method.uses_setting:
                combos.extend((method, setting) for setting in self.bpdn_setting.expand())
            else:
                combos.append((method, None))
        return combos


@dataclass(frozen=True)
class SweepRow:
    levels: int
    trial: int
    method: Method
    setting: Optional[BpdnSetting]
    seed: int
    status: SolverStatus
    iterations: int
    metrics: MetricsRecord
    wall_time: float = field(default=0.0, compare=False)

    @property
    def sort_key(self) -> tuple[int, int, str, str]:
        return (self.levels, self.trial, self.method.value, self.setting.value if self.setting else "")


class InstanceDocument(msgspec.Struct, forbid_unknown_fields=True):
    """On-disk JSON form of a ProblemInstance, arrays dense and row-major."""
    schema_version: int
    n: int
    m: int
    k: int
    r: float
    seed: int
    A: list[list[float]]
    x_true: list[float]
    y: list[float]
    QA: list[list[float]]
    Qy: list[float]
    delta_A_bound: float
    delta_y_bound: float
    levels: Optional[int] = None
    saturation_count: int = 0


@dataclass(frozen=True)
class AggregateRow:
    """Means over the trials of one (levels, method, setting) cell."""
    levels: int
    method: Method
    setting: Optional[BpdnSetting]
    trials: int
    failures: int
    mean_rel_l2_sq: float
    mean_rel_l1: float
    mean_sparsity: float
    mean_fpr: float
    mean_fnr: float
    mean_iterations: float


class GenReport(BaseModel):
    """Stdout payload of the `gen` command."""
    path: str
    seed: int
    levels: Optional[int]
    delta_A_bound: float
    delta_y_bound: float
    saturation_count: int


class SweepSummary(BaseModel):
    """Stdout payload of the `sweep` command."""
    raw: str
    aggregate: str
    timings: str
    rows: int
    failures: int
