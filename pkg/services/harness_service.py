"""Quantization-level sweep: seeded trials, every configured method, per-cell means.

Each trial is an independent unit keyed by (base_seed, levels, trial). Rows
are sorted by (levels, trial, method, setting) before they leave run_sweep,
so serial and pooled execution return the same list.
"""
import asyncio
import hashlib
import logging
import math
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from pathlib import Path
from typing import Any, Literal, Mapping, Optional

import numpy as np
from dotenv import dotenv_values

from core.config import settings
from domain.models import (
    AggregateRow,
    BpdnSetting,
    Method,
    MetricsRecord,
    ProblemInstance,
    RecoveryResult,
    SolverStatus,
    SweepConfig,
    SweepRow,
)
from services.analysis_service import compute_metrics
from services.lp_model_service import (
    epsilon_setting1,
    epsilon_setting1_l2,
    epsilon_setting2,
    epsilon_setting2_l2,
)
from services.problem_service import generate_instance
from services.quantizer_service import make_uniform_quantizer
from services.recovery_service import niht, solve_bpdn_2, solve_bpdn_inf, solve_qcs_lp_instance

logger = logging.getLogger(__name__)

# Seeds fit PCG64 and the signed 64-bit integers of the instance JSON
SEED_MASK = (1 << 63) - 1


def trial_seed(base_seed: int, levels: int, trial: int) -> int:
    """Instance seed of one trial: BLAKE2b-64 of the packed triple."""
    payload = b"".join(
        int(value).to_bytes(8, "little", signed=True) for value in (base_seed, levels, trial)
    )
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little") & SEED_MASK


def noise_bound(instance: ProblemInstance, method: Method, setting: BpdnSetting) -> float:
    """Residual radius handed to a BPDN variant under the chosen setting."""
    if method is Method.BPDN_2:
        if setting is BpdnSetting.SETTING1:
            return epsilon_setting1_l2(instance.delta_y_bound, instance.m)
        return epsilon_setting2_l2(
            instance.delta_A_bound, instance.k, instance.r, instance.delta_y_bound, instance.m
        )
    if setting is BpdnSetting.SETTING1:
        return epsilon_setting1(instance.delta_y_bound)
    return epsilon_setting2(instance.delta_A_bound, instance.k, instance.r, instance.delta_y_bound)


def run_method(
    instance: ProblemInstance,
    method: Method,
    setting: Optional[BpdnSetting] = None,
) -> RecoveryResult:
    """Run one recovery method on the quantized data of an instance.

    Args:
        instance: Problem carrying QA, Qy and the error bounds.
        method: Recovery method.
        setting: Noise-bound setting; required by the BPDN variants and
            ignored otherwise.

    Raises:
        ValueError: If a BPDN variant is requested without a setting.
    """
    if method.uses_setting and setting is None:
        raise ValueError(f"Method {method.value} needs a BPDN setting")

    if method is Method.QCS_LP:
        return solve_qcs_lp_instance(instance)
    if method is Method.NIHT:
        return niht(instance.QA, instance.Qy, instance.k)

    epsilon = noise_bound(instance, method, setting)
    if method is Method.BPDN_2:
        return solve_bpdn_2(instance.QA, instance.Qy, epsilon)
    return solve_bpdn_inf(instance.QA, instance.Qy, epsilon, nonneg=method is Method.BPDN_INF_NN)


def score(result: RecoveryResult, instance: ProblemInstance, zero_tol: float) -> MetricsRecord:
    """Metrics of a recovery; NaN placeholders when no estimate exists."""
    if not np.all(np.isfinite(result.x_hat)):
        return MetricsRecord.missing(zero_tol)
    return compute_metrics(result.x_hat, instance.x_true, instance.k, zero_tol)


def run_trial(cfg: SweepConfig, levels: int, trial_index: int) -> list[SweepRow]:
    """Generate one instance and run every configured (method, setting) on it.

    Failures never escape: a method that raises yields a row with status
    error and NaN metrics, and an instance that cannot be generated yields
    such a row for every combination.
    """
    seed = trial_seed(cfg.base_seed, levels, trial_index)
    zero_tol = cfg.effective_zero_tol(settings.ZERO_TOL_FACTOR)
    combos = cfg.method_settings()

    def error_row(method: Method, setting: Optional[BpdnSetting], wall_time: float = 0.0) -> SweepRow:
        return SweepRow(
            levels=levels,
            trial=trial_index,
            method=method,
            setting=setting,
            seed=seed,
            status=SolverStatus.ERROR,
            iterations=0,
            metrics=MetricsRecord.missing(zero_tol),
            wall_time=wall_time,
        )

    try:
        quantizer = make_uniform_quantizer(levels, -cfg.r, cfg.r)
        instance = generate_instance(cfg.n, cfg.m, cfg.k, cfg.r, quantizer, seed)
    except Exception as e:
        logger.error(f"Instance levels={levels} trial={trial_index} failed: {e}", exc_info=True)
        return [error_row(method, setting) for method, setting in combos]

    rows = []
    for method, setting in combos:
        started = time.perf_counter()
        try:
            result = run_method(instance, method, setting)
            metrics = score(result, instance, zero_tol)
        except Exception as e:
            logger.error(
                f"{method.value} on levels={levels} trial={trial_index} failed: {e}", exc_info=True
            )
            rows.append(error_row(method, setting, time.perf_counter() - started))
            continue

        rows.append(
            SweepRow(
                levels=levels,
                trial=trial_index,
                method=method,
                setting=setting,
                seed=seed,
                status=result.solver_status,
                iterations=result.iterations,
                metrics=metrics,
                wall_time=result.wall_time,
            )
        )
    return rows


async def run_sweep(
    cfg: SweepConfig,
    *,
    workers: Optional[int] = None,
    executor: Optional[Literal["process", "thread"]] = None,
) -> list[SweepRow]:
    """Run all levels x trials and return the rows in canonical order.

    Args:
        cfg: Sweep configuration.
        workers: Pool size; 1 runs the trials in order on the caller.
            Defaults to settings.SWEEP_WORKERS.
        executor: Pool kind. Defaults to settings.SWEEP_EXECUTOR.
    """
    workers = workers or settings.SWEEP_WORKERS
    executor = executor or settings.SWEEP_EXECUTOR
    jobs = [(levels, trial) for levels in cfg.levels_list for trial in range(cfg.trials)]
    logger.info(
        f"Sweep: {len(jobs)} trials x {len(cfg.method_settings())} method settings, "
        f"workers={workers}"
    )

    if workers <= 1:
        batches = [run_trial(cfg, levels, trial) for levels, trial in jobs]
    else:
        pool_cls = ProcessPoolExecutor if executor == "process" else ThreadPoolExecutor
        loop = asyncio.get_running_loop()
        with pool_cls(max_workers=workers) as pool:
            batches = await asyncio.gather(
                *(loop.run_in_executor(pool, run_trial, cfg, levels, trial) for levels, trial in jobs)
            )

    rows = sorted((row for batch in batches for row in batch), key=lambda row: row.sort_key)
    failures = sum(1 for row in rows if not row.status.is_success)
    if failures:
        logger.warning(f"Sweep finished with {failures} of {len(rows)} rows not solved")
    return rows


def _mean(values: list[float]) -> float:
    finite = [value for value in values if math.isfinite(value)]
    return float(np.mean(finite)) if finite else float("nan")


def aggregate(rows: list[SweepRow]) -> list[AggregateRow]:
    """Per (levels, method, setting) means over the trials with finite metrics.

    Failures counts rows whose status is neither optimal nor converged.
    """
    cells: dict[tuple, list[SweepRow]] = defaultdict(list)
    for row in rows:
        cells[(row.levels, row.method, row.setting)].append(row)

    result = []
    for (levels, method, setting), members in cells.items():
        result.append(
            AggregateRow(
                levels=levels,
                method=method,
                setting=setting,
                trials=len(members),
                failures=sum(1 for row in members if not row.status.is_success),
                mean_rel_l2_sq=_mean([row.metrics.rel_l2_sq for row in members]),
                mean_rel_l1=_mean([row.metrics.rel_l1 for row in members]),
                mean_sparsity=_mean([row.metrics.sparsity for row in members]),
                mean_fpr=_mean([row.metrics.fpr for row in members]),
                mean_fnr=_mean([row.metrics.fnr for row in members]),
                mean_iterations=_mean([float(row.iterations) for row in members]),
            )
        )
    return sorted(
        result,
        key=lambda row: (row.levels, row.method.value, row.setting.value if row.setting else ""),
    )


def load_sweep_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> SweepConfig:
    """Build a SweepConfig from a KEY=VALUE file, then apply overrides.

    Keys are case-insensitive field names of SweepConfig; list fields take
    comma-separated values. Overrides set to None are ignored.

    Raises:
        FileNotFoundError: If path does not exist.
        ValueError: On unknown keys or invalid values (pydantic.ValidationError
            for the latter).
    """
    values: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"Sweep config not found: {path}")
        values = {
            key.strip().lower(): value
            for key, value in dotenv_values(path).items()
            if value is not None and value.strip() != ""
        }
        unknown = set(values) - set(SweepConfig.model_fields)
        if unknown:
            raise ValueError(f"Unknown sweep config keys: {', '.join(sorted(unknown))}")

    if overrides:
        values.update({key: value for key, value in overrides.items() if value is not None})
    return SweepConfig.model_validate(values)
