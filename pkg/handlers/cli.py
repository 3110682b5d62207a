"""Command-line entry point: gen, solve, analyze and sweep.

stdout carries exactly one JSON document per successful command; all
diagnostics go to stderr through logging. Exit codes are 0 on success,
1 on a usage or input error and 2 when a solver fails.
"""
import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import BaseModel

from core.config import settings
from core.constants import (
    AGGREGATE_CSV_NAME,
    EXIT_OK,
    EXIT_SOLVER_FAILURE,
    EXIT_USAGE,
    LOGGER_NAMESPACES,
    RAW_CSV_NAME,
    TIMINGS_CSV_NAME,
)
from core.exceptions import InstanceFormatError, LpNumericalError
from core.logger import setup_logger
from domain.models import BpdnSetting, GenReport, Method, SettingChoice, SolveReport, SweepSummary
from services.analysis_service import coherence_report
from services.harness_service import aggregate, load_sweep_config, run_method, run_sweep, score
from services.problem_service import generate_instance
from services.quantizer_service import make_uniform_quantizer
from storage.repositories.instance_repository import InstanceRepository
from storage.repositories.sweep_repository import SweepRepository

logger = logging.getLogger(__name__)

SETTING_ALIASES = {
    "1": BpdnSetting.SETTING1,
    "2": BpdnSetting.SETTING2,
    "setting1": BpdnSetting.SETTING1,
    "setting2": BpdnSetting.SETTING2,
}


class UsageError(Exception):
    """Bad flags or an unusable input file; maps to exit code 1."""


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(payload: BaseModel) -> None:
    sys.stdout.write(payload.model_dump_json() + "\n")
    sys.stdout.flush()


# --- gen ---
async def cmd_gen(args: argparse.Namespace) -> int:
    """Generate a seeded instance and write it as JSON."""
    quantizer = make_uniform_quantizer(args.levels, -args.r, args.r) if args.levels is not None else None
    y_quantizer = make_uniform_quantizer(args.levels_y, -args.r, args.r) if args.levels_y is not None else None
    instance = generate_instance(
        args.n,
        args.m,
        args.k,
        args.r,
        quantizer,
        args.seed,
        measurement_quantizer=y_quantizer,
        column_norm=args.column_norm,
    )
    target = await InstanceRepository().save(instance, args.out)
    _emit(
        GenReport(
            path=str(target),
            seed=instance.seed,
            levels=instance.levels,
            delta_A_bound=instance.delta_A_bound,
            delta_y_bound=instance.delta_y_bound,
            saturation_count=instance.saturation_count,
        )
    )
    return EXIT_OK


# --- solve ---
async def cmd_solve(args: argparse.Namespace) -> int:
    """Run one recovery method on a stored instance and print its metrics."""
    method = Method(args.method)
    setting = SETTING_ALIASES[args.setting] if args.setting else None
    if method.uses_setting and setting is None:
        raise UsageError(f"solve: --setting is required for method {method.value}")
    if not method.uses_setting:
        setting = None

    instance = await InstanceRepository().load(args.input)
    zero_tol = args.zero_tol if args.zero_tol is not None else settings.default_zero_tol(instance.r)
    result = run_method(instance, method, setting)
    _emit(
        SolveReport(
            method=method,
            setting=setting,
            status=result.solver_status,
            iterations=result.iterations,
            metrics=score(result, instance, zero_tol),
        )
    )
    logger.info(f"{method.value} finished in {result.wall_time:.3f}s")
    if not result.solver_status.is_success:
        logger.error(f"{method.value} ended with status {result.solver_status.value}")
        return EXIT_SOLVER_FAILURE
    return EXIT_OK


# --- analyze ---
async def cmd_analyze(args: argparse.Namespace) -> int:
    """Print the coherence report of a stored instance."""
    instance = await InstanceRepository().load(args.input)
    report = coherence_report(
        instance.QA,
        instance.delta_A_bound,
        instance.delta_y_bound,
        instance.k,
        rho=args.rho,
    )
    if report.T is None:
        logger.info("Robustness hypotheses do not hold; no finite radius")
    _emit(report)
    return EXIT_OK


# --- sweep ---
async def cmd_sweep(args: argparse.Namespace) -> int:
    """Run a sweep and write raw, aggregate and timing CSVs."""
    overrides = {
        "n": args.n,
        "m": args.m,
        "k": args.k,
        "r": args.r,
        "levels_list": args.levels_list,
        "trials": args.trials,
        "base_seed": args.base_seed,
        "methods": args.methods,
        "bpdn_setting": args.setting,
        "zero_tol": args.zero_tol,
    }
    cfg = load_sweep_config(args.config, overrides)
    rows = await run_sweep(cfg, workers=args.workers, executor=args.executor)

    out_dir = Path(args.out_dir or settings.OUTPUT_DIR)
    repo = SweepRepository(out_dir)
    raw = await repo.write_raw(rows, RAW_CSV_NAME)
    agg = await repo.write_aggregate(aggregate(rows), AGGREGATE_CSV_NAME)
    timings = await repo.write_timings(rows, TIMINGS_CSV_NAME)
    _emit(
        SweepSummary(
            raw=str(raw),
            aggregate=str(agg),
            timings=str(timings),
            rows=len(rows),
            failures=sum(1 for row in rows if not row.status.is_success),
        )
    )
    return EXIT_OK


def build_parser() -> CliParser:
    parser = CliParser(prog="qlp", description="Quantized sparse recovery toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="generate a seeded instance")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--r", type=float, required=True)
    gen.add_argument("--levels", type=int, help="quantizer levels; omit for unquantized data")
    gen.add_argument("--levels-y", type=int, help="separate quantizer levels for y")
    gen.add_argument("--column-norm", type=float, help="rescale every column of A to this norm")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", type=Path, required=True)
    gen.set_defaults(handler=cmd_gen)

    solve = commands.add_parser("solve", help="run one recovery method")
    solve.add_argument("--in", dest="input", type=Path, required=True)
    solve.add_argument("--method", choices=[method.value for method in Method], required=True)
    solve.add_argument("--setting", choices=sorted(SETTING_ALIASES))
    solve.add_argument("--zero-tol", type=float)
    solve.set_defaults(handler=cmd_solve)

    analyze = commands.add_parser("analyze", help="coherence report and robustness radius")
    analyze.add_argument("--in", dest="input", type=Path, required=True)
    analyze.add_argument("--rho", type=float, help="column-norm bound; defaults to the tight value")
    analyze.set_defaults(handler=cmd_analyze)

    sweep = commands.add_parser("sweep", help="run the quantization-level sweep")
    sweep.add_argument("--config", type=Path, help="KEY=VALUE sweep config file")
    sweep.add_argument("--out-dir", type=Path)
    sweep.add_argument("--workers", type=int)
    sweep.add_argument("--executor", choices=["process", "thread"])
    sweep.add_argument("--n", type=int)
    sweep.add_argument("--m", type=int)
    sweep.add_argument("--k", type=int)
    sweep.add_argument("--r", type=float)
    sweep.add_argument("--levels-list", help="comma-separated, e.g. 100,1000,5000")
    sweep.add_argument("--trials", type=int)
    sweep.add_argument("--base-seed", type=int)
    sweep.add_argument("--methods", help="comma-separated method names")
    sweep.add_argument("--setting", choices=[choice.value for choice in SettingChoice])
    sweep.add_argument("--zero-tol", type=float)
    sweep.set_defaults(handler=cmd_sweep)
    return parser


async def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return await args.handler(args)
    except UsageError as e:
        logger.error(str(e))
        return EXIT_USAGE
    except InstanceFormatError as e:
        logger.error(f"Malformed instance file, field {e}")
        return EXIT_USAGE
    except (FileNotFoundError, ValueError) as e:
        # pydantic ValidationError is a ValueError
        logger.error(str(e))
        return EXIT_USAGE
    except LpNumericalError as e:
        logger.error(f"Solver failure: {e}")
        return EXIT_SOLVER_FAILURE


def run() -> None:
    for namespace in LOGGER_NAMESPACES:
        setup_logger(namespace)
    sys.exit(asyncio.run(main()))
