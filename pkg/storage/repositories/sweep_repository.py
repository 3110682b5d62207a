import csv
import io
import logging
from pathlib import Path
from typing import Iterable, Optional

from core.constants import (
    AGGREGATE_CSV_HEADER,
    RAW_CSV_HEADER,
    TIMINGS_CSV_HEADER,
    format_float,
)
from domain.models import AggregateRow, BpdnSetting, SweepRow
from storage.repositories.base import BaseRepository, PathLike

logger = logging.getLogger(__name__)


def _setting(setting: Optional[BpdnSetting]) -> str:
    return setting.value if setting is not None else ""


def _render(header: tuple[str, ...], records: Iterable[list]) -> str:
    buffer = io.StringIO()
    # RFC 4180 records end with CRLF
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(records)
    return buffer.getvalue()


class SweepRepository(BaseRepository):
    """CSV outputs of a sweep. Floats use their shortest round-trip repr."""

    async def write_raw(self, rows: list[SweepRow], path: PathLike) -> Path:
        records = (
            [
                row.levels,
                row.trial,
                row.method.value,
                _setting(row.setting),
                row.seed,
                row.status.value,
                row.iterations,
                format_float(row.metrics.rel_l2_sq),
                format_float(row.metrics.rel_l1),
                format_float(row.metrics.sparsity),
                format_float(row.metrics.fpr),
                format_float(row.metrics.fnr),
                format_float(row.metrics.zero_tol),
            ]
            for row in sorted(rows, key=lambda row: row.sort_key)
        )
        target = await self.write_text(path, _render(RAW_CSV_HEADER, records))
        logger.info(f"Wrote {len(rows)} raw rows to {target}")
        return target

    async def write_aggregate(self, rows: list[AggregateRow], path: PathLike) -> Path:
        records = (
            [
                row.levels,
                row.method.value,
                _setting(row.setting),
                row.trials,
                row.failures,
                format_float(row.mean_rel_l2_sq),
                format_float(row.mean_rel_l1),
                format_float(row.mean_sparsity),
                format_float(row.mean_fpr),
                format_float(row.mean_fnr),
                format_float(row.mean_iterations),
            ]
            for row in rows
        )
        return await self.write_text(path, _render(AGGREGATE_CSV_HEADER, records))

    async def write_timings(self, rows: list[SweepRow], path: PathLike) -> Path:
        records = (
            [row.levels, row.trial, row.method.value, _setting(row.setting), format_float(row.wall_time)]
            for row in sorted(rows, key=lambda row: row.sort_key)
        )
        return await self.write_text(path, _render(TIMINGS_CSV_HEADER, records))
