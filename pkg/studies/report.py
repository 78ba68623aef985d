"""
Запись отчёта: rows.csv, summary.csv и по одному .dat на отслеживаемое значение.

Формат чисел фиксирован (17 значащих цифр, точка как разделитель), поэтому
повторный запуск с теми же входными данными даёт побайтно одинаковые файлы.
"""
import csv
import logging
import os
from dataclasses import fields
from typing import List, Optional

from core.errors import ReportError
from core.models import ConvergenceReport, ReportRow, SummaryRow

logger = logging.getLogger(__name__)

ROWS_HEADER = [f.name for f in fields(ReportRow)]
SUMMARY_HEADER = [f.name for f in fields(SummaryRow)]


def format_value(value) -> str:
    """Ячейка CSV: пусто для None, целые как есть, вещественные с 17 значащими цифрами"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_csv(path: str, header: List[str], records) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for record in records:
            writer.writerow([format_value(getattr(record, name)) for name in header])


def _write_dat(path: str, title: str, points) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# {title}\n# param error\n")
        for param, error in points:
            handle.write(f"{format_value(float(param))} {format_value(float(error))}\n")


def emit_report(report: ConvergenceReport, directory: str) -> List[str]:
    """Записывает файлы отчёта в directory; возвращает список путей"""
    path: Optional[str] = directory
    try:
        os.makedirs(directory, exist_ok=True)
        written = []
        path = os.path.join(directory, "rows.csv")
        _write_csv(path, ROWS_HEADER, report.rows)
        written.append(path)
        path = os.path.join(directory, "summary.csv")
        _write_csv(path, SUMMARY_HEADER, report.summary)
        written.append(path)
        for key in sorted(report.series):
            path = os.path.join(directory, f"{key}.dat")
            _write_dat(path, key, report.series[key])
            written.append(path)
    except OSError as e:
        raise ReportError(f"Не удалось записать отчёт ({e.strerror or e})", path or directory) from e
    logger.info(f"Отчёт '{report.study}' записан в {directory}: {len(written)} файлов")
    return written


def read_rows(path: str) -> List[dict]:
    """rows.csv или summary.csv как список словарей (для проверок и тестов)"""
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            return list(csv.DictReader(handle))
    except OSError as e:
        raise ReportError(f"Не удалось прочитать отчёт ({e.strerror or e})", path) from e
