"""
Приёмочные проверки отчёта по типу исследования (флаг --check)
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List

from core.models import ConvergenceReport, StudyConfig, SummaryRow

logger = logging.getLogger(__name__)

RATE_TOLERANCE = 0.6
MESH_R_SQUARED = 0.95
TRUNCATION_R_SQUARED = 0.9
TRUNCATION_DROP = 10.0
COMMUTATOR_RATE = (1.0, 0.3)
EXACT_FINAL_ERROR = 1e-2
BETA_AGREEMENT = 5e-3


@dataclass
class CheckResult:
    """Итог одной проверки"""
    name: str
    passed: bool
    detail: str = ""


def _rows(report: ConvergenceReport, model: str = None) -> List[SummaryRow]:
    return [row for row in report.summary if model is None or row.model == model]


def _tracked_present(report: ConvergenceReport) -> List[CheckResult]:
    if not report.summary:
        return [CheckResult("tracked", False, "в сводке нет отслеживаемых значений")]
    return [CheckResult(f"n={row.n} {row.tracked}: найдено", row.missed == 0,
                        f"пропущено в {row.missed} точках") for row in report.summary]


def _algebraic(cfg: StudyConfig, report: ConvergenceReport) -> List[CheckResult]:
    results = _tracked_present(report)
    expected = 2 * cfg.degree
    for row in _rows(report, "algebraic"):
        ok = (row.slope is not None and abs(row.slope - expected) <= RATE_TOLERANCE
              and row.r_squared >= MESH_R_SQUARED)
        results.append(CheckResult(f"n={row.n} {row.tracked}: скорость", ok,
                                   f"наклон {row.slope}, r²={row.r_squared}, ожидается {expected}"))
    return results


def _truncation(cfg: StudyConfig, report: ConvergenceReport) -> List[CheckResult]:
    results = _tracked_present(report)
    for row in _rows(report, "exponential"):
        ok = (row.log_slope is not None and row.log_slope < 0
              and row.r_squared >= TRUNCATION_R_SQUARED)
        results.append(CheckResult(f"n={row.n} {row.tracked}: экспоненциальное убывание", ok,
                                   f"наклон {row.log_slope}, r²={row.r_squared}"))
    for key, points in report.series.items():
        if len(points) >= 2:
            drop = points[0][1] / points[-1][1]
            results.append(CheckResult(f"{key}: падение ошибки", drop >= TRUNCATION_DROP,
                                       f"отношение {drop:.3g}"))
    return results


def _diagonal(cfg: StudyConfig, report: ConvergenceReport) -> List[CheckResult]:
    results = _tracked_present(report)
    for row in report.summary:
        results.append(CheckResult(f"n={row.n} {row.tracked}: монотонность",
                                   row.status in ("decreasing", "ok"), row.status))
    return results


def _exact(cfg: StudyConfig, report: ConvergenceReport) -> List[CheckResult]:
    results = []
    for row in report.summary:
        if row.model == "agreement":
            ok = row.value is not None and row.value <= BETA_AGREEMENT
            results.append(CheckResult(f"n={row.n} {row.tracked}", ok, f"расхождение {row.value}"))
        else:
            ok = row.missed == 0 and row.value is not None and row.value <= EXACT_FINAL_ERROR
            results.append(CheckResult(f"n={row.n} {row.tracked}: ошибка на мелкой сетке", ok,
                                       f"ошибка {row.value}, пропусков {row.missed}"))
    return results or [CheckResult("tracked", False, "в сводке нет отслеживаемых значений")]


def _commutator(cfg: StudyConfig, report: ConvergenceReport) -> List[CheckResult]:
    target, tolerance = COMMUTATOR_RATE
    results = []
    for row in report.summary:
        if row.status == "constant":
            results.append(CheckResult(f"n={row.n}: постоянный символ", row.value == 0.0))
            continue
        ok = (row.status == "decreasing" and row.slope is not None
              and abs(row.slope - target) <= tolerance)
        results.append(CheckResult(f"n={row.n}: скорость коммутатора", ok,
                                   f"наклон {row.slope}, {row.status}"))
    return results


def _coercivity(cfg: StudyConfig, report: ConvergenceReport) -> List[CheckResult]:
    return [CheckResult(f"n={row.n} {row.tracked}", row.status in ("pass", "domain-error"),
                        f"{row.status}, запас {row.value}") for row in report.summary]


CHECKS: Dict[str, Callable[[StudyConfig, ConvergenceReport], List[CheckResult]]] = {
    "verify-annulus": _algebraic,
    "mesh": _algebraic,
    "truncation": _truncation,
    "diagonal": _diagonal,
    "exact": _exact,
    "commutator": _commutator,
    "coercivity": _coercivity,
}


def check_report(cfg: StudyConfig, report: ConvergenceReport) -> List[CheckResult]:
    """Все проверки для типа исследования; нарушенные пишутся в лог"""
    results = CHECKS[cfg.study](cfg, report)
    for result in results:
        if not result.passed:
            logger.warning(f"Проверка не пройдена: {result.name} ({result.detail})")
    return results
