"""
Оркестрация исследования: точки прохода в пуле процессов, сборка отчёта в родительском процессе
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

from config import config
from core.errors import ResonaLensError, SweepPointError, ValidationError
from core.models import ConvergenceReport, StudyConfig

from .base import STUDY_REGISTRY, BaseStudy, PointResult, SweepPoint

logger = logging.getLogger(__name__)


def create_study(cfg: StudyConfig) -> BaseStudy:
    """Экземпляр класса исследования по типу из конфигурации"""
    try:
        cls = STUDY_REGISTRY[cfg.study]
    except KeyError:
        raise ValidationError(f"Неизвестный тип исследования '{cfg.study}'", field="study.type") from None
    return cls(cfg)


def evaluate_point(cfg: StudyConfig, point: SweepPoint) -> PointResult:
    """Точка прохода в рабочем процессе; функция верхнего уровня ради сериализации"""
    return create_study(cfg).evaluate(point)


def _wrap(cfg: StudyConfig, point: SweepPoint, error: Exception) -> SweepPointError:
    logger.error(f"Исследование '{cfg.name}': сбой в точке n={point.n}, "
                 f"{point.param_name}={point.param_value:g}: {error}")
    return SweepPointError(cfg.name, point.n, point.param_name, point.param_value, error)


def run_study(cfg: StudyConfig, jobs: Optional[int] = None) -> ConvergenceReport:
    """Все точки прохода и итоговый отчёт; порядок строк не зависит от числа процессов"""
    jobs = config.JOBS if jobs is None else jobs
    if jobs < 1:
        raise ValidationError(f"Число процессов должно быть ≥ 1, получено {jobs}", field="jobs")
    study = create_study(cfg)
    points = study.sweep_points()
    logger.info(f"Исследование '{cfg.name}' ({cfg.study}): {len(points)} точек, процессов {jobs}")

    results: List[PointResult] = []
    if jobs == 1 or len(points) <= 1:
        for point in points:
            try:
                results.append(study.evaluate(point))
            except ResonaLensError as e:
                raise _wrap(cfg, point, e) from e
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [(point, pool.submit(evaluate_point, cfg, point)) for point in points]
            for point, future in futures:
                try:
                    results.append(future.result())
                except ResonaLensError as e:
                    for _, pending in futures:
                        pending.cancel()
                    raise _wrap(cfg, point, e) from e

    results.sort(key=lambda res: res.point.sort_key())
    report = study.summarize(results)
    logger.info(f"Исследование '{cfg.name}' завершено: {len(report.rows)} строк, "
                f"{len(report.summary)} строк сводки")
    return report
