"""
Базовый класс исследований и общие шаги сходимостных проходов
"""
import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Type

import numpy as np

from config import config as ambient
from core.models import ConvergenceReport, ReportRow, StudyConfig, SummaryRow, Window
from services.profiles import make_profile
from services.radialfem import assemble_mode, build_mesh, coefficient_kinks
from services.scaling import d_zero
from services.spectra import fit_rate, in_sector, match_to_oracle, resonances
from services.oracle import hankel_resonances

logger = logging.getLogger(__name__)

# Поля окна, добавляемые вокруг отслеживаемых значений оракула
WINDOW_PAD = 0.5

STUDY_REGISTRY: Dict[str, Type["BaseStudy"]] = {}


def register_study(cls):
    """Декоратор: регистрирует класс исследования по его имени"""
    STUDY_REGISTRY[cls.name] = cls
    return cls


@dataclass
class SweepPoint:
    """Одна точка прохода: мода, параметр и всё, что нужно для вычисления в отдельном процессе"""
    index: int
    n: int
    param_name: str
    param_value: float
    targets: Tuple[complex, ...] = ()
    window: Optional[Window] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def sort_key(self) -> Tuple[int, float, int]:
        return (self.n, self.param_value, self.index)


@dataclass
class PointResult:
    """Результат точки прохода"""
    point: SweepPoint
    omegas: List[complex] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    # Сопоставления: (индекс цели, индекс в omegas, ошибка)
    matched: List[Tuple[int, int, float]] = field(default_factory=list)
    dofs: int = 0
    runtime_ms: float = 0.0
    extra: Dict[str, Any] = field(default_factory=dict)


class BaseStudy(ABC):
    """Базовый класс исследований"""

    name: str = ""
    param_name: str = ""

    def __init__(self, cfg: StudyConfig):
        self.cfg = cfg
        self.profile = make_profile(cfg.profile, verification=cfg.study == "verify-annulus")

    @abstractmethod
    def sweep_points(self) -> List[SweepPoint]:
        """Точки прохода (вычисляется в родительском процессе)"""
        pass

    @abstractmethod
    def evaluate(self, point: SweepPoint) -> PointResult:
        """Вычисление одной точки (может выполняться в рабочем процессе)"""
        pass

    @abstractmethod
    def summarize(self, results: List[PointResult]) -> ConvergenceReport:
        """Сборка отчёта из упорядоченных результатов"""
        pass

    def timed(self, fn, *args) -> Tuple[Any, float]:
        """Результат и время выполнения в мс (0, если замер выключен)"""
        start = time.perf_counter()
        value = fn(*args)
        elapsed = (time.perf_counter() - start) * 1000.0
        return value, elapsed if ambient.RECORD_RUNTIME else 0.0


class ConvergenceStudy(BaseStudy):
    """Проходы с отслеживанием резонансов: спектр → сопоставление → подгонка скорости"""

    model: str = "algebraic"

    def __init__(self, cfg: StudyConfig):
        super().__init__(cfg)
        self.d0 = d_zero(self.profile) if self.profile.is_scaled else None

    def oracle(self, n: int) -> List[complex]:
        """Значения оракула моды n"""
        return hankel_resonances(n, self.cfg.r_b)

    def tracked(self, n: int) -> Tuple[Tuple[complex, ...], Optional[Window]]:
        """Отслеживаемые значения оракула в секторе и окне; окно по умолчанию строится вокруг них"""
        cfg = self.cfg
        values = [z for z in self.oracle(n)
                  if in_sector(z, self.d0, cfg.sector, cfg.margin)
                  and (cfg.window is None or cfg.window.contains(z))]
        window = cfg.window
        if window is None and values:
            re = [z.real for z in values]
            im = [z.imag for z in values]
            window = Window(min(re) - WINDOW_PAD, max(re) + WINDOW_PAD,
                            min(im) - WINDOW_PAD, max(im) + WINDOW_PAD)
        if not values:
            logger.warning(f"Мода n={n}: нет значений оракула в секторе '{cfg.sector}'")
        return tuple(values), window

    def mesh_for(self, r_end: float, elements: int, degree: Optional[int] = None, **kwargs):
        """Равномерная сетка, выровненная по изломам коэффициентов"""
        p = self.cfg.degree if degree is None else degree
        draft = build_mesh(self.cfg.r_b, r_end, elements, p, **kwargs)
        kinks = coefficient_kinks(draft, self.profile)
        if not kinks:
            return draft
        return build_mesh(self.cfg.r_b, r_end, elements, p, align_points=kinks, **kwargs)

    @abstractmethod
    def mesh_at(self, point: SweepPoint):
        """Сетка точки прохода"""
        pass

    def solve(self, point: SweepPoint, mesh) -> PointResult:
        cfg = self.cfg
        matrices = assemble_mode(mesh, self.profile, point.n)
        spectrum = resonances(matrices, self.profile, cfg.sector, point.window, cfg.margin, cfg.tolerance)
        result = PointResult(point=point, dofs=mesh.n_dofs)
        result.omegas = spectrum.omegas
        result.residuals = [entry.residual for entry in spectrum.entries]
        if point.targets:
            match = match_to_oracle(spectrum, point.targets, cfg.match_radius)
            for i, m in enumerate(match.matches):
                if m.matched is not None:
                    result.matched.append((i, result.omegas.index(m.matched), m.error))
            result.extra["spurious"] = len(match.spurious)
        logger.info(f"{self.name}: n={point.n}, {point.param_name}={point.param_value:g}, "
                    f"отобрано {len(result.omegas)}, сопоставлено {len(result.matched)}")
        return result

    def evaluate(self, point: SweepPoint) -> PointResult:
        result, elapsed = self.timed(lambda: self.solve(point, self.mesh_at(point)))
        result.runtime_ms = elapsed
        return result

    def rows(self, results: List[PointResult]) -> List[ReportRow]:
        rows = []
        for res in results:
            point = res.point
            by_omega = {j: (i, err) for i, j, err in res.matched}
            for j, omega in enumerate(res.omegas):
                target, error = None, None
                if j in by_omega:
                    i, error = by_omega[j]
                    target = point.targets[i]
                rows.append(ReportRow(
                    study=self.cfg.name, n=point.n, param_name=point.param_name,
                    param_value=point.param_value, omega_re=omega.real, omega_im=omega.imag,
                    oracle_re=None if target is None else target.real,
                    oracle_im=None if target is None else target.imag,
                    error_abs=error, residual=res.residuals[j], dofs=res.dofs,
                    runtime_ms=res.runtime_ms,
                ))
        rows.sort(key=ReportRow.sort_key)
        return rows

    def series(self, results: List[PointResult]) -> Dict[Tuple[int, int], List[Tuple[float, float]]]:
        """Ошибки отслеживаемых значений: (n, индекс цели) → [(параметр, ошибка)]"""
        out: Dict[Tuple[int, int], List[Tuple[float, float]]] = {}
        for res in results:
            for i, _, error in res.matched:
                out.setdefault((res.point.n, i), []).append((res.point.param_value, error))
        for values in out.values():
            values.sort()
        return out

    def status_for(self, points: List[Tuple[float, float]]) -> str:
        return "ok"

    def summarize(self, results: List[PointResult]) -> ConvergenceReport:
        cfg = self.cfg
        report = ConvergenceReport(study=cfg.name, rows=self.rows(results))
        series = self.series(results)
        by_mode: Dict[int, List[PointResult]] = {}
        for res in results:
            by_mode.setdefault(res.point.n, []).append(res)
        for n in sorted(by_mode):
            mode_results = sorted(by_mode[n], key=lambda r: r.point.sort_key())
            targets = mode_results[0].point.targets
            final = mode_results[-1]
            for i, target in enumerate(targets):
                points = series.get((n, i), [])
                row = SummaryRow(
                    study=cfg.name, n=n, multiplicity=2 * n + 1, tracked=f"{target:.6g}",
                    oracle_re=target.real, oracle_im=target.imag, model=self.model,
                    points=len(points), missed=len(mode_results) - len(points),
                    spurious=int(final.extra.get("spurious", 0)),
                )
                if len(points) >= 3 and all(e > 0 for _, e in points):
                    fit = fit_rate(points, self.model)
                    row.slope, row.log_slope, row.r_squared = fit.slope, fit.log_slope, fit.r_squared
                if points:
                    row.value = points[-1][1] if self.model == "exponential" else points[0][1]
                row.status = self.status_for(points) if points else "missed"
                report.summary.append(row)
                report.series[f"{cfg.name}_n{n}_{i}"] = points
        return report


def elements_for(length: float, h: float) -> int:
    """Число элементов, при котором шаг не превосходит h"""
    return max(1, int(np.ceil(length / h - 1e-9)))
