"""
Сходимостные исследования: верификация на кольце, усечение, сетка, диагональ, точный метод
"""
import logging
from dataclasses import replace
from typing import List, Tuple

from core.errors import SolverError
from core.models import ConvergenceReport, ExactMapSpec, SummaryRow
from services.oracle import annulus_dirichlet_eigs
from services.radialfem import assemble_mode
from services.spectra import resonances

from .base import ConvergenceStudy, PointResult, SweepPoint, elements_for, register_study

logger = logging.getLogger(__name__)

# Рост ошибки, допустимый в диагональном проходе после порога
DIAGONAL_GROWTH = 1.10
DIAGONAL_THRESHOLD = 1e-2


@register_study
class VerifyAnnulusStudy(ConvergenceStudy):
    """Без масштабирования: наименьшая частота кольца против mπ/(R − r_b) при n = 0"""

    name = "verify-annulus"
    param_name = "h"

    def oracle(self, n: int) -> List[complex]:
        return [complex(k) for k in annulus_dirichlet_eigs(self.cfg.r_b, self.cfg.R, n, 1)]

    def mesh_at(self, point: SweepPoint):
        return self.mesh_for(self.cfg.R, point.extra["elements"])

    def sweep_points(self) -> List[SweepPoint]:
        points = []
        for n in self.cfg.modes:
            targets, window = self.tracked(n)
            for elements in self.cfg.elements:
                mesh = self.mesh_for(self.cfg.R, elements)
                points.append(SweepPoint(
                    index=len(points), n=n, param_name=self.param_name, param_value=mesh.h,
                    targets=targets, window=window, extra={"elements": elements},
                ))
        return points


@register_study
class TruncationStudy(ConvergenceStudy):
    """Фиксированный шаг h, растущий радиус усечения R: экспоненциальное убывание ошибки"""

    name = "truncation"
    param_name = "R"
    model = "exponential"

    def mesh_at(self, point: SweepPoint):
        return self.mesh_for(point.param_value, point.extra["elements"])

    def sweep_points(self) -> List[SweepPoint]:
        h = self.cfg.h_list[0]
        points = []
        for n in self.cfg.modes:
            targets, window = self.tracked(n)
            for R in self.cfg.R_list:
                points.append(SweepPoint(
                    index=len(points), n=n, param_name=self.param_name, param_value=R,
                    targets=targets, window=window,
                    extra={"elements": elements_for(R - self.cfg.r_b, h)},
                ))
        return points


@register_study
class MeshStudy(ConvergenceStudy):
    """Фиксированный R, измельчение сетки: алгебраическая скорость 2p"""

    name = "mesh"
    param_name = "h"

    def mesh_at(self, point: SweepPoint):
        return self.mesh_for(self.cfg.R, point.extra["elements"])

    def fine_reference(self, n: int, targets: Tuple[complex, ...], window) -> Tuple[complex, ...]:
        """Собственные значения того же R на сетке в factor раз мельче со степенью p + 1"""
        cfg = self.cfg
        elements = max(cfg.elements) * cfg.reference_factor
        mesh = self.mesh_for(cfg.R, elements, degree=cfg.degree + 1)
        spectrum = resonances(assemble_mode(mesh, self.profile, n), self.profile,
                              cfg.sector, window, cfg.margin, cfg.tolerance)
        if not spectrum.omegas:
            raise SolverError(f"Эталонная задача моды n={n} не содержит значений в окне")
        reference = []
        for target in targets:
            nearest = min(spectrum.omegas, key=lambda omega: abs(omega - target))
            logger.info(f"Эталон n={n}: {nearest:.12g} (оракул {target:.12g}, "
                        f"сдвиг усечения {abs(nearest - target):.3e})")
            reference.append(nearest)
        return tuple(reference)

    def sweep_points(self) -> List[SweepPoint]:
        points = []
        for n in self.cfg.modes:
            targets, window = self.tracked(n)
            if self.cfg.reference == "fine" and targets:
                targets = self.fine_reference(n, targets, window)
            for elements in self.cfg.elements:
                mesh = self.mesh_for(self.cfg.R, elements)
                points.append(SweepPoint(
                    index=len(points), n=n, param_name=self.param_name, param_value=mesh.h,
                    targets=targets, window=window, extra={"elements": elements},
                ))
        return points


@register_study
class DiagonalStudy(ConvergenceStudy):
    """Одновременное увеличение R и измельчение h парами (R_k, h_k)"""

    name = "diagonal"
    param_name = "R"
    model = "exponential"

    def mesh_at(self, point: SweepPoint):
        return self.mesh_for(point.param_value, point.extra["elements"])

    def sweep_points(self) -> List[SweepPoint]:
        points = []
        for n in self.cfg.modes:
            targets, window = self.tracked(n)
            for R, h in zip(self.cfg.R_list, self.cfg.h_list):
                points.append(SweepPoint(
                    index=len(points), n=n, param_name=self.param_name, param_value=R,
                    targets=targets, window=window,
                    extra={"elements": elements_for(R - self.cfg.r_b, h), "h": h},
                ))
        return points

    def status_for(self, points: List[Tuple[float, float]]) -> str:
        errors = [e for _, e in points]
        if all(b < a for a, b in zip(errors, errors[1:])):
            return "decreasing"
        for a, b in zip(errors, errors[1:]):
            if a < DIAGONAL_THRESHOLD and b > DIAGONAL_GROWTH * a:
                return "increase"
        return "ok"


@register_study
class ExactStudy(ConvergenceStudy):
    """Безусечённый метод на [r_b, r2*]: измельчение h и сравнение отображений log и β"""

    name = "exact"
    param_name = "h"

    def mesh_at(self, point: SweepPoint):
        spec = point.extra.get("map", self.cfg.exact_map)
        return self.mesh_for(spec.r2_star, point.extra["elements"], variant="exact", exact_map=spec)

    def sweep_points(self) -> List[SweepPoint]:
        cfg = self.cfg
        spec = cfg.exact_map
        points = []
        for n in cfg.modes:
            targets, window = self.tracked(n)
            for elements in cfg.elements:
                mesh = self.mesh_for(spec.r2_star, elements, variant="exact", exact_map=spec)
                points.append(SweepPoint(
                    index=len(points), n=n, param_name=self.param_name, param_value=mesh.h,
                    targets=targets, window=window, extra={"elements": elements},
                ))
            if cfg.compare_beta is not None:
                other = replace(spec, kind="power-beta", beta=cfg.compare_beta)
                if spec.kind == "power-beta":
                    other = ExactMapSpec(kind="log", r2_star=spec.r2_star)
                points.append(SweepPoint(
                    index=len(points), n=n, param_name="beta", param_value=cfg.compare_beta,
                    targets=targets, window=window,
                    extra={"elements": max(cfg.elements), "map": other, "compare": True},
                ))
        return points

    def summarize(self, results: List[PointResult]) -> ConvergenceReport:
        sweep = [r for r in results if not r.point.extra.get("compare")]
        compare = [r for r in results if r.point.extra.get("compare")]
        report = super().summarize(sweep)
        if not compare:
            return report
        report.rows = sorted(report.rows + self.rows(compare), key=lambda row: row.sort_key())
        finest = {}
        for res in sweep:
            key = res.point.n
            if key not in finest or res.point.param_value < finest[key].point.param_value:
                finest[key] = res
        for res in compare:
            n = res.point.n
            base = {i: finest[n].omegas[j] for i, j, _ in finest[n].matched} if n in finest else {}
            other = {i: res.omegas[j] for i, j, _ in res.matched}
            for i, target in enumerate(res.point.targets):
                row = SummaryRow(
                    study=self.cfg.name, n=n, multiplicity=2 * n + 1,
                    tracked=f"beta={res.point.param_value:g}:{target:.6g}",
                    oracle_re=target.real, oracle_im=target.imag, model="agreement", points=1,
                )
                if i in base and i in other:
                    row.value = abs(base[i] - other[i])
                    row.status = "ok"
                else:
                    row.missed = 1
                    row.status = "missed"
                report.summary.append(row)
        return report
