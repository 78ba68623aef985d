"""
Исследования дискретного коммутатора и сертификатов T-коэрцитивности
"""
import logging
from typing import Dict, List

import numpy as np

from core.errors import DomainError
from core.models import ConvergenceReport, ReportRow, SummaryRow
from services.radialfem import build_mesh, refine_mesh
from services.scaling import d_zero
from services.spectra import fit_rate
from services.tcert import coercivity_certificate, discrete_commutator_norm, smooth_symbol, t_symbol

from .base import BaseStudy, PointResult, SweepPoint, register_study

logger = logging.getLogger(__name__)

# Автоматическая сетка ω = ρ·e^{iθ}/d0: по три значения θ на каждую ветвь
AUTO_RADII = (0.5, 2.0)
AUTO_ANGLES = (np.pi / 6, np.pi / 3, 2 * np.pi / 3, -np.pi / 6, -np.pi / 3, -2 * np.pi / 3)


def _inside(points, r_b: float, r_end: float) -> List[float]:
    return sorted({float(p) for p in points if r_b < p < r_end})


@register_study
class CommutatorStudy(BaseStudy):
    """Норма (I − Π_h)(η_ε ·) на последовательности вложенных сеток"""

    name = "commutator"
    param_name = "h"

    def smoothed_symbol(self):
        cfg = self.cfg
        sym = t_symbol(self.profile, cfg.symbol_omega)
        return smooth_symbol(sym, cfg.epsilon, cfg.r_hat1, cfg.r_hat2, r_end=cfg.R)

    def base_mesh(self, smoothed):
        """Сетка, выровненная по изломам профиля и точкам смешивания η_ε"""
        cfg = self.cfg
        align = _inside(list(self.profile.kinks) + list(smoothed.breakpoints), cfg.r_b, cfg.R)
        return build_mesh(cfg.r_b, cfg.R, cfg.elements[0], cfg.degree, align_points=align)

    def sweep_points(self) -> List[SweepPoint]:
        smoothed = self.smoothed_symbol()
        logger.info(f"η_ε: ε={smoothed.epsilon}, точки смешивания {smoothed.breakpoints}, "
                    f"sup-разрыв {smoothed.sup_gap:.3e}")
        points = []
        for n in self.cfg.modes:
            mesh = self.base_mesh(smoothed)
            for level in range(len(self.cfg.elements)):
                points.append(SweepPoint(
                    index=len(points), n=n, param_name=self.param_name, param_value=mesh.h,
                    extra={"level": level, "symbol": smoothed},
                ))
                mesh = refine_mesh(mesh)
        return points

    def evaluate(self, point: SweepPoint) -> PointResult:
        smoothed = point.extra["symbol"]
        mesh = self.base_mesh(smoothed)
        for _ in range(point.extra["level"]):
            mesh = refine_mesh(mesh)
        norm, elapsed = self.timed(discrete_commutator_norm, mesh, self.profile, smoothed, point.n)
        logger.info(f"commutator: n={point.n}, h={mesh.h:.4g}, норма {norm:.6e}")
        return PointResult(point=point, omegas=[self.cfg.symbol_omega], residuals=[None],
                           dofs=mesh.n_dofs, runtime_ms=elapsed, extra={"norm": norm})

    def summarize(self, results: List[PointResult]) -> ConvergenceReport:
        cfg = self.cfg
        report = ConvergenceReport(study=cfg.name)
        by_mode: Dict[int, List] = {}
        for res in results:
            point = res.point
            norm = res.extra["norm"]
            report.rows.append(ReportRow(
                study=cfg.name, n=point.n, param_name=point.param_name, param_value=point.param_value,
                omega_re=cfg.symbol_omega.real, omega_im=cfg.symbol_omega.imag,
                oracle_re=None, oracle_im=None, error_abs=norm, residual=None,
                dofs=res.dofs, runtime_ms=res.runtime_ms,
            ))
            by_mode.setdefault(point.n, []).append((point.param_value, norm))
        report.rows.sort(key=ReportRow.sort_key)
        for n in sorted(by_mode):
            points = sorted(by_mode[n])
            row = SummaryRow(study=cfg.name, n=n, multiplicity=2 * n + 1, tracked="commutator",
                             model="algebraic", points=len(points), value=points[0][1])
            norms = [value for _, value in points]
            if all(value == 0.0 for value in norms):
                row.status = "constant"
            else:
                if len(points) >= 3 and all(value > 0 for value in norms):
                    fit = fit_rate(points, "algebraic")
                    row.slope, row.log_slope, row.r_squared = fit.slope, fit.log_slope, fit.r_squared
                # Параметр h отсортирован по возрастанию: норма должна расти вместе с h
                decreasing = all(b > a for a, b in zip(norms, norms[1:]))
                row.status = "decreasing" if decreasing else "non-monotone"
            report.summary.append(row)
            report.series[f"{cfg.name}_n{n}_0"] = points
        return report


@register_study
class CoercivityStudy(BaseStudy):
    """Сертификаты на сетке ω по обеим ветвям; повтор на равномерно измельчённой сетке"""

    name = "coercivity"
    param_name = "omega"

    def omegas(self) -> List[complex]:
        if self.cfg.omegas:
            return list(self.cfg.omegas)
        d0 = d_zero(self.profile)
        return [complex(rho * np.exp(1j * theta) / d0) for rho in AUTO_RADII for theta in AUTO_ANGLES]

    def mesh(self):
        cfg = self.cfg
        align = _inside(self.profile.kinks, cfg.r_b, cfg.R)
        return build_mesh(cfg.r_b, cfg.R, cfg.elements[0], cfg.degree, align_points=align)

    def sweep_points(self) -> List[SweepPoint]:
        points = []
        omegas = self.omegas()
        for n in self.cfg.modes:
            for k, omega in enumerate(omegas):
                points.append(SweepPoint(index=len(points), n=n, param_name=self.param_name,
                                         param_value=float(k), extra={"omega": omega}))
        return points

    def _certify(self, point: SweepPoint) -> PointResult:
        omega = point.extra["omega"]
        mesh = self.mesh()
        result = PointResult(point=point, omegas=[omega], residuals=[None], dofs=mesh.n_dofs)
        try:
            certificate = coercivity_certificate(mesh, self.profile, point.n, omega)
        except DomainError as e:
            logger.warning(f"coercivity: n={point.n}, ω={omega}: {e}")
            result.extra["status"] = "domain-error"
            return result
        margins = [certificate.min_eig - certificate.bound]
        passed = certificate.passed
        if self.cfg.refine:
            refined = coercivity_certificate(refine_mesh(mesh), self.profile, point.n, omega)
            margins.append(refined.min_eig - refined.bound)
            passed = passed and refined.passed
        result.extra.update(status="pass" if passed else "fail", margin=min(margins),
                            branch=certificate.branch, checks=len(margins))
        logger.info(f"coercivity: n={point.n}, ω={omega:.4g}, ветвь {certificate.branch}, "
                    f"запас {min(margins):.3e}")
        return result

    def evaluate(self, point: SweepPoint) -> PointResult:
        result, elapsed = self.timed(self._certify, point)
        result.runtime_ms = elapsed
        return result

    def summarize(self, results: List[PointResult]) -> ConvergenceReport:
        cfg = self.cfg
        report = ConvergenceReport(study=cfg.name)
        for res in sorted(results, key=lambda r: r.point.sort_key()):
            point = res.point
            omega = res.omegas[0]
            report.rows.append(ReportRow(
                study=cfg.name, n=point.n, param_name=point.param_name, param_value=point.param_value,
                omega_re=omega.real, omega_im=omega.imag, oracle_re=None, oracle_im=None,
                error_abs=None, residual=None, dofs=res.dofs, runtime_ms=res.runtime_ms,
            ))
            report.summary.append(SummaryRow(
                study=cfg.name, n=point.n, multiplicity=2 * point.n + 1,
                tracked=f"{res.extra.get('branch', '-')}:{omega:.6g}",
                oracle_re=omega.real, oracle_im=omega.imag, model="certificate", points=res.extra.get("checks", 0),
                value=res.extra.get("margin"), status=res.extra["status"],
            ))
        report.rows.sort(key=ReportRow.sort_key)
        return report
