"""Производные величины комплексного масштабирования и вещественные отображения точного метода.

Для профиля α̃: d̃ = 1 + iα̃, r̃ = d̃·r, α = ∂_r(r·α̃), d = 1 + iα (так что ∂_r r̃ = d),
d̂ = d вне r1* и постоянна (= 1 + iα(r1*+)) внутри. Точный метод сжимает бесконечный
слой в кольцо (r1*, r2*) логарифмическим или степенным (β) отображением r_e.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from core.errors import AssumptionViolationError, DomainError, UnsupportedCombinationError, ValidationError
from core.models import ExactMapDiagnostics, ExactMapSpec, ExactPoint, ScalingPoint

logger = logging.getLogger(__name__)

EXACT_MAP_KINDS = ("log", "power-beta")
BETA_RANGE = (-2.0 / 3.0, 0.0)
TAU_MARGIN = 1e-9
DIAGNOSTIC_CAP = 1e6


def _as_array(r):
    arr = np.asarray(r, dtype=float)
    return arr, arr.ndim == 0


def _pick(values, scalar: bool):
    values = np.asarray(values)
    return values.item() if scalar else values


def scaling_fields(profile, r):
    """Массивы (α̃, d̃, α, d, d̂) в точках r."""
    r = np.asarray(r, dtype=float)
    at = np.asarray(profile.alpha_tilde(r), dtype=float)
    al = np.asarray(profile.alpha(r), dtype=float)
    alpha_hat = np.where(r > profile.r1_star, al, profile.alpha_right_limit)
    return at, 1.0 + 1j * at, al, 1.0 + 1j * al, 1.0 + 1j * alpha_hat


def scaling_at(profile, r) -> ScalingPoint:
    """Все величины масштабирования в точке r ≥ 0 (или на массиве точек)."""
    r, scalar = _as_array(r)
    if np.any(r < 0):
        raise DomainError(f"r должно быть ≥ 0, получено {r}")
    at, d_tilde, al, d, d_hat = scaling_fields(profile, r)
    return ScalingPoint(
        r=_pick(r, scalar),
        alpha_tilde=_pick(at, scalar),
        d_tilde=_pick(d_tilde, scalar),
        alpha=_pick(al, scalar),
        d=_pick(d, scalar),
        d_hat=_pick(d_hat, scalar),
        r_tilde=_pick(d_tilde * r, scalar),
    )


def d_zero(profile) -> complex:
    """d0 = lim d̃/|d̃| при r → ∞ (замкнутая форма по семейству)."""
    if not profile.is_scaled:
        raise DomainError("d0 не определено для профиля 'unscaled'")
    if profile.kind == "power" and profile.m >= 2:
        return 1j
    a0 = profile.alpha0
    return complex(1.0, a0) / np.sqrt(1.0 + a0 ** 2)


def d_hat_inside(profile) -> complex:
    """Постоянное значение d̂ на [0, r1*]."""
    return complex(1.0, profile.alpha_right_limit)


def default_tau_grid(r1_star: float) -> np.ndarray:
    return r1_star + r1_star * np.geomspace(1e-8, 1e3, 20001)


def tau_bound(profile, grid: Optional[Sequence[float]] = None) -> float:
    """sup arg(d/d̃) по сетке, уточнённый пределами при r → r1*+ и r → ∞."""
    if not profile.is_scaled:
        raise DomainError("tau_bound требует масштабированный профиль")
    r = default_tau_grid(profile.r1_star) if grid is None else np.asarray(grid, dtype=float)
    r = r[r > profile.r1_star]
    _, d_tilde, _, d, _ = scaling_fields(profile, r)
    sampled = float(np.max(np.angle(d / d_tilde))) if r.size else 0.0
    # предел при r → r1*+: d̃ → 1, d → 1 + iα(r1*+); на бесконечности arg(d/d̃) → 0
    near_limit = float(np.arctan(profile.alpha_right_limit))
    tau = max(sampled, near_limit, 0.0)
    if tau >= np.pi / 2 - TAU_MARGIN:
        raise AssumptionViolationError(f"sup arg(d/d̃) = {tau:.12f} не меньше π/2")
    return tau


@dataclass(frozen=True)
class ExactMap:
    """Отображение r ↦ r_e на (0, r2*), тождественное при r ≤ r1*"""
    spec: ExactMapSpec
    r1_star: float

    @property
    def r2_star(self) -> float:
        return self.spec.r2_star

    def r_e(self, r):
        r = np.asarray(r, dtype=float)
        outer = r > self.r1_star
        gap = np.where(outer, self.r2_star - r, 1.0)
        gap0 = self.r2_star - self.r1_star
        if self.spec.kind == "log":
            mapped = -(np.log(gap) - np.log(gap0)) + self.r1_star
        else:
            beta = self.spec.beta
            mapped = gap ** beta - gap0 ** beta + self.r1_star
        return np.where(outer, mapped, r)

    def gamma_e(self, r):
        r = np.asarray(r, dtype=float)
        outer = r > self.r1_star
        gap = np.where(outer, self.r2_star - r, 1.0)
        if self.spec.kind == "log":
            slope = 1.0 / gap
        else:
            beta = self.spec.beta
            slope = -beta * gap ** (beta - 1.0)
        return np.where(outer, slope, 1.0)

    def inverse(self, r_e):
        """Прообраз радиуса r_e (для выравнивания сетки по изломам профиля)."""
        r_e = np.asarray(r_e, dtype=float)
        outer = r_e > self.r1_star
        gap0 = self.r2_star - self.r1_star
        if self.spec.kind == "log":
            pre = self.r2_star - gap0 * np.exp(self.r1_star - r_e)
        else:
            beta = self.spec.beta
            base = np.where(outer, r_e - self.r1_star + gap0 ** beta, 1.0)
            pre = self.r2_star - base ** (1.0 / beta)
        out = np.where(outer, pre, r_e)
        return out.item() if out.ndim == 0 else out


def make_exact_map(spec: ExactMapSpec, r1_star: float) -> ExactMap:
    """Проверяет спецификацию отображения."""
    if spec.kind not in EXACT_MAP_KINDS:
        raise ValidationError(f"Неизвестный тип отображения '{spec.kind}'", field="kind")
    if not spec.r2_star > r1_star:
        raise ValidationError(
            f"r2_star должно быть > r1_star ({spec.r2_star} ≤ {r1_star})", field="r2_star"
        )
    if spec.kind == "power-beta":
        if spec.beta is None or not (BETA_RANGE[0] < spec.beta < BETA_RANGE[1]):
            raise ValidationError(f"beta должно лежать в (-2/3, 0), получено {spec.beta}", field="beta")
    return ExactMap(spec=spec, r1_star=r1_star)


def check_exact_profile(profile) -> None:
    """Точный вариант принимает только ограниченные профили."""
    if profile.kind == "power":
        raise UnsupportedCombinationError(
            "Точный вариант не поддерживает степенной профиль (α̃ неограничен)", field="kind"
        )


def exact_fields(exact_map: ExactMap, profile, r):
    """Массивы (r_e, γ_e, γ̃_e, d̃_e, d_e, d̂_e) в точках r ∈ (0, r2*)."""
    r = np.asarray(r, dtype=float)
    if np.any(r >= exact_map.r2_star):
        raise DomainError(f"Отображение сингулярно при r ≥ r2* = {exact_map.r2_star}")
    if np.any(r <= 0):
        raise DomainError("r должно быть > 0")
    r_e = exact_map.r_e(r)
    gamma_e = exact_map.gamma_e(r)
    _, d_tilde, _, d, d_hat = scaling_fields(profile, r_e)
    return r_e, gamma_e, r_e / r, d_tilde, d, d_hat


def exact_map_at(map_spec: ExactMapSpec, profile, r) -> ExactPoint:
    """Величины точного метода в точке r < r2*."""
    check_exact_profile(profile)
    exact_map = make_exact_map(map_spec, profile.r1_star)
    r, scalar = _as_array(r)
    r_e, gamma_e, gamma_tilde_e, d_tilde, d, d_hat = exact_fields(exact_map, profile, r)
    return ExactPoint(
        r=_pick(r, scalar),
        r_e=_pick(r_e, scalar),
        gamma_e=_pick(gamma_e, scalar),
        gamma_tilde_e=_pick(gamma_tilde_e, scalar),
        d_tilde_e=_pick(d_tilde, scalar),
        d_e=_pick(d, scalar),
        d_hat_e=_pick(d_hat, scalar),
    )


def exact_map_diagnostics(map_spec: ExactMapSpec, profile,
                          grid: Optional[Sequence[float]] = None) -> ExactMapDiagnostics:
    """Супремумы коэффициентов, ограниченность которых делает КЭ-пространства подпространствами."""
    check_exact_profile(profile)
    exact_map = make_exact_map(map_spec, profile.r1_star)
    r1, r2 = profile.r1_star, exact_map.r2_star
    if grid is None:
        r = r2 - (r2 - r1) * np.geomspace(1e-10, 1.0, 4001)[:-1]
    else:
        r = np.asarray(grid, dtype=float)
        r = r[(r > r1) & (r < r2)]
    _, gamma_e, gamma_tilde_e, d_tilde, d, _ = exact_fields(exact_map, profile, r)
    gap = r2 - r
    quantities = {
        "density": 1.0 / (gap * gamma_e * np.abs(d)),
        "radial": gamma_tilde_e ** 2 / gamma_e,
        "angular_decay": gamma_e * gap ** 2,
        "mass_decay": gamma_tilde_e ** 2 * gamma_e * gap ** 2,
        "d_tilde2_over_d": np.abs(d_tilde ** 2 / d),
        "d": np.abs(d),
        "d_tilde2_d": np.abs(d_tilde ** 2 * d),
    }
    sups = {name: float(np.max(values)) for name, values in quantities.items()}
    logger.debug(f"Диагностика отображения {map_spec.kind}: {sups}")
    return ExactMapDiagnostics(quantities=sups, cap=DIAGNOSTIC_CAP)


def symbol_values(profile, branch: str, r):
    """Символ η оператора T в точках r: нижняя ветвь conj(|d̂|/d̂), верхняя conj(d̂|d̃|²/(d̃²|d̂|))."""
    _, d_tilde, _, _, d_hat = scaling_fields(profile, r)
    unit_hat = d_hat / np.abs(d_hat)
    if branch == "lower":
        return unit_hat
    if branch == "upper":
        unit_tilde = d_tilde / np.abs(d_tilde)
        return np.conj(unit_hat) * unit_tilde ** 2
    raise ValidationError(f"Неизвестная ветвь '{branch}'", field="branch")
