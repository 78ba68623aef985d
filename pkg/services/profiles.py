"""Профили комплексного масштабирования α̃ и срезающие функции χ1, χ2.

Профиль задаёт радиальную замену r̃ = (1 + iα̃(r))·r. Поддерживаются встроенные
семейства: affine α0(1 − r1*/r), power α0(r − r1*)^m / r, гладкие переходы
smooth-chi2 (α0·χ2) и smooth-poly (полином класса C²), а также unscaled:
тождественный ноль, допустимый только в режиме верификации (кольцо без PML).

Все вычисления векторизованы по r: скаляр на входе даёт скаляр на выходе.
"""
import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from core.errors import AssumptionViolationError, ValidationError
from core.models import AssumptionItem, AssumptionReport, ProfileSpec

logger = logging.getLogger(__name__)

PROFILE_KINDS = ("affine", "power", "smooth-chi2", "smooth-poly", "unscaled")
SMOOTH_KINDS = ("smooth-chi2", "smooth-poly")
# Порог скачка для проверки непрерывности и число бисекций интервала
JUMP_TOLERANCE = 1e-6
CONTINUITY_BISECTIONS = 30
# χ1 обнуляется при t ≲ 1/745; такие точки не считаются нарушением положительности
UNDERFLOW_WINDOW = 2e-3
# Хвостовые выборки r = 10^k · r1*
TAIL_EXPONENTS = (2, 3, 4)
TAIL_TOLERANCE = 1e-2
# Ограничение на вторые разностные производные (непрерывное продолжение в r1*)
SECOND_DIFFERENCE_CAP = 1e8


def _as_array(r):
    arr = np.asarray(r, dtype=float)
    return arr, arr.ndim == 0


def _restore(values: np.ndarray, scalar: bool):
    if scalar:
        return values.item()
    return values


def chi1(t):
    """χ1(t) = exp(-1/t) при t > 0, иначе 0 (допускается обнуление при малых t)."""
    t, scalar = _as_array(t)
    positive = t > 0
    safe = np.where(positive, t, 1.0)
    with np.errstate(under="ignore"):
        out = np.where(positive, np.exp(-1.0 / safe), 0.0)
    return _restore(out, scalar)


def chi1_prime(t):
    """Производная χ1: exp(-1/t)/t² при t > 0."""
    t, scalar = _as_array(t)
    positive = t > 0
    safe = np.where(positive, t, 1.0)
    with np.errstate(under="ignore"):
        out = np.where(positive, np.exp(-1.0 / safe) / safe ** 2, 0.0)
    return _restore(out, scalar)


def chi2(t):
    """Гладкая ступенька: 0 при t ≤ 0, 1 при t ≥ 1, χ1(t)/(χ1(t)+χ1(1−t)) между."""
    t, scalar = _as_array(t)
    a = chi1(t)
    b = chi1(1.0 - t)
    return _restore(np.asarray(a / (a + b)), scalar)


def chi2_prime(t):
    """Производная χ2."""
    t, scalar = _as_array(t)
    a = chi1(t)
    b = chi1(1.0 - t)
    da = chi1_prime(t)
    db = chi1_prime(1.0 - t)
    out = (da * b + a * db) / (a + b) ** 2
    return _restore(np.asarray(out), scalar)


def _smoothstep5(s: np.ndarray) -> np.ndarray:
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)


def _smoothstep5_prime(s: np.ndarray) -> np.ndarray:
    return 30.0 * s ** 2 * (1.0 - s) ** 2


@dataclass(frozen=True)
class Profile:
    """Проверенный профиль α̃; неизменяем после создания"""
    spec: ProfileSpec
    verification: bool = False

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def alpha0(self) -> float:
        return self.spec.alpha0

    @property
    def r1_star(self) -> float:
        return self.spec.r1_star

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def r2(self) -> Optional[float]:
        return self.spec.r2

    @property
    def is_scaled(self) -> bool:
        return self.kind != "unscaled"

    @property
    def transition_length(self) -> float:
        """Характерная длина перехода (для гладких профилей r2 − r1*)."""
        if self.kind in SMOOTH_KINDS:
            return self.r2 - self.r1_star
        return self.r1_star

    @property
    def kinks(self) -> Sequence[float]:
        """Точки, где коэффициенты теряют гладкость; должны быть узлами сетки."""
        if self.kind == "unscaled":
            return ()
        if self.kind in SMOOTH_KINDS:
            return (self.r1_star, self.r2)
        return (self.r1_star,)

    def alpha_tilde(self, r):
        """α̃(r); ноль при r ≤ r1*."""
        r, scalar = _as_array(r)
        outside = r > self.r1_star
        if self.kind == "unscaled":
            out = np.zeros_like(r)
        elif self.kind in ("affine", "power"):
            safe = np.where(outside, r, 1.0)
            shift = np.where(outside, r - self.r1_star, 0.0)
            power = 1 if self.kind == "affine" else self.m
            out = np.where(outside, self.alpha0 * shift ** power / safe, 0.0)
        elif self.kind == "smooth-chi2":
            out = self.alpha0 * np.asarray(chi2((r - self.r1_star) / self.transition_length))
        else:
            s = np.clip((r - self.r1_star) / self.transition_length, 0.0, 1.0)
            out = self.alpha0 * _smoothstep5(s)
        return _restore(np.asarray(out, dtype=float), scalar)

    def alpha(self, r):
        """α = ∂_r(r·α̃) в замкнутой форме для каждого семейства."""
        r, scalar = _as_array(r)
        outside = r > self.r1_star
        if self.kind == "unscaled":
            out = np.zeros_like(r)
        elif self.kind == "affine":
            out = np.where(outside, self.alpha0, 0.0)
        elif self.kind == "power":
            shift = np.where(outside, r - self.r1_star, 0.0)
            out = np.where(outside, self.m * self.alpha0 * shift ** (self.m - 1), 0.0)
        elif self.kind == "smooth-chi2":
            length = self.transition_length
            s = (r - self.r1_star) / length
            out = self.alpha0 * (np.asarray(chi2(s)) + r * np.asarray(chi2_prime(s)) / length)
        else:
            length = self.transition_length
            s = np.clip((r - self.r1_star) / length, 0.0, 1.0)
            out = self.alpha0 * (_smoothstep5(s) + r * _smoothstep5_prime(s) / length)
        return _restore(np.asarray(out, dtype=float), scalar)

    @property
    def alpha_right_limit(self) -> float:
        """α(r1*+): значение, которым α̂ продолжается внутрь [0, r1*]."""
        if self.kind == "affine" or (self.kind == "power" and self.m == 1):
            return self.alpha0
        return 0.0

    @property
    def alpha_tilde_limit(self) -> float:
        """lim α̃(r) при r → ∞ (бесконечность для power с m ≥ 2)."""
        if self.kind == "unscaled":
            return 0.0
        if self.kind == "power" and self.m >= 2:
            return float("inf")
        return self.alpha0


@dataclass(frozen=True)
class TableProfile:
    """Кусочно-линейный профиль по таблице (r, α̃); только для validate_assumptions"""
    r_samples: tuple
    values: tuple
    r1_star: float
    kind: str = "table"

    @property
    def transition_length(self) -> float:
        return self.r1_star

    def alpha_tilde(self, r):
        r, scalar = _as_array(r)
        out = np.interp(r, self.r_samples, self.values)
        return _restore(np.asarray(out, dtype=float), scalar)

    def alpha(self, r):
        r, scalar = _as_array(r)
        xs = np.asarray(self.r_samples, dtype=float)
        ys = np.asarray(self.values, dtype=float)
        slopes = np.diff(ys) / np.diff(xs)
        idx = np.clip(np.searchsorted(xs, r, side="right") - 1, 0, len(slopes) - 1)
        inside = (r >= xs[0]) & (r <= xs[-1])
        slope = np.where(inside, slopes[idx], 0.0)
        out = np.interp(r, xs, ys) + r * slope
        return _restore(np.asarray(out, dtype=float), scalar)


def make_profile(spec: ProfileSpec, verification: bool = False) -> Profile:
    """Проверяет поля спецификации и возвращает вычислимый профиль."""
    if spec.kind not in PROFILE_KINDS:
        raise ValidationError(f"Неизвестный тип профиля '{spec.kind}'", field="kind")
    if not (np.isfinite(spec.alpha0) and spec.alpha0 > 0):
        raise ValidationError(f"alpha0 должно быть > 0, получено {spec.alpha0}", field="alpha0")
    if not (np.isfinite(spec.r1_star) and spec.r1_star > 0):
        raise ValidationError(f"r1_star должно быть > 0, получено {spec.r1_star}", field="r1_star")
    if spec.kind == "power" and (int(spec.m) != spec.m or spec.m < 1):
        raise ValidationError(f"m должно быть целым ≥ 1, получено {spec.m}", field="m")
    if spec.kind in SMOOTH_KINDS:
        if spec.r2 is None:
            spec = replace(spec, r2=spec.r1_star + 1.0)
        elif not spec.r2 > spec.r1_star:
            raise ValidationError(f"r2 должно быть > r1_star, получено {spec.r2}", field="r2")
    if spec.kind == "unscaled" and not verification:
        raise ValidationError(
            "Профиль 'unscaled' допустим только в режиме верификации", field="kind"
        )
    logger.debug(f"Профиль создан: {spec}")
    return Profile(spec=spec, verification=verification)


def alpha_tilde(profile, r):
    """α̃(r) для профиля; 0 при r ≤ r1*."""
    return profile.alpha_tilde(r)


def default_grid(r1_star: float) -> np.ndarray:
    """Сетка проверки: плотная до 10·r1*, геометрическая до 1000·r1*."""
    near = np.linspace(0.0, 10.0 * r1_star, 20001)
    far = np.geomspace(10.0 * r1_star, 1000.0 * r1_star, 2001)
    return np.unique(np.concatenate([near, far]))


def _first_witness(grid: np.ndarray, mask: np.ndarray) -> Optional[float]:
    idx = np.flatnonzero(mask)
    return float(grid[idx[0]]) if idx.size else None


def _continuity_witness(profile, grid: np.ndarray) -> Optional[float]:
    """Бисекция интервалов с заметным скачком: скачок, не убывающий при сжатии, считается разрывом."""
    left = grid[:-1].copy()
    right = grid[1:].copy()
    f_left = np.asarray(profile.alpha_tilde(left))
    f_right = np.asarray(profile.alpha_tilde(right))
    suspect = np.abs(f_right - f_left) > JUMP_TOLERANCE
    if not np.any(suspect):
        return None
    left, right = left[suspect], right[suspect]
    f_left, f_right = f_left[suspect], f_right[suspect]
    for _ in range(CONTINUITY_BISECTIONS):
        mid = 0.5 * (left + right)
        f_mid = np.asarray(profile.alpha_tilde(mid))
        go_left = np.abs(f_mid - f_left) >= np.abs(f_right - f_mid)
        right = np.where(go_left, mid, right)
        f_right = np.where(go_left, f_mid, f_right)
        left = np.where(go_left, left, mid)
        f_left = np.where(go_left, f_left, f_mid)
    jumps = np.abs(f_right - f_left)
    if np.any(jumps > JUMP_TOLERANCE):
        k = int(np.argmax(jumps))
        return float(0.5 * (left[k] + right[k]))
    return None


def _tail_sequences(profile):
    r_tail = np.array([10.0 ** k * profile.r1_star for k in TAIL_EXPONENTS])
    d_tilde = 1.0 + 1j * np.asarray(profile.alpha_tilde(r_tail))
    d = 1.0 + 1j * np.asarray(profile.alpha(r_tail))
    alignment = np.abs(d_tilde * np.abs(d) / (np.abs(d_tilde) * d) - 1.0)

    delta = 1e-3 * r_tail

    def unit(fn, x):
        v = 1.0 + 1j * np.asarray(fn(x))
        return v / np.abs(v)

    dd_tilde = np.abs(unit(profile.alpha_tilde, r_tail + delta) - unit(profile.alpha_tilde, r_tail - delta)) / (2 * delta)
    dd = np.abs(unit(profile.alpha, r_tail + delta) - unit(profile.alpha, r_tail - delta)) / (2 * delta)
    return r_tail, alignment, np.maximum(dd_tilde, dd)


def _tail_item(name: str, r_tail: np.ndarray, seq: np.ndarray) -> AssumptionItem:
    increasing = np.flatnonzero(np.diff(seq) > 1e-15)
    if increasing.size:
        return AssumptionItem(name, False, float(r_tail[increasing[0] + 1]),
                              "последовательность на хвосте не убывает")
    if seq[-1] > TAIL_TOLERANCE:
        return AssumptionItem(name, False, float(r_tail[-1]),
                              f"хвостовое значение {seq[-1]:.3e} > {TAIL_TOLERANCE}")
    return AssumptionItem(name, True)


def validate_assumptions(profile, grid: Optional[Sequence[float]] = None) -> AssumptionReport:
    """Выборочная проверка предположений на профиль; нарушения записываются в отчёт."""
    r1 = profile.r1_star
    grid = default_grid(r1) if grid is None else np.unique(np.asarray(grid, dtype=float))
    values = np.asarray(profile.alpha_tilde(grid))
    report = AssumptionReport()

    inside = grid <= r1
    bad = inside & (values != 0.0)
    report.items["vanishes_inside"] = AssumptionItem(
        "vanishes_inside", not bad.any(), _first_witness(grid, bad), "α̃ = 0 на [0, r1*]"
    )

    witness = _continuity_witness(profile, grid)
    report.items["continuous"] = AssumptionItem(
        "continuous", witness is None, witness, "скачки α̃ исчезают при измельчении"
    )

    checked = (grid - r1) >= UNDERFLOW_WINDOW * profile.transition_length
    bad = (values < 0.0) | (checked & (values <= 0.0))
    report.items["positive_outside"] = AssumptionItem(
        "positive_outside", not bad.any(), _first_witness(grid, bad), "α̃(r) > 0 при r > r1*"
    )

    drops = np.diff(values) < -1e-14 * np.maximum(1.0, np.abs(values[1:]))
    report.items["non_decreasing"] = AssumptionItem(
        "non_decreasing", not drops.any(), _first_witness(grid[1:], drops), "α̃ не убывает"
    )

    outer = grid[grid > r1]
    smooth_ok, smooth_witness = True, None
    if outer.size >= 3:
        first = np.gradient(np.asarray(profile.alpha_tilde(outer)), outer)
        second = np.gradient(first, outer)
        bad = ~np.isfinite(first) | ~np.isfinite(second) | (np.abs(second) > SECOND_DIFFERENCE_CAP)
        smooth_ok = not bad.any()
        smooth_witness = _first_witness(outer, bad)
    report.items["twice_differentiable"] = AssumptionItem(
        "twice_differentiable", smooth_ok, smooth_witness,
        "конечные первые и вторые разности на (r1*, ∞)",
    )

    r_tail, alignment, derivative = _tail_sequences(profile)
    report.items["tail_phase_alignment"] = _tail_item("tail_phase_alignment", r_tail, alignment)
    report.items["tail_phase_derivative"] = _tail_item("tail_phase_derivative", r_tail, derivative)

    for item in report.failures():
        logger.debug(f"Предположение '{item.name}' не выполнено, точка {item.witness}")
    return report


@lru_cache(maxsize=64)
def _cached_report(spec: ProfileSpec) -> AssumptionReport:
    return validate_assumptions(Profile(spec=spec))


def require_valid(profile: Profile) -> None:
    """Требует выполнения всех предположений перед масштабированной сборкой."""
    if not profile.is_scaled:
        if profile.verification:
            return
        raise AssumptionViolationError("Профиль 'unscaled' допустим только в режиме верификации")
    report = _cached_report(profile.spec)
    if not report.passed:
        names = ", ".join(f"{item.name} (r={item.witness})" for item in report.failures())
        raise AssumptionViolationError(f"Профиль {profile.spec} нарушает предположения: {names}")
