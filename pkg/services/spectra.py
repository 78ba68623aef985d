"""Решение пучка (S, M), переход к ω, фильтр по сектору, сопоставление с оракулом и подгонка скоростей.

Задача A(ω) = S − ω²M линейна по λ = ω², поэтому решается плотный обобщённый
пучок (QZ). Из каждого λ берутся оба корня ±√λ; сектор Re(iωd0) < 0 (lower)
или > 0 (upper) выбирает нужный, а отступ от прямой {t/d0} отсекает облако
дискретных значений существенного спектра.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy import stats

from config import config
from core.errors import SolverError, ValidationError
from core.models import (
    EigenPair,
    MatchResult,
    ModeMatrices,
    OracleMatch,
    RateFit,
    SpectrumEntry,
    SpectrumResult,
    Window,
)
from services.scaling import d_zero

logger = logging.getLogger(__name__)

SECTORS = ("lower", "upper", "all")
RATE_MODELS = ("algebraic", "exponential")
DEFAULT_MARGIN = 0.05
DEFAULT_TOLERANCE = 1e-8
# Относительный допуск совпадения при сравнении спектров для R и R + ΔR
PERSISTENCE_TOLERANCE = 1e-2


def _residual(S: np.ndarray, M: np.ndarray, lam: complex, vec: np.ndarray,
              norm_s: float, norm_m: float) -> float:
    scale = (norm_s + abs(lam) * norm_m) * np.linalg.norm(vec)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(S @ vec - lam * (M @ vec)) / scale)


def solve_gevp(S, M) -> List[EigenPair]:
    """Все конечные собственные пары пучка (S, M) плотным QZ."""
    S = np.atleast_2d(np.asarray(S, dtype=complex))
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if S.shape != M.shape or S.shape[0] != S.shape[1]:
        raise SolverError(f"Несогласованные размеры пучка: S{S.shape}, M{M.shape}")
    if S.shape[0] > config.MAX_DENSE_DOFS:
        logger.warning(f"Плотная задача размера {S.shape[0]} превышает {config.MAX_DENSE_DOFS}")
    try:
        values, vectors = scipy.linalg.eig(S, M)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SolverError(f"Сбой QZ: {e}", condition=float(np.linalg.cond(M))) from e
    finite = np.isfinite(values)
    if not finite.any():
        raise SolverError("Пучок не имеет конечных собственных значений",
                          condition=float(np.linalg.cond(M)))
    norm_s = np.linalg.norm(S, 2)
    norm_m = np.linalg.norm(M, 2)
    pairs = []
    for k in np.flatnonzero(finite):
        vec = vectors[:, k]
        pairs.append(EigenPair(lam=complex(values[k]), vec=vec,
                               residual=_residual(S, M, values[k], vec, norm_s, norm_m)))
    pairs.sort(key=lambda pair: (abs(pair.lam), pair.lam.real, pair.lam.imag))
    logger.debug(f"QZ: {len(pairs)} конечных собственных значений из {S.shape[0]}")
    return pairs


def essential_angle(omega: complex, d0: complex) -> float:
    """Угловое расстояние ω·d0 до вещественной оси (0 на прямой {t/d0})."""
    angle = abs(np.angle(omega * d0))
    return float(min(angle, np.pi - angle))


def in_sector(omega: complex, d0: complex, sector: str, margin: float = DEFAULT_MARGIN) -> bool:
    """Предикат сектора с отступом от прямой существенного спектра."""
    if sector == "all":
        return True
    value = (1j * omega * d0).real
    inside = value < 0 if sector == "lower" else value > 0
    return inside and essential_angle(omega, d0) > margin


def resonances(mm: ModeMatrices, profile, sector: str = "lower", window: Optional[Window] = None,
               margin: float = DEFAULT_MARGIN, tolerance: float = DEFAULT_TOLERANCE) -> SpectrumResult:
    """Собственные значения ω моды, отобранные по сектору, окну и невязке."""
    if sector not in SECTORS:
        raise ValidationError(f"Неизвестный сектор '{sector}'", field="sector")
    d0 = d_zero(profile) if profile.is_scaled else None
    if sector != "all" and d0 is None:
        raise ValidationError("Фильтр сектора требует масштабированный профиль", field="sector")
    result = SpectrumResult(n=mm.n, d0=d0)
    dropped = 0
    for pair in solve_gevp(mm.S, mm.M):
        root = np.sqrt(pair.lam)
        for omega in (root, -root):
            omega = complex(omega)
            if not in_sector(omega, d0, sector, margin):
                continue
            if window is not None and not window.contains(omega):
                continue
            if pair.residual > tolerance:
                dropped += 1
                continue
            norm = np.sqrt(max(np.real(np.conj(pair.vec) @ mm.G @ pair.vec), 0.0))
            label = sector
            if sector != "all" and essential_angle(omega, d0) <= 2 * margin:
                label = "essential-adjacent"
            result.entries.append(SpectrumEntry(
                omega=omega, lam=pair.lam, eigvec=pair.vec / norm if norm > 0 else pair.vec,
                residual=pair.residual, sector=label,
            ))
    if dropped:
        logger.warning(f"Мода n={mm.n}: отброшено {dropped} значений с невязкой выше {tolerance:g}")
    result.entries.sort(key=lambda entry: (entry.omega.real, entry.omega.imag))
    return result


def match_to_oracle(result: SpectrumResult, oracle: Sequence[complex], radius: float) -> MatchResult:
    """Жадное сопоставление ближайших пар в пределах radius."""
    if not radius > 0:
        raise ValidationError(f"radius должен быть > 0, получено {radius}", field="radius")
    computed = result.omegas
    candidates = []
    for i, target in enumerate(oracle):
        for j, omega in enumerate(computed):
            distance = abs(omega - target)
            if distance <= radius:
                candidates.append((distance, i, j))
    candidates.sort()
    assigned = {}
    used = set()
    for distance, i, j in candidates:
        if i in assigned or j in used:
            continue
        assigned[i] = (j, distance)
        used.add(j)
    matches = []
    for i, target in enumerate(oracle):
        if i in assigned:
            j, distance = assigned[i]
            matches.append(OracleMatch(oracle=complex(target), matched=computed[j], error=float(distance)))
        else:
            logger.warning(f"Мода n={result.n}: значение оракула {target} не найдено")
            matches.append(OracleMatch(oracle=complex(target), matched=None, error=None))
    spurious = [omega for j, omega in enumerate(computed) if j not in used]
    return MatchResult(matches=matches, spurious=spurious)


def fit_rate(points: Sequence[Tuple[float, float]], model: str = "algebraic") -> RateFit:
    """Наименьшие квадраты на логарифмических данных."""
    if model not in RATE_MODELS:
        raise ValidationError(f"Неизвестная модель '{model}'", field="model")
    if len(points) < 3:
        raise ValidationError(f"Нужно не менее 3 точек, получено {len(points)}", field="points")
    params = np.array([p for p, _ in points], dtype=float)
    errors = np.array([e for _, e in points], dtype=float)
    if np.any(~np.isfinite(errors)) or np.any(errors <= 0):
        raise ValidationError("Ошибки должны быть положительными", field="points")
    x = np.log(params) if model == "algebraic" else params
    y = np.log(errors)
    fit = stats.linregress(x, y)
    r_squared = float(fit.rvalue ** 2) if np.isfinite(fit.rvalue) else 0.0
    slope = fit.slope if model == "algebraic" else -fit.slope
    return RateFit(model=model, slope=float(slope), log_slope=float(fit.slope),
                   intercept=float(fit.intercept), r_squared=r_squared, points=len(points))


def filter_persistent(result: SpectrumResult, reference: SpectrumResult,
                      tolerance: float = PERSISTENCE_TOLERANCE) -> SpectrumResult:
    """Оставляет значения, повторившиеся в спектре той же моды с удлинённым слоем.

    Значения, порождённые отражением от границы усечения, смещаются вместе с R;
    резонансы от R почти не зависят. Допуск относительный: tolerance·max(1, |ω|).
    """
    if not tolerance > 0:
        raise ValidationError(f"tolerance должен быть > 0, получено {tolerance}", field="tolerance")
    if reference.n != result.n:
        raise ValidationError(f"Разные моды: {result.n} и {reference.n}", field="reference")
    others = np.asarray(reference.omegas, dtype=complex)
    kept = []
    for entry in result.entries:
        if others.size and np.min(np.abs(others - entry.omega)) <= tolerance * max(1.0, abs(entry.omega)):
            kept.append(entry)
    if len(kept) < len(result.entries):
        logger.info(f"Мода n={result.n}: {len(result.entries) - len(kept)} значений зависят от R, отброшены")
    return SpectrumResult(n=result.n, entries=kept, d0=result.d0)
