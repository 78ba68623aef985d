"""
Чтение и проверка TOML-конфигурации исследования.

Все нарушения собираются с путями ключей и выдаются одним ConfigError.
"""
import logging
import os
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # Python 3.10: API-compatible backport
    import tomli as tomllib
from typing import Any, Dict, List, Optional

from core.errors import ConfigError, UnsupportedCombinationError
from core.models import ExactMapSpec, ProfileSpec, StudyConfig, Window
from services.profiles import PROFILE_KINDS
from services.scaling import BETA_RANGE, EXACT_MAP_KINDS
from services.spectra import SECTORS

logger = logging.getLogger(__name__)

STUDY_TYPES = ("truncation", "mesh", "diagonal", "exact", "commutator", "coercivity", "verify-annulus")
REFERENCE_KINDS = ("oracle", "fine")


class _Collector:
    """Накопитель нарушений с доступом к значениям по пути 'секция.ключ'"""

    def __init__(self, data: Dict[str, Any]):
        self.data = data
        self.violations: List[str] = []

    def fail(self, key: str, message: str) -> None:
        self.violations.append(f"{key}: {message}")

    def section(self, name: str) -> Dict[str, Any]:
        value = self.data.get(name, {})
        if not isinstance(value, dict):
            self.fail(name, "ожидается секция")
            return {}
        return value

    def number(self, key: str, default: Any = None, required: bool = False,
               positive: bool = False) -> Optional[float]:
        section, name = key.split(".")
        value = self.section(section).get(name, default)
        if value is None:
            if required:
                self.fail(key, "обязательный ключ отсутствует")
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(key, f"ожидается число, получено {value!r}")
            return None
        if positive and not value > 0:
            self.fail(key, f"должно быть > 0, получено {value}")
        return float(value)

    def integer(self, key: str, default: Any = None, minimum: int = 0) -> Optional[int]:
        section, name = key.split(".")
        value = self.section(section).get(name, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(key, f"ожидается целое, получено {value!r}")
            return None
        if value < minimum:
            self.fail(key, f"должно быть ≥ {minimum}, получено {value}")
        return int(value)

    def text(self, key: str, default: Any = None, choices=None, required: bool = False) -> Optional[str]:
        section, name = key.split(".")
        value = self.section(section).get(name, default)
        if value is None:
            if required:
                self.fail(key, "обязательный ключ отсутствует")
            return None
        if not isinstance(value, str):
            self.fail(key, f"ожидается строка, получено {value!r}")
            return None
        if choices is not None and value not in choices:
            self.fail(key, f"допустимо одно из {', '.join(choices)}, получено '{value}'")
        return value

    def number_list(self, key: str, integer: bool = False) -> List[float]:
        section, name = key.split(".")
        value = self.section(section).get(name)
        if value is None:
            return []
        if not isinstance(value, list):
            value = [value]
        kind = int if integer else (int, float)
        if not value or any(isinstance(v, bool) or not isinstance(v, kind) for v in value):
            expected = "целых" if integer else "чисел"
            self.fail(key, f"ожидается непустой список {expected}, получено {value!r}")
            return []
        return [int(v) if integer else float(v) for v in value]

    def monotone(self, key: str, values: List[float], increasing: bool) -> None:
        pairs = zip(values, values[1:])
        ok = all(b > a for a, b in pairs) if increasing else all(b < a for a, b in pairs)
        if not ok:
            direction = "возрастать" if increasing else "убывать"
            self.fail(key, f"значения должны строго {direction}: {values}")


def _read(path: str) -> Dict[str, Any]:
    if not os.path.isfile(path):
        raise ConfigError([f"{path}: файл не найден"])
    try:
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError([f"{path}: ошибка разбора TOML: {e}"]) from e


def _window(c: _Collector) -> Optional[Window]:
    if "window" not in c.data:
        return None
    keys = ("re_min", "re_max", "im_min", "im_max")
    values = [c.number(f"window.{k}", required=True) for k in keys]
    if any(v is None for v in values):
        return None
    window = Window(*values)
    if not (window.re_min < window.re_max and window.im_min < window.im_max):
        c.fail("window", "нужно re_min < re_max и im_min < im_max")
    return window


def _omegas(c: _Collector) -> List[complex]:
    raw = c.section("coercivity").get("omegas")
    if raw is None:
        return []
    omegas = []
    if not isinstance(raw, list) or not raw:
        c.fail("coercivity.omegas", "ожидается непустой список пар [re, im]")
        return []
    for k, pair in enumerate(raw):
        if (not isinstance(pair, list) or len(pair) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in pair)):
            c.fail(f"coercivity.omegas[{k}]", f"ожидается пара [re, im], получено {pair!r}")
            continue
        omegas.append(complex(pair[0], pair[1]))
    return omegas


def _check_sweep(c: _Collector, cfg: StudyConfig) -> None:
    """Требования к параметрам прохода по типу исследования."""
    study = cfg.study
    needs_R = study in ("mesh", "commutator", "coercivity", "verify-annulus")
    if needs_R:
        if cfg.R is None:
            c.fail("domain.R", "обязательный ключ отсутствует")
        elif cfg.R <= cfg.r_b:
            c.fail("domain.R", f"должно быть > domain.r_b ({cfg.R} ≤ {cfg.r_b})")

    if study in ("mesh", "exact", "commutator", "verify-annulus"):
        if not cfg.elements:
            c.fail("sweep.elements", "обязательный ключ отсутствует")
        else:
            c.monotone("sweep.elements", cfg.elements, increasing=True)
            if len(cfg.elements) < 3:
                c.fail("sweep.elements", "для подгонки скорости нужно не менее 3 точек")
    if study == "commutator" and cfg.elements:
        doubling = all(b == 2 * a for a, b in zip(cfg.elements, cfg.elements[1:]))
        if not doubling:
            c.fail("sweep.elements", "для вложенных сеток каждое значение вдвое больше предыдущего")
    if study == "coercivity" and len(cfg.elements) != 1:
        c.fail("sweep.elements", "ожидается одно число элементов")

    if study in ("truncation", "diagonal"):
        if not cfg.R_list:
            c.fail("sweep.R", "обязательный ключ отсутствует")
        else:
            c.monotone("sweep.R", cfg.R_list, increasing=True)
            if cfg.R_list[0] <= cfg.r_b:
                c.fail("sweep.R", f"все значения должны быть > domain.r_b = {cfg.r_b}")
        if not cfg.h_list:
            c.fail("sweep.h", "обязательный ключ отсутствует")
        elif any(h <= 0 for h in cfg.h_list):
            c.fail("sweep.h", "шаг сетки должен быть > 0")
    if study == "truncation" and len(cfg.h_list) > 1:
        c.fail("sweep.h", "для исследования усечения шаг фиксирован (одно число)")
    if study == "diagonal" and cfg.R_list and cfg.h_list:
        if len(cfg.R_list) != len(cfg.h_list):
            c.fail("sweep.R/sweep.h",
                   f"длины списков sweep.R ({len(cfg.R_list)}) и sweep.h ({len(cfg.h_list)}) различаются")
        else:
            c.monotone("sweep.h", cfg.h_list, increasing=False)


def _check_study_specific(c: _Collector, cfg: StudyConfig) -> None:
    kind = cfg.profile.kind
    if cfg.study == "verify-annulus":
        if kind != "unscaled":
            c.fail("profile.kind", "исследование verify-annulus требует профиль 'unscaled'")
    elif kind == "unscaled":
        c.fail("profile.kind", "профиль 'unscaled' допустим только для verify-annulus")

    if cfg.study == "exact":
        if cfg.exact_map is None:
            c.fail("exact", "секция обязательна для исследования exact")
        elif cfg.exact_map.r2_star <= max(cfg.r_b, cfg.profile.r1_star):
            c.fail("exact.r2_star", "должно быть больше domain.r_b и profile.r1_star")
        if cfg.compare_beta is not None and not BETA_RANGE[0] < cfg.compare_beta < BETA_RANGE[1]:
            c.fail("exact.compare_beta", f"β должно лежать в {BETA_RANGE}")

    if cfg.study == "commutator":
        if cfg.r_hat1 is None or cfg.r_hat2 is None:
            c.fail("symbol.r_hat1/symbol.r_hat2", "обязательные ключи отсутствуют")
        elif cfg.R is not None and not cfg.profile.r1_star < cfg.r_hat1 < cfg.r_hat2 < cfg.R:
            c.fail("symbol.r_hat1/symbol.r_hat2", "нужно profile.r1_star < r_hat1 < r_hat2 < domain.R")
        if cfg.symbol_omega == 0:
            c.fail("symbol.omega_re/symbol.omega_im", "ω не может быть нулём")

    if cfg.study == "mesh" and cfg.reference == "fine" and cfg.reference_factor < 1:
        c.fail("reference.factor", "должно быть ≥ 1")


def validate_config(path: str) -> StudyConfig:
    """Нормализованная конфигурация с заполненными умолчаниями; все нарушения сразу."""
    data = _read(path)
    c = _Collector(data)
    known = {"study", "profile", "domain", "sweep", "window", "exact", "symbol", "coercivity", "reference"}
    for name in sorted(set(data) - known):
        c.fail(name, "неизвестная секция")

    study = c.text("study.type", choices=STUDY_TYPES, required=True)
    verification = study == "verify-annulus"
    profile = ProfileSpec(
        kind=c.text("profile.kind", default="unscaled" if verification else None,
                    choices=PROFILE_KINDS, required=True) or "affine",
        alpha0=c.number("profile.alpha0", default=1.0, positive=True) or 1.0,
        r1_star=c.number("profile.r1_star", default=1.0, positive=True) or 1.0,
        m=c.integer("profile.m", default=1, minimum=1) or 1,
        r2=c.number("profile.r2"),
    )
    if profile.r2 is not None and profile.r2 <= profile.r1_star:
        c.fail("profile.r2", "должно быть > profile.r1_star")

    modes = c.number_list("study.modes", integer=True) if "modes" in c.section("study") else [0]
    if any(n < 0 for n in modes):
        c.fail("study.modes", "номера мод должны быть ≥ 0")
    degree = c.integer("study.degree", default=2, minimum=1) or 2
    sector = c.text("study.sector", default="all" if verification else "lower", choices=SECTORS)

    exact_map = None
    compare_beta = None
    if "exact" in data:
        map_kind = c.text("exact.kind", default="log", choices=EXACT_MAP_KINDS)
        beta = c.number("exact.beta")
        r2_star = c.number("exact.r2_star", required=True, positive=True)
        compare_beta = c.number("exact.compare_beta")
        if map_kind == "power-beta" and beta is None:
            c.fail("exact.beta", "обязателен для отображения power-beta")
        if beta is not None and not BETA_RANGE[0] < beta < BETA_RANGE[1]:
            c.fail("exact.beta", f"β должно лежать в {BETA_RANGE}")
        if r2_star is not None:
            exact_map = ExactMapSpec(kind=map_kind or "log", r2_star=r2_star, beta=beta)

    cfg = StudyConfig(
        study=study or "",
        name=c.text("study.name", default=study) or "",
        profile=profile,
        r_b=c.number("domain.r_b", required=True, positive=True) or 1.0,
        modes=modes,
        degree=degree,
        sector=sector or "lower",
        margin=c.number("study.margin", default=0.05, positive=True) or 0.05,
        tolerance=c.number("study.tolerance", default=1e-8, positive=True) or 1e-8,
        match_radius=c.number("study.match_radius", default=0.05, positive=True) or 0.05,
        R=c.number("domain.R", positive=True),
        R_list=c.number_list("sweep.R"),
        elements=c.number_list("sweep.elements", integer=True),
        h_list=c.number_list("sweep.h"),
        window=_window(c),
        exact_map=exact_map,
        compare_beta=compare_beta,
        symbol_omega=complex(c.number("symbol.omega_re", default=1.0) or 0.0,
                             c.number("symbol.omega_im", default=0.0) or 0.0),
        epsilon=c.number("symbol.epsilon", default=0.05, positive=True) or 0.05,
        r_hat1=c.number("symbol.r_hat1"),
        r_hat2=c.number("symbol.r_hat2"),
        omegas=_omegas(c),
        refine=bool(c.section("coercivity").get("refine", True)),
        reference=c.text("reference.kind", default="oracle", choices=REFERENCE_KINDS) or "oracle",
        reference_factor=c.integer("reference.factor", default=2, minimum=1) or 2,
        source=os.path.abspath(path),
    )
    if cfg.study in STUDY_TYPES:
        _check_sweep(c, cfg)
        _check_study_specific(c, cfg)

    if cfg.study == "exact" and profile.kind == "power":
        # Сочетание отдельно от прочих нарушений
        if c.violations:
            c.fail("profile.kind", "точный вариант не поддерживает степенной профиль")
        else:
            raise UnsupportedCombinationError(
                "Точный вариант не поддерживает степенной профиль", field="profile.kind"
            )
    if c.violations:
        logger.error(f"Конфигурация {path}: {len(c.violations)} нарушений")
        raise ConfigError(c.violations)
    logger.info(f"Конфигурация {path} прочитана: исследование '{cfg.study}', моды {cfg.modes}")
    return cfg
