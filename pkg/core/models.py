"""
Модели предметной области: профили, сетки, матрицы, спектры, сертификаты, отчёты
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class ProfileSpec:
    """Описание профиля масштабирования α̃"""
    kind: str  # affine, power, smooth-chi2, smooth-poly, unscaled
    alpha0: float = 1.0
    r1_star: float = 1.0
    m: int = 1  # только для power
    r2: Optional[float] = None  # только для гладких профилей; по умолчанию r1_star + 1


@dataclass
class AssumptionItem:
    """Результат проверки одного пункта предположений"""
    name: str
    passed: bool
    witness: Optional[float] = None  # точка, где проверка не прошла
    detail: str = ""


@dataclass
class AssumptionReport:
    """Отчёт о проверке предположений на профиль"""
    items: Dict[str, AssumptionItem] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items.values())

    def failures(self) -> List[AssumptionItem]:
        return [item for item in self.items.values() if not item.passed]


@dataclass
class ScalingPoint:
    """Производные величины масштабирования в точке (или на массиве точек)"""
    r: Any
    alpha_tilde: Any
    d_tilde: Any
    alpha: Any
    d: Any
    d_hat: Any
    r_tilde: Any


@dataclass(frozen=True)
class ExactMapSpec:
    """Вещественное отображение точного (безусечённого) метода"""
    kind: str  # log, power-beta
    r2_star: float
    beta: Optional[float] = None  # только для power-beta, β ∈ (-2/3, 0)


@dataclass
class ExactPoint:
    """Величины точного метода, скомпонованные с r_e"""
    r: Any
    r_e: Any
    gamma_e: Any
    gamma_tilde_e: Any
    d_tilde_e: Any
    d_e: Any
    d_hat_e: Any


@dataclass
class ExactMapDiagnostics:
    """Выборочные супремумы коэффициентов точного метода"""
    quantities: Dict[str, float]
    cap: float

    @property
    def passed(self) -> bool:
        return all(np.isfinite(v) and v <= self.cap for v in self.quantities.values())


@dataclass
class RadialMesh:
    """Одномерная сетка высокого порядка на [r_b, r_end]"""
    r_b: float
    r_end: float
    breakpoints: np.ndarray
    degree: int
    quad_order: int
    variant: str = "truncated"  # truncated | exact
    exact_map: Optional[ExactMapSpec] = None
    last_quad_order: Optional[int] = None  # повышенный порядок на последнем элементе (exact)

    @property
    def n_elements(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def n_nodes(self) -> int:
        return self.n_elements * self.degree + 1

    @property
    def n_dofs(self) -> int:
        # Дирихле на обоих концах
        return self.n_nodes - 2

    @property
    def h(self) -> float:
        return float(np.max(np.diff(self.breakpoints)))


@dataclass
class ModeMatrices:
    """Матрицы одной сферической моды n"""
    n: int
    S: np.ndarray
    M: np.ndarray
    G: np.ndarray
    D: np.ndarray  # ∫ d φ_i φ_j dr (угловой блок без множителя n(n+1))
    mesh: RadialMesh
    profile: Any

    @property
    def multiplicity(self) -> int:
        return 2 * self.n + 1


@dataclass
class EigenPair:
    """Собственная пара пучка (S, M)"""
    lam: complex
    vec: np.ndarray
    residual: float


@dataclass(frozen=True)
class Window:
    """Прямоугольник в комплексной плоскости"""
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def contains(self, z: complex) -> bool:
        return self.re_min <= z.real <= self.re_max and self.im_min <= z.imag <= self.im_max


@dataclass
class SpectrumEntry:
    """Отобранное собственное значение"""
    omega: complex
    lam: complex
    eigvec: np.ndarray  # нормирован: x* G x = 1
    residual: float
    sector: str  # lower, upper, essential-adjacent, all


@dataclass
class SpectrumResult:
    """Отфильтрованный спектр одной моды"""
    n: int
    entries: List[SpectrumEntry] = field(default_factory=list)
    d0: Optional[complex] = None

    @property
    def omegas(self) -> List[complex]:
        return [e.omega for e in self.entries]


@dataclass
class OracleMatch:
    """Сопоставление значения оракула с вычисленным"""
    oracle: complex
    matched: Optional[complex]
    error: Optional[float]


@dataclass
class MatchResult:
    """Итог жадного сопоставления с оракулом"""
    matches: List[OracleMatch] = field(default_factory=list)
    spurious: List[complex] = field(default_factory=list)

    @property
    def missed(self) -> List[complex]:
        return [m.oracle for m in self.matches if m.matched is None]


@dataclass
class RateFit:
    """Подгонка скорости сходимости на логарифмических данных"""
    model: str  # algebraic | exponential
    slope: float  # показатель модели: err ~ C·param^s или C·exp(-s·param)
    log_slope: float  # наклон регрессии log(err) по log(param) или param
    intercept: float
    r_squared: float
    points: int


@dataclass
class CoercivityCertificate:
    """Численный сертификат T-коэрцитивности для пары (n, ω)"""
    omega: complex
    n: int
    branch: str
    tau: float
    tau1: float
    z: complex
    bound: float
    min_eig: float
    epsilon: float = 0.0  # > 0, если использован сглаженный символ

    @property
    def passed(self) -> bool:
        return self.min_eig >= self.bound - 1e-8


@dataclass
class HankelPolynomial:
    """Полиномиальный множитель h¹_n(z) = c_n e^{iz} p_n(z) / z^{n+1}"""
    n: int
    coefficients: np.ndarray  # по возрастанию степеней
    c_n: complex

    @property
    def polynomial(self) -> np.polynomial.Polynomial:
        return np.polynomial.Polynomial(self.coefficients)


@dataclass
class StudyConfig:
    """Нормализованная конфигурация исследования"""
    study: str
    name: str
    profile: ProfileSpec
    r_b: float
    modes: List[int]
    degree: int = 2
    sector: str = "lower"
    margin: float = 0.05
    tolerance: float = 1e-8
    match_radius: float = 0.05
    R: Optional[float] = None
    R_list: List[float] = field(default_factory=list)
    elements: List[int] = field(default_factory=list)
    h_list: List[float] = field(default_factory=list)
    window: Optional[Window] = None
    exact_map: Optional[ExactMapSpec] = None
    compare_beta: Optional[float] = None
    symbol_omega: complex = 1.0 + 0.0j
    epsilon: float = 0.05
    r_hat1: Optional[float] = None
    r_hat2: Optional[float] = None
    omegas: List[complex] = field(default_factory=list)
    refine: bool = True
    reference: str = "oracle"  # oracle | fine
    reference_factor: int = 2
    output_dir: Optional[str] = None
    source: Optional[str] = None


@dataclass
class ReportRow:
    """Строка rows.csv"""
    study: str
    n: int
    param_name: str
    param_value: float
    omega_re: float
    omega_im: float
    oracle_re: Optional[float]
    oracle_im: Optional[float]
    error_abs: Optional[float]
    residual: Optional[float]
    dofs: int
    runtime_ms: float = 0.0

    def sort_key(self) -> Tuple[int, float, float, float]:
        return (self.n, self.param_value, self.omega_re, self.omega_im)


@dataclass
class SummaryRow:
    """Строка summary.csv: скорость по отслеживаемому резонансу или статус сертификатов"""
    study: str
    n: int
    multiplicity: int
    tracked: str
    oracle_re: Optional[float] = None
    oracle_im: Optional[float] = None
    model: str = ""
    slope: Optional[float] = None
    log_slope: Optional[float] = None
    r_squared: Optional[float] = None
    points: int = 0
    missed: int = 0
    spurious: int = 0
    value: Optional[float] = None  # метрика без подгонки: согласие β, запас сертификата, последняя норма
    status: str = ""


@dataclass
class ConvergenceReport:
    """Результат исследования: строки и сводка"""
    study: str
    rows: List[ReportRow] = field(default_factory=list)
    summary: List[SummaryRow] = field(default_factory=list)
    series: Dict[str, List[Tuple[float, float]]] = field(default_factory=dict)
