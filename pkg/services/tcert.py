"""Символ оператора T, его ε-сглаживание, дискретный коммутатор и сертификаты T-коэрцитивности.

T(ω) действует умножением на унимодулярную функцию η(r), ветвь которой задаётся
arg(−ω²d0²): нижняя на [−π, 0), верхняя на [0, π). Для дискретного анализа η
заменяется гладкой η_ε, постоянной у краёв рабочего интервала; коммутатор
(I − Π_h)(η_ε u_h) измеряется в норме X, а коэрцитивность оценивается минимальным
собственным значением эрмитовой части повёрнутой формы a1 относительно G.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.interpolate import make_lsq_spline

from core.errors import ConstructionError, DomainError, ValidationError
from core.models import CoercivityCertificate, RadialMesh
from services.profiles import chi2, chi2_prime
from services.radialfem import (
    SNAP_TOLERANCE,
    gram_coefficients,
    reference_rule,
    assemble_a1,
    assemble_mode,
    gauss_lobatto_nodes,
)
from services.scaling import d_hat_inside, d_zero, make_exact_map, symbol_values, tau_bound

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.05
CERTIFICATE_SAMPLES = 10_000
END_SAMPLES = 513
# Бюджет уточнения сплайна: степени и удвоения числа узлов
SPLINE_DEGREES = (3, 5)
KNOT_DOUBLINGS = 6
INITIAL_KNOTS = 4
# Порядок квадратуры для невязки интерполяции (η_ε не полином)
COMMUTATOR_EXTRA_ORDER = 10
ESSENTIAL_TOLERANCE = 1e-9


def branch_for(omega: complex, d0: complex) -> Tuple[str, float]:
    """Ветвь по arg(−ω²d0²) ∈ [−π, π)."""
    angle = float(np.angle(-(omega ** 2) * d0 ** 2))
    if angle >= np.pi:
        angle -= 2 * np.pi
    return ("lower" if angle < 0 else "upper"), angle


@dataclass
class Symbol:
    """η(r) на [r_b, ∞) (или [r_b, r2*) для точного варианта)"""
    profile: object
    omega: complex
    branch: str
    d0: complex
    exact_map: object = None

    def eta(self, r):
        r = np.asarray(r, dtype=float)
        points = self.exact_map.r_e(r) if self.exact_map is not None else r
        return symbol_values(self.profile, self.branch, points)

    def limit(self) -> complex:
        """Предел η при r → ∞ (для точного варианта при r → r2*)."""
        far = 1e12 * self.profile.r1_star
        return complex(symbol_values(self.profile, self.branch, np.array([far]))[0])


def t_symbol(profile, omega: complex, exact_map=None) -> Symbol:
    """Символ T(ω); ветвь по arg(−ω²d0²)."""
    if not profile.is_scaled:
        raise DomainError("Символ T требует масштабированный профиль")
    if omega == 0:
        raise DomainError("Символ T не определён при ω = 0")
    d0 = d_zero(profile)
    branch, _ = branch_for(omega, d0)
    mapped = make_exact_map(exact_map, profile.r1_star) if exact_map is not None else None
    return Symbol(profile=profile, omega=complex(omega), branch=branch, d0=d0, exact_map=mapped)


@dataclass
class SmoothedSymbol:
    """Гладкая η_ε: константа до r̂1, смешивание χ2, сплайн, смешивание, константа после r̂2"""
    base: Symbol
    epsilon: float
    r_hat1: float
    r_hat2: float
    blend_left: float  # ř1: конец левого смешивания
    blend_right: float  # ř2: начало правого смешивания
    left_value: complex
    right_value: complex
    spline_re: object = None
    spline_im: object = None
    sup_gap: float = 0.0
    constant: bool = False
    samples: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def breakpoints(self) -> Tuple[float, float, float, float]:
        return (self.r_hat1, self.blend_left, self.blend_right, self.r_hat2)

    def _hat(self, r):
        return self.spline_re(r) + 1j * self.spline_im(r)

    def _hat_prime(self, r):
        return self.spline_re.derivative()(r) + 1j * self.spline_im.derivative()(r)

    def eta(self, r):
        r = np.asarray(r, dtype=float)
        if self.constant:
            return np.full(r.shape, self.left_value, dtype=complex)
        out = np.empty(r.shape, dtype=complex)
        left = r <= self.r_hat1
        right = r >= self.r_hat2
        middle = ~left & ~right
        out[left] = self.left_value
        out[right] = self.right_value
        x = r[middle]
        hat = self._hat(np.clip(x, self.r_hat1, self.r_hat2))
        s_left = np.asarray(chi2((x - self.r_hat1) / (self.blend_left - self.r_hat1)))
        s_right = np.asarray(chi2((x - self.blend_right) / (self.r_hat2 - self.blend_right)))
        value = (1 - s_left) * self.left_value + s_left * hat
        out[middle] = (1 - s_right) * value + s_right * self.right_value
        return out

    def eta_prime(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        if self.constant:
            return out
        middle = (r > self.r_hat1) & (r < self.r_hat2)
        x = r[middle]
        hat = self._hat(x)
        hat_prime = self._hat_prime(x)
        w_left = self.blend_left - self.r_hat1
        w_right = self.r_hat2 - self.blend_right
        s_left = np.asarray(chi2((x - self.r_hat1) / w_left))
        ds_left = np.asarray(chi2_prime((x - self.r_hat1) / w_left)) / w_left
        s_right = np.asarray(chi2((x - self.blend_right) / w_right))
        ds_right = np.asarray(chi2_prime((x - self.blend_right) / w_right)) / w_right
        value = (1 - s_left) * self.left_value + s_left * hat
        value_prime = ds_left * (hat - self.left_value) + s_left * hat_prime
        out[middle] = (1 - s_right) * value_prime + ds_right * (self.right_value - value)
        return out


def _end_value(sym: Symbol, lo: float, hi: float, extra: Optional[complex] = None) -> Tuple[complex, float]:
    """Центр прямоугольника значений η на [lo, hi] и наибольшее отклонение η от него."""
    values = sym.eta(np.linspace(lo, hi, END_SAMPLES))
    if extra is not None:
        values = np.append(values, extra)
    centre = complex((values.real.min() + values.real.max()) / 2,
                     (values.imag.min() + values.imag.max()) / 2)
    return centre, float(np.max(np.abs(values - centre)))


def _blend_width(sym: Symbol, start: float, direction: int, target: complex,
                 limit: float, band: float) -> float:
    """Наибольшая ширина w ≤ limit, на которой |η − target| ≤ band от start в направлении direction."""
    steps = np.linspace(0.0, limit, 257)[1:]
    gaps = np.abs(sym.eta(start + direction * steps) - target)
    ok = gaps <= band
    if not ok[0]:
        return steps[0]
    bad = np.flatnonzero(~ok)
    return float(steps[bad[0] - 1]) if bad.size else float(limit)


def smooth_symbol(sym: Symbol, epsilon: float = DEFAULT_EPSILON, r_hat1: Optional[float] = None,
                  r_hat2: Optional[float] = None, r_start: Optional[float] = None,
                  r_end: Optional[float] = None) -> SmoothedSymbol:
    """Построение η_ε с апостериорной проверкой sup|η − η_ε| < ε на рабочем интервале."""
    r1 = sym.profile.r1_star
    if not epsilon > 0:
        raise ValidationError(f"epsilon должно быть > 0, получено {epsilon}", field="epsilon")
    if sym.exact_map is not None:
        r_end = sym.exact_map.r2_star if r_end is None else r_end
    if r_hat1 is None or r_hat2 is None or r_end is None:
        raise ValidationError("Нужны r_hat1, r_hat2 и конец рабочего интервала", field="r_hat1")
    if not (r1 < r_hat1 < r_hat2 < r_end):
        raise ValidationError(
            f"Нужно r1* < r̂1 < r̂2 < r_end: {r1}, {r_hat1}, {r_hat2}, {r_end}", field="r_hat1"
        )
    r_start = min(r1, r_hat1) if r_start is None else r_start
    stop = r_end * (1 - 1e-9) if sym.exact_map is not None else r_end
    samples = np.linspace(r_start, stop, CERTIFICATE_SAMPLES)
    exact_values = sym.eta(samples)
    tail = sym.limit() if sym.exact_map is not None else None

    first = exact_values[0]
    if np.max(np.abs(exact_values - first)) < 1e-14 and (tail is None or abs(tail - first) < 1e-14):
        logger.debug("Символ постоянен: η_ε = η")
        return SmoothedSymbol(base=sym, epsilon=epsilon, r_hat1=r_hat1, r_hat2=r_hat2,
                              blend_left=r_hat1, blend_right=r_hat2, left_value=complex(first),
                              right_value=complex(first), constant=True, samples=samples)

    # Концевые константы: центры значений η на [r_start, r̂1] и [r̂2, r_end]
    left_value, left_gap = _end_value(sym, r_start, r_hat1)
    right_value, right_gap = _end_value(sym, r_hat2, stop, extra=tail)
    if left_gap >= epsilon:
        raise ValidationError(
            f"η меняется на [{r_start:g}, {r_hat1:g}] на {2 * left_gap:.3e}: постоянная η_ε "
            f"не укладывается в ε = {epsilon}", field="r_hat1"
        )
    if right_gap >= epsilon:
        raise ValidationError(
            f"η меняется на [{r_hat2:g}, {r_end:g}] на {2 * right_gap:.3e}: постоянная η_ε "
            f"не укладывается в ε = {epsilon}", field="r_hat2"
        )

    quarter = (r_hat2 - r_hat1) / 4
    blend_left = r_hat1 + _blend_width(sym, r_hat1, +1, left_value, quarter, (epsilon + left_gap) / 2)
    blend_right = r_hat2 - _blend_width(sym, r_hat2, -1, right_value, quarter, (epsilon + right_gap) / 2)

    fit_x = np.linspace(r_hat1, r_hat2, 2049)
    fit_y = sym.eta(fit_x)
    best_gap = np.inf
    for degree in SPLINE_DEGREES:
        knots_count = INITIAL_KNOTS
        for _ in range(KNOT_DOUBLINGS):
            interior = np.linspace(r_hat1, r_hat2, knots_count + 2)[1:-1]
            knots = np.concatenate([[r_hat1] * (degree + 1), interior, [r_hat2] * (degree + 1)])
            candidate = SmoothedSymbol(
                base=sym, epsilon=epsilon, r_hat1=r_hat1, r_hat2=r_hat2,
                blend_left=blend_left, blend_right=blend_right,
                left_value=left_value, right_value=right_value,
                spline_re=make_lsq_spline(fit_x, fit_y.real, knots, k=degree),
                spline_im=make_lsq_spline(fit_x, fit_y.imag, knots, k=degree),
                samples=samples,
            )
            gap = float(np.max(np.abs(exact_values - candidate.eta(samples))))
            best_gap = min(best_gap, gap)
            if gap < epsilon:
                candidate.sup_gap = gap
                logger.debug(f"η_ε построена: степень {degree}, узлов {knots_count}, sup-разрыв {gap:.3e}")
                return candidate
            knots_count *= 2
    raise ConstructionError(
        f"Не удалось добиться sup|η − η_ε| < {epsilon}: лучший разрыв {best_gap:.3e}"
    )


def _check_aligned(mesh: RadialMesh, points) -> None:
    tol = SNAP_TOLERANCE * max(mesh.r_end, 1.0) * 1e3
    for point in points:
        if mesh.r_b < point < mesh.r_end and np.min(np.abs(mesh.breakpoints - point)) > tol:
            raise ValidationError(f"Сетка не выровнена по точке {point:g}", field="mesh")


def discrete_commutator_norm(mesh: RadialMesh, profile, sym_eps: SmoothedSymbol, n: int = 0) -> float:
    """sup ‖(I − Π_h)(η_ε u_h)‖_X / ‖u_h‖_X по функциям КЭ; Π_h: узловая интерполяция."""
    if sym_eps.constant:
        return 0.0
    _check_aligned(mesh, (sym_eps.r_hat1, sym_eps.r_hat2))
    matrices = assemble_mode(mesh, profile, n)
    p = mesh.degree
    size = mesh.n_nodes
    commutator = np.zeros((size, size), dtype=complex)
    gram_weights = gram_coefficients(mesh, profile)
    ll = n * (n + 1)
    xi_nodes = gauss_lobatto_nodes(p)
    bp = mesh.breakpoints
    for e in range(mesh.n_elements):
        a, b = bp[e], bp[e + 1]
        jac = (b - a) / 2.0
        order = mesh.quad_order + COMMUTATOR_EXTRA_ORDER
        if mesh.last_quad_order is not None and e == mesh.n_elements - 1:
            order = mesh.last_quad_order + COMMUTATOR_EXTRA_ORDER
        xi, w, values, derivatives = reference_rule(p, order)
        x = a + (xi + 1.0) * jac
        w = w * jac
        derivatives = derivatives / jac
        eta = sym_eps.eta(x)
        eta_prime = sym_eps.eta_prime(x)
        eta_nodes = sym_eps.eta(a + (xi_nodes + 1.0) * jac)
        # (I − Π)(η φ_a) = (η − η(x_a)) φ_a на элементе
        shift = eta[:, None] - eta_nodes[None, :]
        residual = shift * values
        residual_prime = eta_prime[:, None] * values + shift * derivatives
        w_rad, w_ang, w_mass = gram_weights(x)
        local = (np.einsum("q,qa,qb->ab", w * w_rad, np.conj(residual_prime), residual_prime)
                 + np.einsum("q,qa,qb->ab", w * (ll * w_ang + w_mass), np.conj(residual), residual))
        block = slice(e * p, e * p + p + 1)
        commutator[block, block] += local
    commutator = commutator[1:-1, 1:-1]
    commutator = (commutator + commutator.conj().T) / 2
    top = scipy.linalg.eigh(commutator, matrices.G, eigvals_only=True)[-1]
    return float(np.sqrt(max(top, 0.0)))


def _tau1(branch: str, tau: float, arg_hat: float, arg_w: float) -> Tuple[float, complex]:
    if branch == "lower":
        tau1 = min(-2 * tau, -arg_hat, arg_w)
        z = 1j * np.exp(-1j * (np.pi + tau1) / 2)
    else:
        tau1 = max(2 * tau, arg_hat, arg_w)
        z = -1j * np.exp(1j * (np.pi - tau1) / 2)
    return tau1, complex(z)


def coercivity_certificate(mesh: RadialMesh, profile, n: int, omega: complex,
                           smoothed: Optional[SmoothedSymbol] = None) -> CoercivityCertificate:
    """Минимальное собственное значение эрмитовой части z·A1 относительно G против cos(τ1/2)·min{1,|ω|²}."""
    if not profile.is_scaled:
        raise DomainError("Сертификат требует масштабированный профиль")
    d0 = d_zero(profile)
    if omega == 0 or abs((1j * omega * d0).real) <= ESSENTIAL_TOLERANCE * abs(omega):
        raise DomainError(f"ω = {omega} лежит на прямой существенного спектра")
    branch, arg_w = branch_for(omega, d0)
    tau = tau_bound(profile)
    arg_hat = float(np.angle(d_hat_inside(profile)))
    tau1, z = _tau1(branch, tau, arg_hat, arg_w)
    scale = min(1.0, abs(omega) ** 2)
    epsilon = 0.0
    symbol = None
    bound = float(np.cos(tau1 / 2) * scale)
    if smoothed is not None:
        epsilon = smoothed.epsilon
        symbol = smoothed.eta
        angle = min(np.pi / 2, abs(tau1) / 2 + np.arcsin(min(epsilon, 1.0)))
        bound = float((1 - epsilon) * np.cos(angle) * scale)
    a1 = assemble_a1(mesh, profile, n, branch, omega, symbol=symbol)
    rotated = z * a1
    hermitian = (rotated + rotated.conj().T) / 2
    gram = assemble_mode(mesh, profile, n).G
    min_eig = float(scipy.linalg.eigh(hermitian, gram, eigvals_only=True)[0])
    certificate = CoercivityCertificate(
        omega=complex(omega), n=int(n), branch=branch, tau=tau, tau1=float(tau1), z=z,
        bound=bound, min_eig=min_eig, epsilon=epsilon,
    )
    logger.debug(f"Сертификат n={n}, ω={omega}: min_eig={min_eig:.6f}, граница={bound:.6f}")
    return certificate
