"""Поэлементная сборка радиальных КЭ-матриц для одной сферической моды.

Подстановка u = f(r)·Y_n^m разделяет трёхмерную задачу на независимые радиальные
задачи: радиальная производная даёт блок с весом d̃²/d·r², угловая часть
с весом n(n+1)·d, масса с весом d̃²·d·r². Базис: лагранжевы элементы степени p на узлах
Гаусса–Лобатто, условие Дирихле на r_b и r_end. Точный вариант умножает веса на
множители отображения r_e (γ_e, γ̃_e) и интегрирует до r2*.
"""
import logging
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import legendre

from core.errors import DomainError, ValidationError
from core.models import ExactMapSpec, ModeMatrices, RadialMesh
from services.profiles import require_valid
from services.scaling import (
    check_exact_profile,
    d_zero,
    exact_fields,
    make_exact_map,
    scaling_fields,
    symbol_values,
)

logger = logging.getLogger(__name__)

MESH_VARIANTS = ("truncated", "exact")
# Дополнительный порядок квадратуры на последнем элементе точного варианта
EXACT_EXTRA_ORDER = 4
SNAP_TOLERANCE = 1e-12


def gauss_lobatto_nodes(p: int) -> np.ndarray:
    """Узлы Гаусса–Лобатто на [-1, 1]: концы и корни P_p'."""
    if p == 1:
        return np.array([-1.0, 1.0])
    inner = legendre.Legendre.basis(p).deriv().roots()
    return np.concatenate(([-1.0], np.sort(inner.real), [1.0]))


@lru_cache(maxsize=32)
def _lagrange_coefficients(p: int) -> np.ndarray:
    # Столбец a: коэффициенты φ_a в базисе Лежандра
    nodes = gauss_lobatto_nodes(p)
    return np.linalg.inv(legendre.legvander(nodes, p))


def lagrange_basis(p: int, xi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Значения и производные базиса φ_a в опорных точках xi: массивы (len(xi), p+1)."""
    xi = np.asarray(xi, dtype=float)
    coeffs = _lagrange_coefficients(p)
    values = legendre.legvander(xi, p) @ coeffs
    derivatives = legendre.legvander(xi, p - 1) @ legendre.legder(coeffs, axis=0)
    return values, derivatives


def _points_for_order(order: int) -> int:
    return order // 2 + 1


@lru_cache(maxsize=64)
def reference_rule(p: int, order: int):
    xi, w = legendre.leggauss(_points_for_order(order))
    values, derivatives = lagrange_basis(p, xi)
    return xi, w, values, derivatives


def build_mesh(r_b: float, r_end: float, elements: int, p: int, variant: str = "truncated",
               align_points: Sequence[float] = (), exact_map: Optional[ExactMapSpec] = None,
               quad_order: Optional[int] = None) -> RadialMesh:
    """Равномерная сетка, в которую вставлены все точки выравнивания."""
    if not r_b > 0:
        raise ValidationError(f"r_b должно быть > 0, получено {r_b}", field="r_b")
    if not r_end > r_b:
        raise ValidationError(f"r_end должно быть > r_b ({r_end} ≤ {r_b})", field="r_end")
    if int(elements) != elements or elements < 1:
        raise ValidationError(f"Число элементов должно быть ≥ 1, получено {elements}", field="elements")
    if int(p) != p or p < 1:
        raise ValidationError(f"Степень должна быть ≥ 1, получено {p}", field="degree")
    if variant not in MESH_VARIANTS:
        raise ValidationError(f"Неизвестный вариант сетки '{variant}'", field="variant")
    if variant == "exact":
        if exact_map is None:
            raise ValidationError("Точный вариант требует отображение", field="exact_map")
        if abs(exact_map.r2_star - r_end) > SNAP_TOLERANCE * r_end:
            raise ValidationError("Для точного варианта r_end должно совпадать с r2*", field="r_end")
    order = 2 * p + 2 if quad_order is None else int(quad_order)
    if order < 2 * p + 2:
        raise ValidationError(f"Порядок квадратуры должен быть ≥ {2 * p + 2}", field="quad_order")

    breakpoints = np.linspace(r_b, r_end, int(elements) + 1)
    scale = max(abs(r_end), 1.0)
    for point in align_points:
        if point < r_b - SNAP_TOLERANCE * scale or point > r_end + SNAP_TOLERANCE * scale:
            raise ValidationError(
                f"Точка выравнивания {point} вне ({r_b}, {r_end})", field="align_points"
            )
        if np.min(np.abs(breakpoints - point)) <= SNAP_TOLERANCE * scale:
            continue
        breakpoints = np.sort(np.append(breakpoints, point))

    return RadialMesh(
        r_b=float(r_b),
        r_end=float(r_end),
        breakpoints=breakpoints,
        degree=int(p),
        quad_order=order,
        variant=variant,
        exact_map=exact_map,
        last_quad_order=order + EXACT_EXTRA_ORDER if variant == "exact" else None,
    )


def refine_mesh(mesh: RadialMesh) -> RadialMesh:
    """Равномерное деление каждого элемента пополам (вложенная сетка)."""
    bp = mesh.breakpoints
    mids = 0.5 * (bp[:-1] + bp[1:])
    refined = np.empty(2 * len(bp) - 1)
    refined[0::2] = bp
    refined[1::2] = mids
    return RadialMesh(
        r_b=mesh.r_b, r_end=mesh.r_end, breakpoints=refined, degree=mesh.degree,
        quad_order=mesh.quad_order, variant=mesh.variant, exact_map=mesh.exact_map,
        last_quad_order=mesh.last_quad_order,
    )


def mesh_nodes(mesh: RadialMesh) -> np.ndarray:
    """Координаты всех узлов (включая граничные)."""
    xi = gauss_lobatto_nodes(mesh.degree)
    bp = mesh.breakpoints
    nodes = np.empty(mesh.n_nodes)
    for e in range(mesh.n_elements):
        a, b = bp[e], bp[e + 1]
        nodes[e * mesh.degree:(e + 1) * mesh.degree + 1] = a + (xi + 1.0) * (b - a) / 2.0
    return nodes


def interior_nodes(mesh: RadialMesh) -> np.ndarray:
    return mesh_nodes(mesh)[1:-1]


def coefficient_kinks(mesh: RadialMesh, profile) -> list:
    """Изломы коэффициентов внутри (r_b, r_end) в координатах сетки."""
    kinks = list(getattr(profile, "kinks", ()))
    if mesh.variant == "exact":
        exact_map = make_exact_map(mesh.exact_map, profile.r1_star)
        kinks = [float(exact_map.inverse(k)) for k in kinks]
    return [k for k in kinks if mesh.r_b < k < mesh.r_end]


def _warn_misaligned(mesh: RadialMesh, profile) -> None:
    for kink in coefficient_kinks(mesh, profile):
        if np.min(np.abs(mesh.breakpoints - kink)) > SNAP_TOLERANCE * max(kink, 1.0):
            logger.warning(f"Излом коэффициентов r={kink:g} не является узлом сетки")


def _form_coefficients(mesh: RadialMesh, profile) -> Callable:
    """Веса (радиальный, угловой, массовый) формы a в точках x."""
    if mesh.variant == "truncated":
        def weights(x):
            _, d_tilde, _, d, _ = scaling_fields(profile, x)
            return d_tilde ** 2 / d * x ** 2, d, d_tilde ** 2 * d * x ** 2
        return weights

    exact_map = make_exact_map(mesh.exact_map, profile.r1_star)

    def exact_weights(x):
        _, gamma_e, gamma_tilde_e, d_tilde, d, _ = exact_fields(exact_map, profile, x)
        radial = gamma_tilde_e ** 2 / gamma_e * d_tilde ** 2 / d * x ** 2
        angular = gamma_e * d
        mass = gamma_tilde_e ** 2 * gamma_e * d_tilde ** 2 * d * x ** 2
        return radial, angular, mass
    return exact_weights


def gram_coefficients(mesh: RadialMesh, profile) -> Callable:
    form = _form_coefficients(mesh, profile)

    def weights(x):
        radial, angular, mass = form(x)
        return np.abs(radial), np.abs(angular), np.abs(mass)
    return weights


def _element_rule(mesh: RadialMesh, e: int, lo: Optional[float] = None, hi: Optional[float] = None):
    """Точки, веса и базис на элементе e (или на его части [lo, hi])."""
    a, b = mesh.breakpoints[e], mesh.breakpoints[e + 1]
    order = mesh.quad_order
    if mesh.last_quad_order is not None and e == mesh.n_elements - 1:
        order = mesh.last_quad_order
    jac = (b - a) / 2.0
    if lo is None and hi is None:
        xi, w, values, derivatives = reference_rule(mesh.degree, order)
        return a + (xi + 1.0) * jac, w * jac, values, derivatives / jac
    lo = a if lo is None else max(lo, a)
    hi = b if hi is None else min(hi, b)
    t, w = legendre.leggauss(_points_for_order(order))
    sub = (hi - lo) / 2.0
    x = lo + (t + 1.0) * sub
    values, derivatives = lagrange_basis(mesh.degree, 2.0 * (x - a) / (b - a) - 1.0)
    return x, w * sub, values, derivatives / jac


def _assemble_blocks(mesh: RadialMesh, coefficients: Callable,
                     lo: Optional[float] = None, hi: Optional[float] = None):
    """Полные (с граничными узлами) матрицы радиального, углового и массового блоков."""
    size = mesh.n_nodes
    radial = np.zeros((size, size), dtype=complex)
    angular = np.zeros((size, size), dtype=complex)
    mass = np.zeros((size, size), dtype=complex)
    p = mesh.degree
    bp = mesh.breakpoints
    for e in range(mesh.n_elements):
        if lo is not None and bp[e + 1] <= lo:
            continue
        if hi is not None and bp[e] >= hi:
            continue
        partial = (lo is not None and bp[e] < lo) or (hi is not None and bp[e + 1] > hi)
        x, w, values, derivatives = _element_rule(mesh, e, lo, hi) if partial else _element_rule(mesh, e)
        w_rad, w_ang, w_mass = coefficients(x)
        block = slice(e * p, e * p + p + 1)
        radial[block, block] += np.einsum("q,qa,qb->ab", w * w_rad, derivatives, derivatives)
        angular[block, block] += np.einsum("q,qa,qb->ab", w * w_ang, values, values)
        mass[block, block] += np.einsum("q,qa,qb->ab", w * w_mass, values, values)
    return radial, angular, mass


def _interior(matrix: np.ndarray) -> np.ndarray:
    return matrix[1:-1, 1:-1]


def _check_assembly_inputs(mesh: RadialMesh, profile, n: int) -> None:
    if int(n) != n or n < 0:
        raise ValidationError(f"Мода n должна быть целой ≥ 0, получено {n}", field="n")
    require_valid(profile)
    if mesh.variant == "exact":
        check_exact_profile(profile)


def assemble_mode(mesh: RadialMesh, profile, n: int) -> ModeMatrices:
    """Жёсткость S, масса M и матрица Грама G нормы X для моды n."""
    _check_assembly_inputs(mesh, profile, n)
    _warn_misaligned(mesh, profile)
    radial, angular, mass = _assemble_blocks(mesh, _form_coefficients(mesh, profile))
    g_radial, g_angular, g_mass = _assemble_blocks(mesh, gram_coefficients(mesh, profile))
    ll = n * (n + 1)
    S = _interior(radial + ll * angular)
    M = _interior(mass)
    G = _interior(g_radial + ll * g_angular + g_mass)
    D = _interior(angular)
    logger.debug(f"Мода n={n}: собрано {S.shape[0]} степеней свободы на {mesh.n_elements} элементах")
    return ModeMatrices(n=int(n), S=S, M=M, G=G, D=D, mesh=mesh, profile=profile)


def assemble_a1(mesh: RadialMesh, profile, n: int, branch: str, omega: complex,
                symbol: Optional[Callable] = None) -> np.ndarray:
    """Коэрцитивная часть a1: веса формы a, умноженные на conj(η), и масса −ω²d0²|d̃²d|r²."""
    if not profile.is_scaled:
        raise DomainError("assemble_a1 требует масштабированный профиль")
    if branch not in ("lower", "upper"):
        raise ValidationError(f"Неизвестная ветвь '{branch}'", field="branch")
    _check_assembly_inputs(mesh, profile, n)
    d0 = d_zero(profile)
    form = _form_coefficients(mesh, profile)
    exact_map = make_exact_map(mesh.exact_map, profile.r1_star) if mesh.variant == "exact" else None

    def eta(x):
        if symbol is not None:
            return np.asarray(symbol(x))
        points = exact_map.r_e(x) if exact_map is not None else x
        return symbol_values(profile, branch, points)

    rotation = -(omega ** 2) * d0 ** 2

    def weights(x):
        radial, angular, mass = form(x)
        conj_eta = np.conj(eta(x))
        return radial * conj_eta, angular * conj_eta, rotation * np.abs(mass)

    radial, angular, mass = _assemble_blocks(mesh, weights)
    return _interior(radial + n * (n + 1) * angular + mass)


def gram_on(mesh: RadialMesh, profile, n: int, lo: float, hi: float) -> np.ndarray:
    """Матрица Грама нормы X, ограниченной на [lo, hi]."""
    g_radial, g_angular, g_mass = _assemble_blocks(mesh, gram_coefficients(mesh, profile), lo, hi)
    return _interior(g_radial + n * (n + 1) * g_angular + g_mass)


def xnorm(matrices: ModeMatrices, coeffs: np.ndarray) -> float:
    coeffs = np.asarray(coeffs)
    return float(np.sqrt(max(0.0, np.real(np.conj(coeffs) @ matrices.G @ coeffs))))


def tail_xnorm(matrices: ModeMatrices, coeffs: np.ndarray, rho: float) -> float:
    """Норма X функции КЭ, ограниченной на [rho, r_end]."""
    mesh = matrices.mesh
    tol = SNAP_TOLERANCE * max(mesh.r_end, 1.0)
    if rho < mesh.r_b - tol or rho > mesh.r_end + tol:
        raise DomainError(f"rho={rho} вне [{mesh.r_b}, {mesh.r_end}]")
    if rho <= mesh.r_b + tol:
        return xnorm(matrices, coeffs)
    gram = gram_on(mesh, matrices.profile, matrices.n, rho, mesh.r_end)
    coeffs = np.asarray(coeffs)
    return float(np.sqrt(max(0.0, np.real(np.conj(coeffs) @ gram @ coeffs))))


def interpolation_matrix(mesh: RadialMesh, x: Sequence[float]) -> np.ndarray:
    """Значения внутренних базисных функций в точках x; вне [r_b, r_end] нули."""
    x = np.asarray(x, dtype=float)
    p = mesh.degree
    bp = mesh.breakpoints
    result = np.zeros((x.size, mesh.n_dofs))
    tol = SNAP_TOLERANCE * max(mesh.r_end, 1.0)
    inside = (x >= mesh.r_b - tol) & (x <= mesh.r_end + tol)
    elements = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, mesh.n_elements - 1)
    a, b = bp[elements], bp[elements + 1]
    xi = np.clip(2.0 * (x - a) / (b - a) - 1.0, -1.0, 1.0)
    values, _ = lagrange_basis(p, xi)
    for local in range(p + 1):
        column = elements * p + local - 1
        valid = inside & (column >= 0) & (column < mesh.n_dofs)
        result[np.flatnonzero(valid), column[valid]] = values[valid, local]
    return result


def evaluate(mesh: RadialMesh, coeffs: np.ndarray, x: Sequence[float]) -> np.ndarray:
    """Значения функции КЭ с коэффициентами coeffs в точках x."""
    return interpolation_matrix(mesh, x) @ np.asarray(coeffs)


def _check_nested(fine: RadialMesh, coarse: RadialMesh) -> None:
    tol = 1e-10 * max(fine.r_end, 1.0)
    if fine.variant != coarse.variant:
        raise ValidationError("Сетки разных вариантов не вложены", field="coarse_space")
    if abs(fine.r_b - coarse.r_b) > tol or coarse.r_end > fine.r_end + tol:
        raise ValidationError("Грубая сетка должна лежать в [r_b, R_f]", field="coarse_space")
    if coarse.degree > fine.degree:
        raise ValidationError("Степень грубого пространства больше степени мелкого", field="coarse_space")
    for point in coarse.breakpoints:
        if np.min(np.abs(fine.breakpoints - point)) > tol:
            raise ValidationError(
                f"Узел грубой сетки {point:g} отсутствует в мелкой сетке", field="coarse_space"
            )


def best_approximation_error(fine: ModeMatrices, coeffs: np.ndarray, coarse_mesh: RadialMesh) -> float:
    """min по функциям грубого пространства (продолженным нулём) расстояния в норме X мелкой задачи."""
    _check_nested(fine.mesh, coarse_mesh)
    coeffs = np.asarray(coeffs, dtype=complex)
    prolongation = interpolation_matrix(coarse_mesh, interior_nodes(fine.mesh))
    gram = fine.G
    normal = prolongation.T @ gram @ prolongation
    rhs = prolongation.T @ gram @ coeffs
    best = np.linalg.solve(normal, rhs)
    residual = coeffs - prolongation @ best
    return float(np.sqrt(max(0.0, np.real(np.conj(residual) @ gram @ residual))))


def export_triplets(matrix: np.ndarray, path: str) -> int:
    """Записывает ненулевые элементы в текстовый формат 'row col re im'."""
    rows, cols = np.nonzero(matrix)
    with open(path, "w", encoding="utf-8") as handle:
        for i, j in zip(rows, cols):
            value = complex(matrix[i, j])
            handle.write(f"{i} {j} {value.real:.17g} {value.imag:.17g}\n")
    return len(rows)
