"""Эталонные решения в замкнутой форме.

Резонансы сферы с условием Дирихле суть нули h¹_n(ω r_b), то есть корни полинома
p_n из представления h¹_n(z) = c_n e^{iz} p_n(z)/z^{n+1}. Для режима верификации
(без масштабирования) эталоном служат собственные частоты кольца r_b < r < R с условиями Дирихле.
"""
import logging
from typing import List

import numpy as np
from numpy.polynomial import Polynomial
from scipy import optimize, special

from core.errors import ValidationError
from core.models import HankelPolynomial

logger = logging.getLogger(__name__)

MAX_DEGREE = 25
NEWTON_STEPS = 50
NEWTON_TOLERANCE = 1e-12
# Шаг поиска смены знака относительно π/(R − r_b)
BRACKET_FRACTION = 1.0 / 40.0


def hankel_polynomial(n: int) -> HankelPolynomial:
    """p_n по рекуррентности p_{n+1} = (2n+1)·i·p_n + z²·p_{n−1}, p_0 = 1, p_1 = z + i."""
    if int(n) != n or not 0 <= n <= MAX_DEGREE:
        raise ValidationError(f"n должно лежать в [0, {MAX_DEGREE}], получено {n}", field="n")
    z_squared = Polynomial([0, 0, 1])
    previous, current = Polynomial([1.0 + 0j]), Polynomial([1j, 1.0])
    if n == 0:
        current = previous
    for k in range(1, int(n)):
        previous, current = current, (2 * k + 1) * 1j * current + z_squared * previous
    coefficients = np.asarray(current.coef, dtype=complex)
    return HankelPolynomial(n=int(n), coefficients=coefficients, c_n=(-1j) ** (int(n) + 1))


def hankel_h1(n: int, z):
    """h¹_n(z) через полиномиальный множитель."""
    hp = hankel_polynomial(n)
    z = np.asarray(z, dtype=complex)
    return hp.c_n * np.exp(1j * z) * hp.polynomial(z) / z ** (n + 1)


def _newton_polish(poly: Polynomial, root: complex) -> complex:
    derivative = poly.deriv()
    for _ in range(NEWTON_STEPS):
        slope = derivative(root)
        if slope == 0:
            break
        step = poly(root) / slope
        root = root - step
        if abs(step) <= NEWTON_TOLERANCE * max(1.0, abs(root)):
            break
    return complex(root)


def hankel_resonances(n: int, r_b: float) -> List[complex]:
    """Резонансы ω = z_k / r_b шара радиуса r_b для моды n, по возрастанию Re."""
    if not r_b > 0:
        raise ValidationError(f"r_b должно быть > 0, получено {r_b}", field="r_b")
    hp = hankel_polynomial(n)
    if hp.n == 0:
        return []
    poly = hp.polynomial
    roots = [_newton_polish(poly, complex(z)) for z in poly.roots()]
    roots.sort(key=lambda z: (z.real, z.imag))
    return [z / r_b for z in roots]


def _cross_product(n: int, r_b: float, R: float):
    def f(k):
        return (special.spherical_jn(n, k * r_b) * special.spherical_yn(n, k * R)
                - special.spherical_jn(n, k * R) * special.spherical_yn(n, k * r_b))
    return f


def annulus_dirichlet_eigs(r_b: float, R: float, n: int, count: int) -> List[float]:
    """Собственные частоты кольца с условиями Дирихле на r_b и R."""
    if not R > r_b > 0:
        raise ValidationError(f"Нужно R > r_b > 0, получено r_b={r_b}, R={R}", field="R")
    if count < 1:
        raise ValidationError(f"count должно быть ≥ 1, получено {count}", field="count")
    spacing = np.pi / (R - r_b)
    if n == 0:
        return [m * spacing for m in range(1, count + 1)]
    f = _cross_product(n, r_b, R)
    step = spacing * BRACKET_FRACTION
    roots = []
    left = step
    f_left = f(left)
    while len(roots) < count:
        right = left + step
        f_right = f(right)
        if f_left == 0:
            roots.append(float(left))
        elif f_left * f_right < 0:
            roots.append(float(optimize.brentq(f, left, right, xtol=1e-14, rtol=1e-14)))
        left, f_left = right, f_right
    logger.debug(f"Кольцо [{r_b}, {R}], n={n}: найдено {len(roots)} частот")
    return roots
