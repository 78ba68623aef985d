import numpy as np
import pytest
from scipy import special

from core.errors import ValidationError
from services.oracle import annulus_dirichlet_eigs, hankel_h1, hankel_polynomial, hankel_resonances


def test_hankel_polynomial_low_orders():
    assert np.allclose(hankel_polynomial(0).coefficients, [1.0])
    assert np.allclose(hankel_polynomial(1).coefficients, [1j, 1.0])
    assert np.allclose(hankel_polynomial(2).coefficients, [-3.0, 3j, 1.0])


def test_hankel_h1_matches_scipy():
    z = np.array([0.3, 1.0, 2.5, 7.0])
    for n in range(4):
        expected = special.spherical_jn(n, z) + 1j * special.spherical_yn(n, z)
        assert np.allclose(hankel_h1(n, z), expected, rtol=1e-12)


def test_mode_two_resonances():
    values = hankel_resonances(2, 1.0)
    assert values == pytest.approx([-np.sqrt(3) / 2 - 1.5j, np.sqrt(3) / 2 - 1.5j], abs=1e-12)
    poly = hankel_polynomial(2).polynomial
    assert all(abs(poly(w)) <= 1e-10 for w in values)


def test_resonances_scale_with_radius():
    unit = hankel_resonances(5, 1.0)
    scaled = hankel_resonances(5, 2.0)
    assert len(unit) == 5
    assert np.allclose(np.array(scaled) * 2.0, unit)
    assert all(w.imag < 0 for w in unit)


def test_mode_zero_has_no_resonances():
    assert hankel_resonances(0, 1.0) == []


def test_invalid_inputs():
    with pytest.raises(ValidationError):
        hankel_polynomial(-1)
    with pytest.raises(ValidationError):
        hankel_polynomial(1.5)
    with pytest.raises(ValidationError):
        hankel_resonances(2, 0.0)
    with pytest.raises(ValidationError):
        annulus_dirichlet_eigs(2.0, 1.0, 0, 3)


def test_annulus_mode_zero_is_uniform():
    values = annulus_dirichlet_eigs(1.0, 2.0, 0, 3)
    assert values == pytest.approx([np.pi, 2 * np.pi, 3 * np.pi])


def test_annulus_mode_one_zeroes_cross_product():
    r_b, R = 1.0, 2.0
    values = annulus_dirichlet_eigs(r_b, R, 1, 3)
    assert values == sorted(values)
    for k in values:
        cross = (special.spherical_jn(1, k * r_b) * special.spherical_yn(1, k * R)
                 - special.spherical_jn(1, k * R) * special.spherical_yn(1, k * r_b))
        assert abs(cross) < 1e-10
    # Ненулевая мода сдвигает частоты вверх
    assert values[0] > np.pi


def test_resonances_up_to_mode_ten():
    for n in range(11):
        hp = hankel_polynomial(n)
        values = hankel_resonances(n, 1.0)
        assert len(values) == n
        for z in values:
            scale = np.polynomial.polynomial.polyval(abs(z), np.abs(hp.coefficients))
            assert abs(hp.polynomial(z)) <= 1e-10 * scale
            assert z.imag < 0
        mirrored = np.sort_complex(-np.conj(np.array(values, dtype=complex)))
        assert np.allclose(mirrored, np.sort_complex(np.array(values, dtype=complex)), atol=1e-8)
