import numpy as np
import pytest

from core.errors import DomainError, UnsupportedCombinationError, ValidationError
from core.models import ExactMapSpec, ProfileSpec
from services.profiles import make_profile
from services.scaling import (
    d_zero,
    default_tau_grid,
    exact_map_at,
    exact_map_diagnostics,
    make_exact_map,
    scaling_at,
    symbol_values,
    tau_bound,
)


def _affine(alpha0=3.0):
    return make_profile(ProfileSpec("affine", alpha0=alpha0, r1_star=1.0))


def test_scaling_fields_at_point():
    point = scaling_at(_affine(), 2.0)
    assert point.alpha_tilde == pytest.approx(1.5)
    assert point.d_tilde == pytest.approx(1 + 1.5j)
    assert point.d == pytest.approx(1 + 3j)
    assert point.r_tilde == pytest.approx(2.0 * (1 + 1.5j))


def test_d_hat_is_constant_inside():
    point = scaling_at(_affine(), np.array([0.2, 0.7, 1.0]))
    assert np.allclose(point.d_hat, 1 + 3j)
    assert np.allclose(point.d_tilde, 1.0)
    smooth = make_profile(ProfileSpec("smooth-chi2", alpha0=2.0))
    assert scaling_at(smooth, 0.5).d_hat == pytest.approx(1.0)


def test_scaling_rejects_negative_radius():
    with pytest.raises(DomainError):
        scaling_at(_affine(), -0.1)


def test_d_zero_closed_forms():
    assert d_zero(_affine(3.0)) == pytest.approx((1 + 3j) / np.sqrt(10))
    assert d_zero(make_profile(ProfileSpec("power", alpha0=1.0, m=2))) == pytest.approx(1j)
    assert abs(d_zero(make_profile(ProfileSpec("smooth-poly", alpha0=5.0)))) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        d_zero(make_profile(ProfileSpec("unscaled"), verification=True))


def test_tau_bound_affine_is_atan_alpha0():
    assert tau_bound(_affine(1.0)) == pytest.approx(np.pi / 4)
    assert tau_bound(_affine(3.0)) == pytest.approx(np.arctan(3.0))
    smooth = tau_bound(make_profile(ProfileSpec("smooth-chi2", alpha0=2.0)))
    assert 0.0 < smooth < np.pi / 2


def test_symbols_are_unimodular():
    r = np.linspace(0.5, 20.0, 400)
    for spec in (ProfileSpec("affine", alpha0=3.0), ProfileSpec("power", alpha0=1.0, m=2),
                 ProfileSpec("smooth-poly", alpha0=2.0)):
        profile = make_profile(spec)
        for branch in ("lower", "upper"):
            assert np.allclose(np.abs(symbol_values(profile, branch, r)), 1.0)
    with pytest.raises(ValidationError):
        symbol_values(_affine(), "sideways", r)


def test_log_map_identity_inside_and_inverse():
    exact_map = make_exact_map(ExactMapSpec("log", r2_star=2.0), r1_star=1.0)
    assert exact_map.r_e(0.5) == pytest.approx(0.5)
    assert exact_map.r_e(1.0) == pytest.approx(1.0)
    r = np.array([1.1, 1.5, 1.9, 1.999])
    assert np.allclose(exact_map.inverse(exact_map.r_e(r)), r)
    numeric = (exact_map.r_e(r + 1e-7) - exact_map.r_e(r - 1e-7)) / 2e-7
    assert np.allclose(exact_map.gamma_e(r), numeric, rtol=1e-5)


def test_beta_map_derivative_and_inverse():
    exact_map = make_exact_map(ExactMapSpec("power-beta", r2_star=2.0, beta=-0.5), r1_star=1.0)
    r = np.array([1.2, 1.6, 1.95])
    assert np.all(exact_map.r_e(r) > 1.0)
    numeric = (exact_map.r_e(r + 1e-7) - exact_map.r_e(r - 1e-7)) / 2e-7
    assert np.allclose(exact_map.gamma_e(r), numeric, rtol=1e-5)
    assert np.allclose(exact_map.inverse(exact_map.r_e(r)), r)


def test_exact_map_validation():
    with pytest.raises(ValidationError):
        make_exact_map(ExactMapSpec("power-beta", r2_star=2.0, beta=-0.9), r1_star=1.0)
    with pytest.raises(ValidationError):
        make_exact_map(ExactMapSpec("log", r2_star=0.5), r1_star=1.0)
    with pytest.raises(UnsupportedCombinationError):
        exact_map_at(ExactMapSpec("log", r2_star=2.0),
                     make_profile(ProfileSpec("power", alpha0=1.0, m=2)), 1.5)


def test_exact_map_at_rejects_singular_end():
    spec = ExactMapSpec("log", r2_star=2.0)
    point = exact_map_at(spec, _affine(), 1.5)
    assert point.r_e == pytest.approx(1.0 + np.log(2.0))
    assert point.gamma_e == pytest.approx(2.0)
    with pytest.raises(DomainError):
        exact_map_at(spec, _affine(), 2.0)


def test_log_map_diagnostics_bounded():
    diagnostics = exact_map_diagnostics(ExactMapSpec("log", r2_star=2.0), _affine())
    assert diagnostics.passed
    assert diagnostics.quantities["density"] <= 1.0 + 1e-12


def test_arg_d_over_d_tilde_within_tau():
    r = default_tau_grid(1.0)[::97]
    for spec in (ProfileSpec("affine", alpha0=3.0), ProfileSpec("power", alpha0=1.0, m=2),
                 ProfileSpec("smooth-chi2", alpha0=2.0), ProfileSpec("smooth-poly", alpha0=2.0)):
        profile = make_profile(spec)
        point = scaling_at(profile, r)
        args = np.angle(point.d / point.d_tilde)
        assert np.all(args >= -1e-12)
        assert np.all(args <= tau_bound(profile) + 1e-12)


def test_exact_maps_increase_without_bound():
    gaps = np.array([1e-1, 1e-3, 1e-6, 1e-9, 1e-12])
    for spec in (ExactMapSpec("log", r2_star=2.0), ExactMapSpec("power-beta", r2_star=2.0, beta=-0.5)):
        exact_map = make_exact_map(spec, r1_star=1.0)
        r = np.linspace(0.5, 2.0 - 1e-6, 2001)
        assert np.all(np.diff(exact_map.r_e(r)) > 0)
        far = exact_map.r_e(2.0 - gaps)
        assert np.all(np.diff(far) > 0)
        assert far[-1] > 25.0
