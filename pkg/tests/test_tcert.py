import numpy as np
import pytest

from core.errors import DomainError, ValidationError
from core.models import ProfileSpec
from services.profiles import make_profile
from services.radialfem import build_mesh, refine_mesh
from services.scaling import d_zero
from services.tcert import (
    branch_for,
    coercivity_certificate,
    discrete_commutator_norm,
    smooth_symbol,
    t_symbol,
)


def _affine(alpha0=1.0):
    return make_profile(ProfileSpec("affine", alpha0=alpha0, r1_star=1.0))


def _power():
    return make_profile(ProfileSpec("power", alpha0=1.0, r1_star=1.0, m=2))


LOWER_OMEGA = np.exp(-0.3j)


def _smoothed_power(omega=LOWER_OMEGA):
    return smooth_symbol(t_symbol(_power(), omega), 0.05, r_hat1=1.02, r_hat2=3.75, r_end=4.0)


def test_branch_selection():
    d0 = d_zero(_affine())
    assert branch_for(1.0, d0)[0] == "lower"
    assert branch_for(1j, d0)[0] == "upper"
    _, angle = branch_for(1.0, d0)
    assert -np.pi <= angle < np.pi


def test_t_symbol_rejects_zero_frequency():
    with pytest.raises(DomainError):
        t_symbol(_affine(), 0.0)
    with pytest.raises(DomainError):
        t_symbol(make_profile(ProfileSpec("unscaled"), verification=True), 1.0)


def test_smoothed_symbol_close_and_constant_at_ends():
    smoothed = _smoothed_power()
    assert not smoothed.constant
    assert smoothed.sup_gap < smoothed.epsilon
    r = np.linspace(1.0, 4.0, 3001)
    exact = smoothed.base.eta(r)
    assert np.max(np.abs(exact - smoothed.eta(r))) <= 1.01 * smoothed.epsilon
    left = smoothed.eta(np.array([1.0, 1.01, 1.02]))
    right = smoothed.eta(np.array([3.75, 3.9, 4.0]))
    assert np.allclose(left, smoothed.left_value)
    assert np.allclose(right, smoothed.right_value)
    assert np.allclose(smoothed.eta_prime(np.array([1.01, 3.9])), 0.0)


def test_smoothed_symbol_derivative():
    smoothed = _smoothed_power()
    r = np.linspace(1.1, 3.6, 11)
    numeric = (smoothed.eta(r + 1e-6) - smoothed.eta(r - 1e-6)) / 2e-6
    assert np.allclose(smoothed.eta_prime(r), numeric, rtol=1e-4, atol=1e-6)


def test_smooth_symbol_validation():
    sym = t_symbol(_power(), 1.0)
    with pytest.raises(ValidationError):
        smooth_symbol(sym, 0.05, r_hat1=3.0, r_hat2=2.0, r_end=4.0)
    with pytest.raises(ValidationError):
        smooth_symbol(sym, 0.0, r_hat1=1.5, r_hat2=3.0, r_end=4.0)
    with pytest.raises(ValidationError):
        smooth_symbol(sym, 0.05, r_hat1=1.5, r_hat2=3.0)


def test_end_constants_sit_at_centre_of_end_pieces():
    # Верхняя ветвь: на [3.75, 4] η сдвигается больше чем на ε
    smoothed = _smoothed_power(1.0)
    exact = smoothed.base.eta
    assert smoothed.base.branch == "upper"
    assert abs(exact(np.array([3.75]))[0] - exact(np.array([4.0]))[0]) > smoothed.epsilon
    tail = exact(np.linspace(3.75, 4.0, 101))
    assert np.max(np.abs(tail - smoothed.right_value)) < smoothed.epsilon
    assert smoothed.sup_gap < smoothed.epsilon
    r = np.linspace(1.0, 4.0, 3001)
    assert np.max(np.abs(exact(r) - smoothed.eta(r))) <= 1.01 * smoothed.epsilon


def test_end_piece_wider_than_epsilon_rejected():
    sym = t_symbol(_power(), 1.0)
    with pytest.raises(ValidationError) as info:
        smooth_symbol(sym, 0.03, r_hat1=1.02, r_hat2=3.75, r_end=4.0)
    assert info.value.field == "r_hat2"


def test_affine_lower_branch_symbol_is_constant():
    smoothed = smooth_symbol(t_symbol(_affine(), 1.0), 0.05, r_hat1=1.5, r_hat2=3.5, r_end=4.0)
    assert smoothed.constant
    mesh = build_mesh(1.0, 4.0, 7, 2)
    assert discrete_commutator_norm(mesh, _affine(), smoothed) == 0.0


def test_commutator_decreases_under_refinement():
    smoothed = _smoothed_power()
    align = [b for b in smoothed.breakpoints if 1.0 < b < 4.0]
    mesh = build_mesh(1.0, 4.0, 12, 2, align_points=align)
    norms = []
    for _ in range(3):
        norms.append(discrete_commutator_norm(mesh, _power(), smoothed))
        mesh = refine_mesh(mesh)
    assert norms[0] > norms[1] > norms[2] > 0.0


def test_commutator_requires_aligned_mesh():
    smoothed = _smoothed_power()
    with pytest.raises(ValidationError):
        discrete_commutator_norm(build_mesh(1.0, 4.0, 6, 2), _power(), smoothed)


def test_certificate_passes_for_affine_profile():
    mesh = build_mesh(1.0, 4.0, 16, 2)
    certificate = coercivity_certificate(mesh, _affine(), 0, 1.0)
    assert certificate.branch == "lower"
    assert certificate.bound > 0
    assert certificate.passed


def test_certificate_rejects_essential_line():
    profile = _affine()
    mesh = build_mesh(1.0, 4.0, 8, 2)
    with pytest.raises(DomainError):
        coercivity_certificate(mesh, profile, 0, 1.0 / d_zero(profile))


def test_smoothed_certificate_with_constant_symbol():
    profile = _affine()
    smoothed = smooth_symbol(t_symbol(profile, 1.0), 0.1, r_hat1=1.5, r_hat2=3.5, r_end=4.0)
    mesh = build_mesh(1.0, 4.0, 16, 2)
    plain = coercivity_certificate(mesh, profile, 0, 1.0)
    certificate = coercivity_certificate(mesh, profile, 0, 1.0, smoothed=smoothed)
    assert certificate.epsilon == 0.1
    assert certificate.bound < plain.bound
    assert certificate.min_eig == pytest.approx(plain.min_eig)
    assert certificate.passed
