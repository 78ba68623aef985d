import numpy as np
import pytest

from core.errors import SolverError, ValidationError
from core.models import ProfileSpec, SpectrumEntry, SpectrumResult, Window
from services.profiles import make_profile
from services.radialfem import assemble_mode, build_mesh
from services.scaling import d_zero
from services.spectra import (
    essential_angle,
    filter_persistent,
    fit_rate,
    in_sector,
    match_to_oracle,
    resonances,
    solve_gevp,
)


def _spectrum(*omegas):
    entries = [SpectrumEntry(omega=complex(w), lam=complex(w) ** 2, eigvec=np.ones(1),
                             residual=0.0, sector="lower") for w in omegas]
    return SpectrumResult(n=2, entries=entries)


def test_solve_gevp_diagonal_pencil():
    S = np.diag([4.0, 1.0, 9.0])
    M = np.diag([1.0, 1.0, 2.0])
    pairs = solve_gevp(S, M)
    assert [p.lam for p in pairs] == pytest.approx([1.0, 4.0, 4.5])
    assert all(p.residual < 1e-14 for p in pairs)


def test_solve_gevp_shape_mismatch():
    with pytest.raises(SolverError):
        solve_gevp(np.eye(3), np.eye(2))


def test_sector_predicate():
    d0 = (1 + 3j) / np.sqrt(10)
    lower = np.sqrt(3) / 2 - 1.5j
    assert in_sector(lower, d0, "lower")
    assert not in_sector(lower, d0, "upper")
    assert in_sector(lower, d0, "all")
    on_line = 2.0 / d0
    assert essential_angle(on_line, d0) == pytest.approx(0.0, abs=1e-12)
    assert not in_sector(on_line, d0, "lower")
    assert not in_sector(on_line, d0, "upper")


def test_resonances_rejects_unknown_sector():
    profile = make_profile(ProfileSpec("affine", alpha0=3.0))
    mm = assemble_mode(build_mesh(1.0, 3.0, 4, 2), profile, 0)
    with pytest.raises(ValidationError):
        resonances(mm, profile, sector="left")


def test_fit_rate_algebraic():
    points = [(h, 3.0 * h ** 4) for h in (0.1, 0.05, 0.025, 0.0125)]
    fit = fit_rate(points, "algebraic")
    assert fit.slope == pytest.approx(4.0)
    assert fit.log_slope == pytest.approx(4.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.points == 4


def test_fit_rate_exponential():
    points = [(R, 2.0 * np.exp(-1.5 * R)) for R in (2.0, 3.0, 4.0, 5.0)]
    fit = fit_rate(points, "exponential")
    assert fit.slope == pytest.approx(1.5)
    assert fit.log_slope == pytest.approx(-1.5)


def test_fit_rate_rejects_bad_input():
    with pytest.raises(ValidationError):
        fit_rate([(0.1, 1e-3), (0.05, 1e-4)])
    with pytest.raises(ValidationError):
        fit_rate([(0.1, 1e-3), (0.05, 0.0), (0.025, 1e-5)])
    with pytest.raises(ValidationError):
        fit_rate([(0.1, 1e-3), (0.05, 1e-4), (0.025, 1e-5)], "cubic")


def test_match_to_oracle_greedy():
    spectrum = _spectrum(0.87 - 1.5j, 0.9 - 1.45j, 3.0 - 1.0j)
    oracle = [np.sqrt(3) / 2 - 1.5j, -np.sqrt(3) / 2 - 1.5j]
    result = match_to_oracle(spectrum, oracle, radius=0.1)
    assert result.matches[0].matched == 0.87 - 1.5j
    assert result.matches[0].error == pytest.approx(abs(0.87 - np.sqrt(3) / 2))
    assert result.matches[1].matched is None
    assert result.missed == [oracle[1]]
    assert sorted(result.spurious, key=lambda z: z.real) == [0.9 - 1.45j, 3.0 - 1.0j]
    with pytest.raises(ValidationError):
        match_to_oracle(spectrum, oracle, radius=0.0)


def _capture_setup(R=5.0, elements=48):
    profile = make_profile(ProfileSpec("affine", alpha0=3.0, r1_star=1.0))
    mm = assemble_mode(build_mesh(1.0, R, elements, 3), profile, 2)
    return profile, mm


CAPTURE_WINDOW = Window(0.3, 1.4, -2.0, -1.0)
CAPTURE_TARGET = np.sqrt(3) / 2 - 1.5j


def test_truncated_scaling_captures_oracle_resonance():
    profile, mm = _capture_setup()
    result = resonances(mm, profile, "lower", CAPTURE_WINDOW, margin=0.05)
    close = [w for w in result.omegas if abs(w - CAPTURE_TARGET) <= 0.05]
    assert len(close) == 1
    assert abs(close[0] - CAPTURE_TARGET) <= 1e-3
    match = match_to_oracle(result, [CAPTURE_TARGET], radius=0.05)
    assert match.missed == []
    assert match.matches[0].matched == close[0]
    # Остальные значения окна приходят от границы усечения и помечаются как лишние
    assert len(match.spurious) == len(result.omegas) - 1
    assert all(abs(w - CAPTURE_TARGET) > 0.05 for w in match.spurious)
    assert result.d0 == pytest.approx(d_zero(profile))
    for entry in result.entries:
        assert np.real(np.conj(entry.eigvec) @ mm.G @ entry.eigvec) == pytest.approx(1.0)


def test_layer_eigenvalues_move_with_truncation_radius():
    profile, mm = _capture_setup()
    result = resonances(mm, profile, "lower", CAPTURE_WINDOW, margin=0.05)
    _, extended_mm = _capture_setup(R=5.3, elements=52)
    extended = resonances(extended_mm, profile, "lower", CAPTURE_WINDOW, margin=0.05)
    kept = filter_persistent(result, extended)
    assert len(kept.omegas) == 1
    assert abs(kept.omegas[0] - CAPTURE_TARGET) <= 1e-3
    assert kept.d0 == result.d0

    _, far_mm = _capture_setup(R=8.0)
    far = resonances(far_mm, profile, "lower", CAPTURE_WINDOW, margin=0.05)
    assert len(far.omegas) == 1
    assert abs(far.omegas[0] - CAPTURE_TARGET) <= 1e-4


def test_filter_persistent_validation():
    with pytest.raises(ValidationError):
        filter_persistent(_spectrum(1.0 - 1.0j), _spectrum(1.0 - 1.0j), tolerance=0.0)
    other_mode = SpectrumResult(n=3, entries=_spectrum(1.0 - 1.0j).entries)
    with pytest.raises(ValidationError):
        filter_persistent(_spectrum(1.0 - 1.0j), other_mode)
    assert filter_persistent(_spectrum(1.0 - 1.0j), _spectrum()).omegas == []
    kept = filter_persistent(_spectrum(1.0 - 1.0j, 2.0 - 1.0j), _spectrum(1.001 - 1.0j, 2.5 - 1.0j))
    assert kept.omegas == [1.0 - 1.0j]


def test_sector_filter_is_idempotent():
    profile, mm = _capture_setup()
    d0 = d_zero(profile)
    result = resonances(mm, profile, "lower", CAPTURE_WINDOW, margin=0.05)
    again = [w for w in result.omegas if in_sector(w, d0, "lower", 0.05) and CAPTURE_WINDOW.contains(w)]
    assert again == result.omegas
    assert resonances(mm, profile, "lower", CAPTURE_WINDOW, margin=0.05).omegas == result.omegas


def test_left_and_right_residuals_agree():
    _, mm = _capture_setup(R=3.0, elements=8)
    for pair in solve_gevp(mm.S, mm.M):
        pencil = mm.S - pair.lam * mm.M
        right = np.linalg.norm(pencil @ pair.vec)
        left = np.linalg.norm(pair.vec @ pencil)
        scale = np.linalg.norm(pencil, 2) * np.linalg.norm(pair.vec)
        assert abs(left - right) <= 1e-10 * scale


def test_unscaled_pencil_is_real_and_positive():
    profile = make_profile(ProfileSpec("unscaled"), verification=True)
    for n in (0, 1, 3):
        mm = assemble_mode(build_mesh(1.0, 2.0, 8, 2), profile, n)
        lams = np.array([pair.lam for pair in solve_gevp(mm.S, mm.M)])
        assert np.all(np.abs(lams.imag) <= 1e-8 * np.abs(lams))
        assert np.all(lams.real > 0)


def test_single_dof_pencil():
    profile = make_profile(ProfileSpec("unscaled"), verification=True)
    mm = assemble_mode(build_mesh(1.0, 2.0, 2, 1), profile, 0)
    (pair,) = solve_gevp(mm.S, mm.M)
    assert pair.lam == pytest.approx(1120 / 91)
