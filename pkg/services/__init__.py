"""
Пакет численных сервисов: профили, масштабирование, КЭ-сборка, спектры, сертификаты, оракулы
"""

from .profiles import make_profile, validate_assumptions, chi2
from .scaling import scaling_at, d_zero, tau_bound, exact_map_at, exact_map_diagnostics
from .radialfem import build_mesh, refine_mesh, assemble_mode, assemble_a1, tail_xnorm, best_approximation_error
from .spectra import solve_gevp, resonances, match_to_oracle, fit_rate, filter_persistent
from .tcert import t_symbol, smooth_symbol, discrete_commutator_norm, coercivity_certificate
from .oracle import hankel_polynomial, hankel_resonances, annulus_dirichlet_eigs

__all__ = [
    'make_profile', 'validate_assumptions', 'chi2',
    'scaling_at', 'd_zero', 'tau_bound', 'exact_map_at', 'exact_map_diagnostics',
    'build_mesh', 'refine_mesh', 'assemble_mode', 'assemble_a1', 'tail_xnorm', 'best_approximation_error',
    'solve_gevp', 'resonances', 'match_to_oracle', 'fit_rate', 'filter_persistent',
    't_symbol', 'smooth_symbol', 'discrete_commutator_norm', 'coercivity_certificate',
    'hankel_polynomial', 'hankel_resonances', 'annulus_dirichlet_eigs',
]
