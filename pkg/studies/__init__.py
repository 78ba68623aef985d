"""
Пакет исследований: конфигурация, проходы, отчёты и проверки
"""

from .base import STUDY_REGISTRY, BaseStudy
from .convergence import DiagonalStudy, ExactStudy, MeshStudy, TruncationStudy, VerifyAnnulusStudy
from .certificates import CoercivityStudy, CommutatorStudy
from .config_loader import STUDY_TYPES, validate_config
from .runner import run_study
from .report import emit_report, read_rows
from .checks import check_report

__all__ = [
    'BaseStudy', 'STUDY_REGISTRY', 'STUDY_TYPES',
    'VerifyAnnulusStudy', 'TruncationStudy', 'MeshStudy', 'DiagonalStudy', 'ExactStudy',
    'CommutatorStudy', 'CoercivityStudy',
    'validate_config', 'run_study', 'emit_report', 'read_rows', 'check_report',
]
