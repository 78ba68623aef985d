"""
Пакет моделей предметной области и исключений
"""

from .errors import (
    AssumptionViolationError,
    ConfigError,
    ConstructionError,
    DomainError,
    ReportError,
    ResonaLensError,
    SolverError,
    SweepPointError,
    UnsupportedCombinationError,
    ValidationError,
)
from .models import (
    AssumptionReport,
    CoercivityCertificate,
    ConvergenceReport,
    ExactMapSpec,
    ModeMatrices,
    ProfileSpec,
    RadialMesh,
    RateFit,
    SpectrumResult,
    StudyConfig,
    Window,
)

__all__ = [
    'ResonaLensError', 'ValidationError', 'UnsupportedCombinationError', 'ConfigError',
    'DomainError', 'AssumptionViolationError', 'SolverError', 'ConstructionError',
    'ReportError', 'SweepPointError',
    'ProfileSpec', 'AssumptionReport', 'ExactMapSpec', 'RadialMesh', 'ModeMatrices',
    'SpectrumResult', 'RateFit', 'CoercivityCertificate', 'StudyConfig',
    'ConvergenceReport', 'Window',
]
