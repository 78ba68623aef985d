"""
Иерархия исключений resonalens
"""
from typing import List, Optional


class ResonaLensError(Exception):
    """Базовое исключение проекта"""


class ValidationError(ResonaLensError, ValueError):
    """Нарушено ограничение на поле входных данных"""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class UnsupportedCombinationError(ValidationError):
    """Недопустимое сочетание вариантов (например, точный вариант со степенным профилем)"""


class ConfigError(ValidationError):
    """Ошибки файла конфигурации исследования; перечисляет все нарушения сразу"""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        message = "Некорректная конфигурация:\n" + "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(message)


class DomainError(ResonaLensError, ValueError):
    """Аргумент вне области определения операции"""


class AssumptionViolationError(ResonaLensError):
    """Профиль нарушает предположения, необходимые для масштабированной сборки"""


class SolverError(ResonaLensError):
    """Сбой собственного решателя"""

    def __init__(self, message: str, condition: Optional[float] = None):
        if condition is not None:
            message = f"{message} (число обусловленности M ≈ {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class ConstructionError(ResonaLensError):
    """Не удалось построить сглаженный символ с заданной точностью"""


class ReportError(ResonaLensError):
    """Ошибка записи отчёта"""

    def __init__(self, message: str, path: str):
        super().__init__(f"{message}: {path}")
        self.path = path


class SweepPointError(ResonaLensError):
    """Сбой в точке параметрического прохода исследования"""

    def __init__(self, study: str, n: int, param_name: str, param_value: float, cause: Exception):
        super().__init__(
            f"Исследование '{study}', мода n={n}, {param_name}={param_value:g}: {cause}"
        )
        self.study = study
        self.n = n
        self.param_name = param_name
        self.param_value = param_value
        self.cause = cause
