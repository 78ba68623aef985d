"""
Окружение resonalens: логирование, каталог результатов, параллелизм.

Численные параметры здесь не задаются: они берутся только из TOML-конфигурации
исследования, чтобы результаты не зависели от окружения.
"""
import os
from dataclasses import dataclass
from dotenv import load_dotenv

load_dotenv()

@dataclass
class Config:
    """Настройки окружения"""
    # Logging
    LOG_FILE: str = os.getenv("RESONALENS_LOG_FILE", "resonalens.log")
    LOG_LEVEL: str = os.getenv("RESONALENS_LOG_LEVEL", "INFO")
    # Output
    OUTPUT_DIR: str = os.getenv("RESONALENS_OUTPUT_DIR", "results")
    RECORD_RUNTIME: bool = os.getenv("RESONALENS_RECORD_RUNTIME", "0") == "1"
    # Work pool
    JOBS: int = int(os.getenv("RESONALENS_JOBS", 1))
    # Плотный решатель: предупреждение выше этого числа степеней свободы
    MAX_DENSE_DOFS: int = int(os.getenv("RESONALENS_MAX_DENSE_DOFS", 2000))

# Создаем экземпляр конфигурации
config = Config()

def ensure_output_directory(path: str) -> str:
    """Создает каталог для результатов если его нет"""
    os.makedirs(path, exist_ok=True)
    return path
