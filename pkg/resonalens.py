"""
Главный файл resonalens: запуск исследований, проверка конфигураций, значения оракула
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

from config import config, ensure_output_directory
from core.errors import ResonaLensError, ValidationError
from services.oracle import hankel_polynomial, hankel_resonances
from studies import check_report, emit_report, run_study, validate_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_CHECK = 3


def setup_logging() -> None:
    """Настройка логирования"""
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(config.LOG_FILE, encoding='utf-8'),
            logging.StreamHandler(sys.stdout)
        ]
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resonalens",
        description="Резонансы внешней задачи Гельмгольца методом комплексного масштабирования",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="выполнить исследование и записать отчёт")
    run.add_argument("config", help="TOML-файл исследования")
    run.add_argument("--out", help="каталог отчёта (по умолчанию OUTPUT_DIR/<имя исследования>)")
    run.add_argument("--jobs", type=int, default=None, help="число рабочих процессов")
    run.add_argument("--check", action="store_true", help="выполнить приёмочные проверки")

    validate = commands.add_parser("validate", help="проверить конфигурацию")
    validate.add_argument("config", help="TOML-файл исследования")

    oracle = commands.add_parser("oracle", help="резонансы шара с условием Дирихле")
    oracle.add_argument("--n", type=int, required=True, help="номер моды")
    oracle.add_argument("--rb", type=float, required=True, help="радиус препятствия r_b")
    return parser


def command_run(args) -> int:
    cfg = validate_config(args.config)
    out = args.out or os.path.join(config.OUTPUT_DIR, cfg.name)
    report = run_study(cfg, jobs=args.jobs)
    for path in emit_report(report, ensure_output_directory(out)):
        print(path)
    if args.check:
        results = check_report(cfg, report)
        failed = [r for r in results if not r.passed]
        print(f"Проверки: {len(results) - len(failed)} из {len(results)} пройдены")
        if failed:
            for result in failed:
                print(f"  FAIL {result.name}: {result.detail}")
            return EXIT_CHECK
    return EXIT_OK


def command_validate(args) -> int:
    cfg = validate_config(args.config)
    print(f"OK: исследование '{cfg.study}' ({cfg.name}), моды {cfg.modes}, p={cfg.degree}, "
          f"сектор {cfg.sector}")
    return EXIT_OK


def command_oracle(args) -> int:
    values = hankel_resonances(args.n, args.rb)
    poly = hankel_polynomial(args.n).polynomial
    for omega in values:
        residual = abs(poly(omega * args.rb))
        print(f"{omega.real:.17g} {omega.imag:.17g} {residual:.3e}")
    return EXIT_OK


COMMANDS = {"run": command_run, "validate": command_validate, "oracle": command_oracle}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()
    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        logger.error(f"Ошибка конфигурации: {e}")
        return EXIT_CONFIG
    except ResonaLensError as e:
        logger.error(f"Численный сбой: {e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
