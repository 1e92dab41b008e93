import argparse
import logging
import sys
from dataclasses import fields

from config import ENV, LOG_LEVEL, TOOL_VERSION, WORKERS, Tolerances, load_tolerances
from handlers import (
    CRITERIA, adjoint_report, chains_report, friedrichs_report, pairing_report, render,
    run_suite, selfadjoint_report, spectrum_report, verify_report,
)
from handlers.report_utils import ROUTE_CLOSED, ROUTE_CONTOUR
from spectral.errors import SUITE_FAILURE_EXIT, ConeError
from spectral.model_io import load_model

# Настройка логирования
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=LOG_LEVEL
)
logger = logging.getLogger(__name__)

COMMANDS_WITH_MODEL = ("spectrum", "chains", "pairing", "adjoint", "selfadjoint-check", "friedrichs", "verify")


def build_parser():
    """Парсер аргументов: общие флаги допусков и вывода плюс подкоманды."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("json", "text"), default="text", help="Формат отчёта")
    common.add_argument("--json", dest="output", action="store_const", const="json", help="То же, что --output json")
    common.add_argument("--workers", type=int, default=WORKERS, help="Число потоков сборки матрицы Грама")
    common.add_argument("--config", default=None, help="Файл допусков KEY=VALUE (по умолчанию CONE_EXT_CONFIG)")
    for f in fields(Tolerances):
        kind = int if f.type in (int, "int") else float
        common.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=kind, default=None, help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="cone-ext", description="Расширения эллиптических конических операторов")
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="Граничный спектр в полосе")
    p.add_argument("model")
    p.add_argument("--strip", nargs=2, type=float, metavar=("LO", "HI"))

    p = sub.add_parser("chains", parents=[common], help="Частные кратности и сингулярные цепочки")
    p.add_argument("model")

    p = sub.add_parser("pairing", parents=[common], help="Матрица Грама спаривания")
    p.add_argument("model")
    p.add_argument("--route", choices=(ROUTE_CLOSED, ROUTE_CONTOUR), default=ROUTE_CLOSED)
    p.add_argument("--csv", default=None, help="Записать матрицу Грама в CSV")

    p = sub.add_parser("adjoint", parents=[common], help="Сопряжённая область D^⊥")
    p.add_argument("model")
    p.add_argument("domain")

    p = sub.add_parser("selfadjoint-check", parents=[common], help="Проверка самосопряжённости области")
    p.add_argument("model")
    p.add_argument("domain", nargs="?")
    p.add_argument("--family", type=float, default=None, metavar="THETA", help="Член семейства D^θ вместо файла")

    p = sub.add_parser("friedrichs", parents=[common], help="Область расширения Фридрихса")
    p.add_argument("model")

    p = sub.add_parser("verify", parents=[common], help="Сравнение трёх маршрутов вычисления спаривания")
    p.add_argument("model")

    p = sub.add_parser("reproduce-paper", parents=[common], help="Набор воспроизводимых проверок")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", nargs="+", choices=[name for name, _ in CRITERIA], default=None)
    return parser


def dispatch(args, tol):
    """Выполнить подкоманду и вернуть (отчёт, код завершения)."""
    if args.command == "reproduce-paper":
        report = run_suite(tol, args.workers, args.seed, args.only)
        return report, 0 if report["passed"] else SUITE_FAILURE_EXIT
    model = load_model(args.model)
    logger.info(f"Загружена модель {model.label}: ν = {model.nu}, d = {model.d}")
    if args.command == "spectrum":
        return spectrum_report(model, tol, tuple(args.strip) if args.strip else None), 0
    if args.command == "chains":
        return chains_report(model, tol), 0
    if args.command == "pairing":
        return pairing_report(model, tol, args.workers, args.route, args.csv), 0
    if args.command == "adjoint":
        return adjoint_report(model, tol, args.workers, args.domain), 0
    if args.command == "selfadjoint-check":
        return selfadjoint_report(model, tol, args.workers, args.domain, args.family), 0
    if args.command == "friedrichs":
        return friedrichs_report(model, tol, args.workers), 0
    return verify_report(model, tol, args.workers), 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logger.debug(f"Запуск {args.command} в режиме {ENV}")
    try:
        overrides = {f.name: getattr(args, f.name) for f in fields(Tolerances)}
        tol = load_tolerances(args.config, overrides)
        report, code = dispatch(args, tol)
    except ConeError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"ошибка: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    sys.stdout.write(render(report, args.output))
    return code


if __name__ == "__main__":
    sys.exit(main())
