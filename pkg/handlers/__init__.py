"""
Модуль для обработки команд командной строки.
Каждая функция *_report строит словарь отчёта; вывод выполняет report_utils.render.
"""

from .domain_handlers import adjoint_report, friedrichs_report, load_domain, selfadjoint_report
from .pairing_handlers import model_bases, pairing_report, three_routes, verify_report
from .report_utils import render
from .reproduce_handlers import CRITERIA, phase_mutation, run_suite
from .spectrum_handlers import chains_report, spectrum_report

__all__ = [
    "adjoint_report", "friedrichs_report", "load_domain", "selfadjoint_report",
    "model_bases", "pairing_report", "three_routes", "verify_report",
    "render", "CRITERIA", "phase_mutation", "run_suite",
    "chains_report", "spectrum_report",
]
