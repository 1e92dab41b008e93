"""
Общие функции для отчётов командной строки: округление, детерминированный JSON,
текстовые таблицы и пометки маршрутов вычислений.
"""

import json
import logging
import numbers

import numpy as np

from config import ENV, TOOL_VERSION

logger = logging.getLogger(__name__)

# Маршруты вычисления числовых значений
ROUTE_CLOSED = "closed-form"
ROUTE_CONTOUR = "contour"
ROUTE_XSPACE = "x-space"

SIGNIFICANT = 15


def round_real(x):
    """Округление до 15 значащих цифр; −0.0 заменяется на 0.0."""
    value = float(f"{float(x):.{SIGNIFICANT}g}")
    return 0.0 if value == 0 else value


def to_plain(obj):
    """Привести numpy-массивы, комплексные числа и кортежи к JSON-совместимому виду."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (numbers.Integral, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [round_real(obj.real), round_real(obj.imag)]
    if isinstance(obj, (numbers.Real, np.floating)):
        return round_real(obj)
    return obj


def dump_json(report):
    """Детерминированный JSON: порядок ключей задаётся построением отчёта."""
    return json.dumps(to_plain(report), ensure_ascii=False, indent=2) + "\n"


def complex_text(z):
    z = complex(z)
    return f"{round_real(z.real):.{SIGNIFICANT}g}{round_real(z.imag):+.{SIGNIFICANT}g}i"


def base_report(command, tol, model=None):
    """Заголовок отчёта: версия, режим, снимок допусков и эхо модели."""
    report = {
        "command": command,
        "tool_version": TOOL_VERSION,
        "env": ENV,
        "config": tol.as_dict(),
    }
    if model is not None:
        report["model"] = model.to_json()
    return report


def text_table(headers, rows):
    """Простая моноширинная таблица."""
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[n]) for row in cells) for n in range(len(headers))]
    lines = []
    for i, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_text(report):
    """Текстовое представление: скаляры построчно, таблицы из поля tables."""
    lines = []
    for key, value in report.items():
        if key in ("config", "model", "tables"):
            continue
        if isinstance(value, (dict, list)):
            lines.append(f"{key}: {json.dumps(to_plain(value), ensure_ascii=False)}")
        else:
            lines.append(f"{key}: {value}")
    for title, (headers, rows) in report.get("tables", {}).items():
        lines.append("")
        lines.append(title)
        lines.append(text_table(headers, rows))
    return "\n".join(lines) + "\n"


def render(report, output="text"):
    if output == "json":
        return dump_json({k: v for k, v in report.items() if k != "tables"})
    return render_text(report)


def matrix_rows(labels, matrix):
    """Строки таблицы матрицы с подписями строк."""
    return [[label] + [complex_text(z) for z in row] for label, row in zip(labels, matrix)]
