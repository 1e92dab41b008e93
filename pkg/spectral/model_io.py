"""
Чтение моделей из JSON с диагностикой по полям.
"""

import json
import logging
import numbers

import numpy as np

from .errors import ModelFormatError
from .mellin_numeric import ModelFunction, ModelTerm
from .pencil_core import ConeModel, MatrixPolynomial

logger = logging.getLogger(__name__)


def parse_complex(value, where):
    """Комплексное число из пары [re, im] или вещественного числа."""
    if isinstance(value, numbers.Real) and not isinstance(value, bool):
        return complex(value)
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, numbers.Real) and not isinstance(v, bool) for v in value)
    ):
        return complex(value[0], value[1])
    raise ModelFormatError(f"{where}: ожидалось комплексное число [re, im], получено {value!r}")


def _parse_matrix(value, d, where):
    if d == 1 and not (isinstance(value, list) and value and isinstance(value[0], list) and isinstance(value[0][0], list)):
        # для d = 1 допускается запись без вложенных строк
        if isinstance(value, list) and len(value) == 1:
            value = value[0]
        return np.array([[parse_complex(value, where)]], dtype=complex)
    if not isinstance(value, list) or len(value) != d:
        raise ModelFormatError(f"{where}: ожидалась матрица {d}×{d}")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != d:
            raise ModelFormatError(f"{where}[{i}]: ожидалась строка длины {d}")
        rows.append([parse_complex(entry, f"{where}[{i}][{j}]") for j, entry in enumerate(row)])
    return np.array(rows, dtype=complex)


def parse_polynomial(doc, d, where):
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{where}: ожидался объект с полями degree и coeffs")
    coeffs = doc.get("coeffs")
    if not isinstance(coeffs, list) or not coeffs:
        raise ModelFormatError(f"{where}.coeffs: ожидался непустой список матриц")
    degree = doc.get("degree", len(coeffs) - 1)
    if not isinstance(degree, int) or degree != len(coeffs) - 1:
        raise ModelFormatError(
            f"{where}.degree: значение {degree!r} не согласуется с {len(coeffs)} коэффициентами"
        )
    matrices = [_parse_matrix(c, d, f"{where}.coeffs[{k}]") for k, c in enumerate(coeffs)]
    return MatrixPolynomial(np.array(matrices))


def _parse_direction(value, d, where):
    if not isinstance(value, list) or len(value) != d:
        raise ModelFormatError(f"{where}: ожидался вектор направления длины {d}")
    return tuple(parse_complex(z, f"{where}[{i}]") for i, z in enumerate(value))


def parse_model_function(doc, where, d=1):
    """
    ModelFunction из {"label": str, "terms": [[c, sigma0, k], ...]}.

    При d > 1 каждое слагаемое несёт четвёртый элемент: направление e ∈ C^d.
    """
    if not isinstance(doc, dict) or not isinstance(doc.get("terms"), list):
        raise ModelFormatError(f"{where}: ожидался объект с полем terms")
    terms = []
    for n, term in enumerate(doc["terms"]):
        place = f"{where}.terms[{n}]"
        if not isinstance(term, list) or len(term) not in (3, 4):
            raise ModelFormatError(f"{place}: ожидалось [c, sigma0, k] или [c, sigma0, k, e]")
        k = term[2]
        if not isinstance(k, int) or isinstance(k, bool) or k < 0:
            raise ModelFormatError(f"{place}[2]: степень логарифма должна быть целой и неотрицательной")
        if len(term) == 4:
            direction = _parse_direction(term[3], d, f"{place}[3]")
        elif d == 1:
            direction = None
        else:
            raise ModelFormatError(f"{place}: при d = {d} нужно направление e ∈ C^{d}")
        c, sigma0 = parse_complex(term[0], f"{place}[0]"), parse_complex(term[1], f"{place}[1]")
        terms.append(ModelTerm(c, sigma0, k, 0, direction))
    return ModelFunction(tuple(terms), label=str(doc.get("label", "")))


def parse_model(doc, source="<model>"):
    """
    Построить ConeModel из разобранного JSON-документа.

    Args:
        doc (dict): Документ модели
        source (str): Имя источника для сообщений

    Returns:
        ConeModel: Проверенная модель

    Raises:
        ModelFormatError: При любом несоответствии схеме
    """
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{source}: корень документа должен быть объектом")
    for key in ("nu", "d", "indicial"):
        if key not in doc:
            raise ModelFormatError(f"{source}: отсутствует поле {key}")
    nu, d = doc["nu"], doc["d"]
    if not isinstance(nu, numbers.Real) or isinstance(nu, bool):
        raise ModelFormatError(f"{source}: nu должно быть числом")
    if not isinstance(d, int) or d < 1:
        raise ModelFormatError(f"{source}: d должно быть положительным целым")
    if not isinstance(doc["indicial"], list):
        raise ModelFormatError(f"{source}: indicial должно быть списком")
    indicial = [
        parse_polynomial(p, d, f"{source}: indicial[{k}]") for k, p in enumerate(doc["indicial"])
    ]
    dictionary = None
    if "dictionary" in doc:
        if not isinstance(doc["dictionary"], list):
            raise ModelFormatError(f"{source}: dictionary должно быть списком")
        dictionary = tuple(
            parse_model_function(f, f"{source}: dictionary[{n}]", d) for n, f in enumerate(doc["dictionary"])
        )
    try:
        model = ConeModel(
            nu=float(nu),
            indicial=tuple(indicial),
            label=str(doc.get("label", "")),
            placement=doc.get("placement", "right"),
            symmetric=doc.get("symmetric"),
            dictionary=dictionary,
        )
    except ModelFormatError as e:
        raise ModelFormatError(f"{source}: {e}") from e
    logger.info(f"Загружена модель {model.label or source}: nu={model.nu}, d={model.d}")
    return model


def load_model(path):
    """
    Прочитать модель из файла.

    Raises:
        ModelFormatError: Если файл не читается, не является JSON или нарушает схему
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{path}: строка {e.lineno}, столбец {e.colno}: {e.msg}") from e
    except OSError as e:
        raise ModelFormatError(f"{path}: {e}") from e
    return parse_model(doc, source=str(path))
