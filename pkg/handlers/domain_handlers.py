import json
import logging

import numpy as np
from scipy import linalg

from spectral.errors import ModelFormatError
from spectral.extension_calculus import (
    DomainSubspace, adjoint_domain, dictionary_matrix, friedrichs_domain, is_selfadjoint,
    saturation_check, selfadjoint_family, sigma_action,
)
from spectral.pairing_engine import label_text, pairing_gram

from .pairing_handlers import model_bases
from .report_utils import base_report, matrix_rows

logger = logging.getLogger(__name__)


def load_domain(path, basis):
    """
    Прочитать DomainSubspace из JSON и проверить согласование с базисом модели.

    Raises:
        ModelFormatError: Если файл не читается или размерность не совпадает
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{path}: строка {e.lineno}, столбец {e.colno}: {e.msg}") from e
    except OSError as e:
        raise ModelFormatError(f"{path}: {e}") from e
    domain = DomainSubspace.from_json(doc)
    if len(domain.basis_labels) != basis.dim:
        raise ModelFormatError(f"{path}: {len(domain.basis_labels)} координат, dim E(A) = {basis.dim}")
    return DomainSubspace(basis.labels, domain.coords)


def dictionary_coords(model, basis, domain, tol):
    """Координаты столбцов области в словаре модели (если словарь задан)."""
    if not model.dictionary:
        return None
    T = dictionary_matrix(model, basis, tol)
    coords, *_ = linalg.lstsq(T, domain.coords)
    return coords


def _domain_table(labels, domain):
    return (["label"] + [f"v{n + 1}" for n in range(domain.dim)], matrix_rows([label_text(l) for l in labels], domain.coords))


def adjoint_report(model, tol, workers, domain_path):
    """D^⊥ ⊂ E(A^⋆) для области из файла."""
    basis, basis_star = model_bases(model, tol)
    domain = load_domain(domain_path, basis)
    gram = pairing_gram(model, basis, basis_star, tol, workers)
    adjoint = adjoint_domain(domain, gram, tol)
    report = base_report("adjoint", tol, model)
    report["route"] = gram.route
    report["domain"] = domain.to_json()
    report["adjoint_domain"] = adjoint.to_json()
    report["tables"] = {"D^⊥": _domain_table(gram.cols, adjoint)}
    return report


def selfadjoint_report(model, tol, workers, domain_path=None, theta=None):
    """
    Проверка самосопряжённости области из файла или члена семейства D^θ.

    Raises:
        ModelFormatError: Если не задан ни файл, ни θ
    """
    basis, same = model_bases(model, tol, dual=False)
    gram = pairing_gram(model, basis, same, tol, workers)
    if theta is not None:
        domain = selfadjoint_family(gram, theta, tol)
    elif domain_path:
        domain = load_domain(domain_path, basis)
    else:
        raise ModelFormatError("нужен файл области или --family THETA")
    verdict = is_selfadjoint(domain, gram, tol)
    report = base_report("selfadjoint-check", tol, model)
    report["route"] = gram.route
    report["domain"] = domain.to_json()
    report["selfadjoint"] = verdict
    if theta is not None:
        report["theta"] = theta
    dictionary = dictionary_coords(model, basis, domain, tol)
    if dictionary is not None:
        report["domain_dictionary"] = dictionary
    logger.info(f"Самосопряжённость области размерности {domain.dim}: {verdict}")
    return report


def friedrichs_report(model, tol, workers):
    """Область Фридрихса в исходных координатах и в координатах словаря."""
    basis, same = model_bases(model, tol, dual=False)
    domain = friedrichs_domain(model, basis, tol)
    gram = pairing_gram(model, basis, same, tol, workers)
    report = base_report("friedrichs", tol, model)
    report["route"] = gram.route
    report["dim_E"] = basis.dim
    report["domain"] = domain.to_json()
    report["selfadjoint"] = is_selfadjoint(domain, gram, tol)
    report["saturated"] = saturation_check(domain, sigma_action(basis, tol), tol)
    dictionary = dictionary_coords(model, basis, domain, tol)
    if dictionary is not None:
        # нормировка: первый ненулевой элемент столбца равен 1
        for n in range(dictionary.shape[1]):
            column = dictionary[:, n]
            pivot = column[np.flatnonzero(np.abs(column) > 1e-12)[0]]
            dictionary[:, n] = column / pivot
        report["domain_dictionary"] = {"labels": [f.label for f in model.dictionary], "coords": dictionary}
    report["tables"] = {"D_F": _domain_table(basis.labels, domain)}
    return report
