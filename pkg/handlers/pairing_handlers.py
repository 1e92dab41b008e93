import logging

import numpy as np

from spectral.chain_cache import cache_scope
from spectral.errors import ModelFormatError
from spectral.extension_calculus import build_extended_basis, dictionary_matrix, dual_extended_basis
from spectral.mellin_numeric import green_pairing_direct
from spectral.pairing_engine import contour_gram, label_text, nondegeneracy_check, pairing_gram
from spectral.pencil_core import formal_adjoint, symmetry_check

from .report_utils import ROUTE_CLOSED, ROUTE_CONTOUR, ROUTE_XSPACE, base_report, matrix_rows

logger = logging.getLogger(__name__)

# Допуски сравнения маршрутов
CONTOUR_AGREEMENT = 1e-8
XSPACE_AGREEMENT = 1e-6


def model_bases(model, tol, dual=True):
    """
    Базис E(A) и базис E(A^⋆).

    dual=False для симметричной модели возвращает тот же базис E(A) во второй позиции,
    чтобы подпространства E(A) и E(A^⋆) сравнивались в одних координатах.
    """
    with cache_scope(model.label or "default") as cache:
        basis = build_extended_basis(model, tol, cache=cache)
    if not dual and symmetry_check(model, tol):
        return basis, basis
    return basis, dual_extended_basis(model, basis, tol)


def dictionary_gram(model, gram, basis, basis_star, tol, profile=None):
    """Матрица Грама в координатах словаря: T^T·G·conj(T^⋆)."""
    T = dictionary_matrix(model, basis, tol, profile)
    T_star = dictionary_matrix(formal_adjoint(model), basis_star, tol, profile)
    return T.T @ gram.G @ np.conj(T_star), T, T_star


def pairing_report(model, tol, workers, route=ROUTE_CLOSED, csv_path=None):
    """Матрица Грама [Ψ_α, Ψ^⋆_β]_A выбранным маршрутом и проверка невырожденности."""
    basis, basis_star = model_bases(model, tol)
    if route == ROUTE_CONTOUR:
        gram = contour_gram(model, basis, basis_star, tol=tol, workers=workers)
    else:
        gram = pairing_gram(model, basis, basis_star, tol, workers)
    report = base_report("pairing", tol, model)
    report["route"] = gram.route
    report["gram"] = gram.to_json()
    report["nondegenerate"] = nondegeneracy_check(gram, tol=tol)
    tables = {"Матрица Грама": ([""] + [label_text(c) for c in gram.cols], matrix_rows([label_text(r) for r in gram.rows], gram.G))}
    if model.dictionary:
        G_dict, _, _ = dictionary_gram(model, gram, basis, basis_star, tol)
        labels = [f.label for f in model.dictionary]
        report["gram_dictionary"] = {"labels": labels, "G": G_dict, "route": gram.route}
        tables["В координатах словаря"] = ([""] + labels, matrix_rows(labels, G_dict))
    report["tables"] = tables
    if csv_path:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(gram.to_csv())
        logger.info(f"Матрица Грама записана в {csv_path}")
    return report


def three_routes(model, tol, workers, profile=None, radius=0.5, n_nodes=256):
    """
    Значения [u, v]_A для всех пар функций словаря тремя маршрутами.

    Returns:
        dict: Матрицы closed-form, contour и x-space в координатах словаря

    Raises:
        ModelFormatError: Если у модели нет словаря
    """
    if not model.dictionary:
        raise ModelFormatError(f"у модели {model.label} нет словаря функций для проверки")
    basis, basis_star = model_bases(model, tol)
    closed = pairing_gram(model, basis, basis_star, tol, workers)
    contour = contour_gram(model, basis, basis_star, radius=radius, tol=tol, n_nodes=n_nodes, workers=workers)
    G_closed, T, T_star = dictionary_gram(model, closed, basis, basis_star, tol, profile)
    G_contour = T.T @ contour.G @ np.conj(T_star)
    functions = model.dictionary
    G_direct = np.array([[green_pairing_direct(model, u, v, profile, tol) for v in functions] for u in functions])
    return {ROUTE_CLOSED: G_closed, ROUTE_CONTOUR: G_contour, ROUTE_XSPACE: G_direct}


def verify_report(model, tol, workers, profile=None):
    """Сравнение маршрутов closed-form, contour и x-space по всем парам словаря."""
    values = three_routes(model, tol, workers, profile)
    labels = [f.label for f in model.dictionary]
    closed = values[ROUTE_CLOSED]
    delta_contour = float(np.max(np.abs(closed - values[ROUTE_CONTOUR])))
    delta_direct = float(np.max(np.abs(closed - values[ROUTE_XSPACE])))
    entries = []
    rows = []
    for a, u in enumerate(labels):
        for b, v in enumerate(labels):
            entry = {"u": u, "v": v}
            for route, matrix in values.items():
                entry[route] = matrix[a, b]
            entries.append(entry)
            rows.append([u, v] + [f"{matrix[a, b]:.12g}" for matrix in values.values()])
    report = base_report("verify", tol, model)
    report["entries"] = entries
    report["delta_contour"] = delta_contour
    report["delta_x_space"] = delta_direct
    report["agree"] = delta_contour < CONTOUR_AGREEMENT and delta_direct < XSPACE_AGREEMENT
    report["tables"] = {"Маршруты": (["u", "v"] + list(values), rows)}
    logger.info(f"Проверка {model.label}: Δcontour = {delta_contour:.3e}, Δx-space = {delta_direct:.3e}")
    return report
