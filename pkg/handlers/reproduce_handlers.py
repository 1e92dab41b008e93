"""
Набор воспроизводимых проверок на примерах модельных операторов:
матрицы Грама, три маршрута вычисления спаривания, самосопряжённые семейства,
области Фридрихса, оракулы кратностей и невырожденность.
"""

import logging
import math
import os
import time
from contextlib import contextmanager
from dataclasses import replace

import numpy as np

from config import MODELS_DIR
from spectral import pairing_engine
from spectral.errors import OddMultiplicity
from spectral.extension_calculus import (
    DomainSubspace, adjoint_domain, dictionary_matrix, friedrichs_domain, half_domain, is_selfadjoint, local_block,
    point_basis, relative_index, saturation_check, sigma_action, strip_spectrum,
)
from spectral.generators import positive_pencil, random_engineered, random_subspace, winding_number
from spectral.local_chains import singular_chains
from spectral.mellin_numeric import CutoffProfile, ModelFunction
from spectral.model_io import load_model
from spectral.pairing_engine import nondegeneracy_check, pairing_gram
from spectral.pencil_core import formal_adjoint

from .pairing_handlers import dictionary_gram, model_bases, three_routes
from .report_utils import ROUTE_CLOSED, ROUTE_CONTOUR, ROUTE_XSPACE, base_report

logger = logging.getLogger(__name__)

ZOO = ("cex1_a2", "cex1_a06", "beta_plus", "beta_minus_b05", "alpha_perturbed", "alpha_frozen")
SAMPLED_LAMBDAS = (0.0, 0.5, 1.0, 1.234, 2.0, 2.5, 3.0, 4.0)


def bundled(name):
    return load_model(os.path.join(MODELS_DIR, f"{name}.json"))


@contextmanager
def phase_mutation(phase=-1j):
    """Подмена нормировочной фазы спаривания (проверка чувствительности набора)."""
    original = pairing_engine.PAIRING_PHASE
    pairing_engine.PAIRING_PHASE = phase
    try:
        yield
    finally:
        pairing_engine.PAIRING_PHASE = original


def _max_abs(matrix):
    return float(np.max(np.abs(matrix))) if np.size(matrix) else 0.0


def _dictionary_domain(T, columns, labels):
    return DomainSubspace(labels, T @ np.asarray(columns, dtype=complex).reshape(T.shape[1], -1))


def check_cex1_gram(ctx):
    model = bundled("cex1_a2")
    basis, basis_star = model_bases(model, ctx["tol"])
    gram = pairing_gram(model, basis, basis_star, ctx["tol"], ctx["workers"])
    G, _, _ = dictionary_gram(model, gram, basis, basis_star, ctx["tol"])
    delta = _max_abs(G - 1j * np.array([[0, 1], [1, 0]]))
    return delta < 1e-10, {"delta": delta, "G": G}


def check_three_routes(ctx):
    details = {}
    passed = True
    for name in ("cex1_a2", "beta_minus_b05", "beta_plus"):
        values = three_routes(bundled(name), ctx["tol"], ctx["workers"])
        d_contour = _max_abs(values[ROUTE_CLOSED] - values[ROUTE_CONTOUR])
        d_direct = _max_abs(values[ROUTE_CLOSED] - values[ROUTE_XSPACE])
        details[name] = {"delta_contour": d_contour, "delta_x_space": d_direct}
        passed &= d_contour < 1e-8 and d_direct < 1e-6
    return passed, details


def check_beta_minus(ctx):
    tol = ctx["tol"]
    model = bundled("beta_minus_b05")
    basis, same = model_bases(model, tol, dual=False)
    gram = pairing_gram(model, basis, same, tol, ctx["workers"])
    G, T, _ = dictionary_gram(model, gram, basis, same, tol)
    delta = _max_abs(G - np.diag([1j, -1j]))
    family = [is_selfadjoint(_dictionary_domain(T, [1, np.exp(1j * lam)], basis.labels), gram, tol) for lam in (0.0, math.pi / 2, 1.234)]
    wrong = is_selfadjoint(_dictionary_domain(T, [1, 2], basis.labels), gram, tol)
    return delta < 1e-10 and all(family) and not wrong, {"delta": delta, "family": family, "span(1,2)": wrong}


def check_cex1_family(ctx):
    tol = ctx["tol"]
    model = bundled("cex1_a2")
    basis, same = model_bases(model, tol, dual=False)
    gram = pairing_gram(model, basis, same, tol, ctx["workers"])
    _, T, _ = dictionary_gram(model, gram, basis, same, tol)
    verdicts = []
    for lam in SAMPLED_LAMBDAS:
        e = np.exp(1j * lam)
        verdicts.append(is_selfadjoint(_dictionary_domain(T, [e + 1, e - 1], basis.labels), gram, tol))
    friedrichs = friedrichs_domain(model, basis, tol)
    member = _dictionary_domain(T, [2, 0], basis.labels)
    same_domain = friedrichs.equals(member, tol)
    return all(verdicts) and same_domain, {"family": verdicts, "friedrichs_is_lambda0": same_domain}


def check_friedrichs_below_axis(ctx):
    tol = ctx["tol"]
    model = bundled("cex1_a06")
    basis, same = model_bases(model, tol, dual=False)
    gram = pairing_gram(model, basis, same, tol, ctx["workers"])
    domain = friedrichs_domain(model, basis, tol)
    # ω·e_1: срезка в направлении ядра P̂_0(0)
    omega = replace(model, dictionary=(ModelFunction.power_log(0, label="ω e₁", direction=(1, 0)),))
    expected = np.hstack([
        dictionary_matrix(omega, basis, tol),
        local_block(basis, next(p.sigma0 for p in basis.points if p.sigma0.imag < -0.5)).coords,
    ])
    details = {
        "dim": domain.dim,
        "selfadjoint": is_selfadjoint(domain, gram, tol),
        "saturated": saturation_check(domain, sigma_action(basis, tol), tol),
        "matches": domain.equals(DomainSubspace(basis.labels, expected), tol),
    }
    return details["dim"] == 2 and details["selfadjoint"] and details["saturated"] and details["matches"], details


def _engineered_family(ctx, count=100):
    rng = np.random.default_rng(ctx["seed"])
    return [random_engineered(rng) for _ in range(count)]


def check_multiplicity_oracle(ctx):
    failures = 0
    for P, expected, sigma0 in _engineered_family(ctx):
        basis = singular_chains(P, sigma0, ctx["tol"])
        if list(basis.mults) != expected or sum(basis.mults) != winding_number(P, sigma0):
            failures += 1
    return failures == 0, {"failures": failures, "samples": 100}


def check_adjoint_multiplicities(ctx):
    tol = ctx["tol"]
    failures = 0
    for P, _, sigma0 in _engineered_family(ctx):
        mults = sorted(singular_chains(P, sigma0, tol).mults, reverse=True)
        mults_star = sorted(singular_chains(P.adjoint(), np.conj(sigma0), tol).mults, reverse=True)
        if mults != mults_star:
            failures += 1
    return failures == 0, {"failures": failures, "samples": 100}


def check_even_multiplicities(ctx):
    tol = ctx["tol"]
    rng = np.random.default_rng(ctx["seed"] + 1)
    odd = 0
    for _ in range(50):
        d = int(rng.integers(1, 4))
        mults = [int(m) for m in rng.integers(1, 3, size=int(rng.integers(1, d + 1)))]
        sigma0 = complex(rng.uniform(-0.5, 0.5))
        chains = singular_chains(positive_pencil(rng, d, mults, sigma0.real), sigma0, tol)
        try:
            half = half_domain(None, sigma0, point_basis(chains), tol)
        except OddMultiplicity:
            odd += 1
            continue
        if 2 * half.dim != sum(chains.mults):
            odd += 1
    return odd == 0, {"odd": odd, "samples": 50}


def check_nondegeneracy(ctx):
    tol = ctx["tol"]
    rng = np.random.default_rng(ctx["seed"] + 2)
    details = {}
    passed = True
    for name in ZOO:
        model = bundled(name)
        basis, basis_star = model_bases(model, tol)
        gram = pairing_gram(model, basis, basis_star, tol, ctx["workers"])
        healthy = nondegeneracy_check(gram, tol=tol)
        involution = True
        reverse = gram.reversed()
        for _ in range(50):
            D = random_subspace(basis.labels, int(rng.integers(0, basis.dim + 1)), rng)
            involution &= adjoint_domain(adjoint_domain(D, gram, tol), reverse, tol).equals(D, tol)
        details[name] = {"nondegenerate": healthy, "involution": involution}
        passed &= healthy and involution
    return passed, details


def check_half_orthogonality(ctx):
    tol = ctx["tol"]
    details = {}
    worst = 0.0
    for name in ZOO:
        model = bundled(name)
        adjoint = formal_adjoint(model)
        basis, basis_star = model_bases(model, tol)
        gram = pairing_gram(model, basis, basis_star, tol, ctx["workers"])
        for point in basis.points:
            if abs(point.sigma0.imag) > tol.tol_edge:
                continue
            try:
                H = half_domain(model, point.sigma0, basis, tol).coords
                H_star = half_domain(adjoint, point.sigma0, basis_star, tol).coords
            except OddMultiplicity:
                continue
            value = _max_abs(H.T @ gram.G @ np.conj(H_star))
            details[f"{name}@{point.sigma0.real:g}"] = value
            worst = max(worst, value)
    return worst < 1e-10, details


def check_index(ctx):
    tol = ctx["tol"]
    shifted = bundled("shifted")
    empty = strip_spectrum(shifted, tol).dim
    model = bundled("cex1_a2")
    basis, _ = model_bases(model, tol, dual=False)
    index = relative_index(DomainSubspace.zero(basis.labels), DomainSubspace.full(basis.labels))
    rng = np.random.default_rng(ctx["seed"] + 3)
    wide = model_bases(bundled("cex1_a06"), tol, dual=False)[0]
    additive = True
    for _ in range(20):
        k1, k2, k3 = sorted(int(k) for k in rng.integers(0, wide.dim + 1, size=3))
        coords = rng.standard_normal((wide.dim, k3)) + 1j * rng.standard_normal((wide.dim, k3))
        D1, D2, D3 = (DomainSubspace(wide.labels, coords[:, :k]) for k in (k1, k2, k3))
        additive &= relative_index(D1, D2) + relative_index(D2, D3) == relative_index(D1, D3)
    return empty == 0 and index == 2 and additive, {"dim_E_shifted": empty, "index_cex1": index, "additive": additive}


def check_cutoff_independence(ctx):
    tol = ctx["tol"]
    worst = 0.0
    for name in ("cex1_a2", "beta_minus_b05"):
        model = bundled(name)
        base = three_routes(model, tol, ctx["workers"], CutoffProfile(0.25, 0.75))
        moved = three_routes(model, tol, ctx["workers"], CutoffProfile(0.1, 0.5))
        for route in base:
            worst = max(worst, _max_abs(base[route] - moved[route]))
    return worst < 1e-8, {"max_shift": worst}


CRITERIA = (
    ("cex1-gram", check_cex1_gram),
    ("three-routes", check_three_routes),
    ("beta-minus", check_beta_minus),
    ("cex1-family", check_cex1_family),
    ("friedrichs-below-axis", check_friedrichs_below_axis),
    ("multiplicity-oracle", check_multiplicity_oracle),
    ("adjoint-multiplicities", check_adjoint_multiplicities),
    ("even-multiplicities", check_even_multiplicities),
    ("nondegeneracy", check_nondegeneracy),
    ("half-orthogonality", check_half_orthogonality),
    ("index", check_index),
    ("cutoff-independence", check_cutoff_independence),
)


def run_suite(tol, workers, seed=0, only=None):
    """
    Выполнить все проверки; ошибка внутри проверки считается провалом.

    Returns:
        dict: Отчёт с полем passed и таблицей результатов
    """
    ctx = {"tol": tol, "workers": workers, "seed": seed}
    results = []
    for name, check in CRITERIA:
        if only and name not in only:
            continue
        started = time.perf_counter()
        try:
            passed, details = check(ctx)
        except Exception as e:
            logger.error(f"Проверка {name} завершилась ошибкой: {e}")
            passed, details = False, {"error": f"{type(e).__name__}: {e}"}
        elapsed = time.perf_counter() - started
        logger.info(f"{name}: {'PASS' if passed else 'FAIL'} за {elapsed:.2f} с")
        results.append({"criterion": name, "status": "PASS" if passed else "FAIL", "details": details})
    report = base_report("reproduce-paper", tol)
    report["seed"] = seed
    report["results"] = results
    report["passed"] = all(r["status"] == "PASS" for r in results)
    report["tables"] = {"Результаты": (["criterion", "status"], [[r["criterion"], r["status"]] for r in results])}
    return report
