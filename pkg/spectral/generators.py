"""
Генераторы тестовых данных: пучки с заданными кратностями Смита,
положительные пучки Q^⋆Q, случайные подпространства и оракул числа вращения det.
"""

import logging

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.stats import unitary_group

from .extension_calculus import DomainSubspace
from .pencil_core import MatrixPolynomial
from .series import matrix_series_mul

logger = logging.getLogger(__name__)

# Масштаб линейных возмущений E(σ), F(σ)
PERTURBATION = 0.1


def _unit_matrix(rng, d):
    M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return M / np.linalg.norm(M, 2)


def _unimodular_factor(rng, d, sigma0):
    """Q + 0.1·(σ − σ_0)·E_1 с унитарной Q и ‖E_1‖ = 1: обратим при |σ − σ_0| < 10."""
    Q = unitary_group.rvs(d, random_state=rng) if d > 1 else np.array([[np.exp(2j * np.pi * rng.random())]])
    E1 = _unit_matrix(rng, d)
    return np.stack([Q - PERTURBATION * sigma0 * E1, PERTURBATION * E1])


def engineered_pencil(rng, d, mults, sigma0):
    """
    E(σ)·diag((σ − σ_0)^{μ_j})·F(σ) с известными частными кратностями.

    Args:
        rng (np.random.Generator): Генератор
        d (int): Размерность
        mults (list[int]): Показатели μ_j ≥ 0, не более d штук
        sigma0 (complex): Точка спектра

    Returns:
        tuple[MatrixPolynomial, list[int]]: Пучок и ненулевые кратности по убыванию
    """
    powers = list(mults) + [0] * (d - len(mults))
    top = max(powers)
    diag = np.zeros((top + 1, d, d), dtype=complex)
    for j, mu in enumerate(powers):
        diag[:mu + 1, j, j] = npoly.polyfromroots([sigma0] * mu) if mu else [1.0]
    E = _unimodular_factor(rng, d, sigma0)
    F = _unimodular_factor(rng, d, sigma0)
    middle = matrix_series_mul(E, diag, top + 1)
    coeffs = matrix_series_mul(middle, F, top + 2)
    expected = sorted((mu for mu in powers if mu), reverse=True)
    return MatrixPolynomial(coeffs), expected


def random_engineered(rng, max_d=4, max_mu=3, sigma0=None):
    """Случайный пучок: d ≤ max_d, μ_j ≤ max_mu, хотя бы одно μ_j ≥ 1."""
    d = int(rng.integers(1, max_d + 1))
    mults = [int(m) for m in rng.integers(0, max_mu + 1, size=int(rng.integers(1, d + 1)))]
    if not any(mults):
        mults[0] = 1
    if sigma0 is None:
        sigma0 = complex(rng.uniform(-1, 1), rng.uniform(-0.4, 0.4))
    return engineered_pencil(rng, d, mults, sigma0) + (sigma0,)


def positive_pencil(rng, d, mults, sigma0=0.0):
    """
    P = Q^⋆Q, где Q есть пучок с кратностями mults в вещественной точке σ_0.

    P̂(σ) = Q(σ̄)^H·Q(σ) симметричен и неотрицателен на вещественной оси.
    """
    Q, _ = engineered_pencil(rng, d, mults, float(np.real(sigma0)))
    Q_star = Q.adjoint()
    degree = 2 * Q.degree
    return MatrixPolynomial(matrix_series_mul(Q_star.coeffs, Q.coeffs, degree))


def random_subspace(labels, dim, rng):
    """Случайное подпространство размерности dim в координатах базиса labels."""
    n = len(labels)
    coords = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return DomainSubspace(labels, coords)


def winding_number(P, center, radius=0.5, nodes=512):
    """Число нулей det P̂ внутри окружности: приращение аргумента с разворачиванием фазы."""
    angles = 2 * np.pi * np.arange(nodes + 1) / nodes
    values = np.array([np.linalg.det(P.evaluate(center + radius * np.exp(1j * a))) for a in angles])
    phase = np.unwrap(np.angle(values))
    count = int(round((phase[-1] - phase[0]) / (2 * np.pi)))
    logger.debug(f"Число вращения det вокруг {center:.6g}: {count}")
    return count
