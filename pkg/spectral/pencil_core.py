"""
Матричные многочлены (конормальные символы), модели конических операторов
и глобальный граничный спектр.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.special import comb

from config import DEFAULT_TOLERANCES
from .errors import ModelFormatError, NotSymmetric, RootOnBoundary
from .series import multiplicities_from_counts, toeplitz_kernel_counts

logger = logging.getLogger(__name__)

# Обусловленность старшего коэффициента P̂_0, при которой модель отвергается
LEADING_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """P̂(σ) = Σ_k A_k σ^k; coeffs имеет форму (m+1, d, d)."""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim == 1:
            coeffs = coeffs.reshape(-1, 1, 1)
        if coeffs.ndim != 3 or coeffs.shape[1] != coeffs.shape[2] or coeffs.shape[0] == 0:
            raise ModelFormatError(f"ожидался массив (m+1, d, d), получено {coeffs.shape}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def scalar(cls, coeffs):
        """Скалярный многочлен по коэффициентам a_0, a_1, ... при степенях σ."""
        return cls(np.asarray(coeffs, dtype=complex).reshape(-1, 1, 1))

    @classmethod
    def zero(cls, d):
        return cls(np.zeros((1, d, d), dtype=complex))

    @property
    def dim(self):
        return self.coeffs.shape[1]

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    @property
    def leading(self):
        return self.coeffs[-1]

    def evaluate(self, sigma):
        """Схема Горнера."""
        out = self.coeffs[-1].copy()
        for a in self.coeffs[-2::-1]:
            out = out * sigma + a
        return out

    __call__ = evaluate

    def taylor_at(self, sigma0, count=None):
        """Коэффициенты C_q = Σ_k A_k C(k, q) σ_0^{k−q}, q = 0..count−1."""
        m = self.degree
        count = m + 1 if count is None else count
        out = np.zeros((count, self.dim, self.dim), dtype=complex)
        for q in range(min(count, m + 1)):
            for k in range(q, m + 1):
                out[q] += self.coeffs[k] * (comb(k, q, exact=True) * sigma0 ** (k - q))
        return out

    def scale_at(self, sigma0):
        """Масштаб рангового порога в σ_0: max(1, Σ_k ‖A_k‖·|σ_0|^k)."""
        r = abs(complex(sigma0))
        total = sum(float(np.linalg.norm(a, 2)) * r ** k for k, a in enumerate(self.coeffs))
        return max(1.0, total)

    def shifted(self, delta):
        """Многочлен σ ↦ P̂(σ + δ)."""
        return MatrixPolynomial(self.taylor_at(delta))

    def adjoint(self):
        """σ ↦ P̂(σ̄)^H, то есть коэффициенты A_j^H."""
        return MatrixPolynomial(np.conj(np.transpose(self.coeffs, (0, 2, 1))))

    def conjugated(self, left, right):
        """E·P̂·F для постоянных матриц."""
        return MatrixPolynomial(np.einsum("ij,kjl,lm->kim", left, self.coeffs, right))

    def padded(self, degree):
        if degree <= self.degree:
            return self.coeffs
        extra = np.zeros((degree - self.degree, self.dim, self.dim), dtype=complex)
        return np.concatenate([self.coeffs, extra])

    def is_zero(self, tol=0.0):
        return float(np.max(np.abs(self.coeffs))) <= tol

    def allclose(self, other, tol):
        degree = max(self.degree, other.degree)
        return bool(np.max(np.abs(self.padded(degree) - other.padded(degree))) <= tol)

    def to_json(self):
        return {
            "degree": self.degree,
            "coeffs": [[[[z.real, z.imag] for z in row] for row in a] for a in self.coeffs],
        }


@dataclass(frozen=True, eq=False)
class ConeModel:
    """
    Модель A = x^{−ν} Σ_k x^k P_k: вес ν и индициальное семейство [P̂_0, …, P̂_{N−1}].

    placement: "right" означает P_k(xD_x)·x^k, "left" означает x^k·P_k(xD_x).
    dictionary: необязательный набор ModelFunction для отчётов в координатах примеров.
    """

    nu: float
    indicial: tuple
    label: str = ""
    placement: str = "right"
    symmetric: Optional[bool] = None
    dictionary: Optional[tuple] = None

    def __post_init__(self):
        indicial = tuple(self.indicial)
        object.__setattr__(self, "indicial", indicial)
        if not self.nu > 0:
            raise ModelFormatError(f"nu: ожидалось положительное число, получено {self.nu}")
        if len(indicial) != self.N:
            raise ModelFormatError(
                f"indicial: ожидалось {self.N} многочленов для nu={self.nu}, получено {len(indicial)}"
            )
        dims = {p.dim for p in indicial}
        if len(dims) != 1:
            raise ModelFormatError(f"indicial: разные размерности {sorted(dims)}")
        if self.placement not in ("right", "left"):
            raise ModelFormatError(f"placement: неизвестное значение {self.placement!r}")
        cond = np.linalg.cond(indicial[0].leading)
        if not np.isfinite(cond) or cond > LEADING_COND_LIMIT:
            raise ModelFormatError("indicial[0]: старший коэффициент P̂_0 вырожден")

    @property
    def N(self):
        return max(1, math.ceil(self.nu))

    @property
    def d(self):
        return self.indicial[0].dim

    @property
    def p0(self):
        return self.indicial[0]

    def effective(self, k):
        """Многочлен R_k с x^k-членом, записанным как R_k(xD_x)·x^k."""
        if k >= len(self.indicial):
            return MatrixPolynomial.zero(self.d)
        poly = self.indicial[k]
        if self.placement == "left" and k:
            return poly.shifted(1j * k)
        return poly

    def with_indicial(self, indicial, **changes):
        return replace(self, indicial=tuple(indicial), **changes)

    def to_json(self):
        return {
            "nu": self.nu,
            "d": self.d,
            "label": self.label,
            "placement": self.placement,
            "indicial": [p.to_json() for p in self.indicial],
        }


@dataclass(frozen=True)
class SpectralPoint:
    sigma0: complex
    algebraic_mult: int
    partial_mults: tuple = field(default=())

    def with_mults(self, mults):
        return replace(self, partial_mults=tuple(int(m) for m in mults))


def eval(P, sigma):  # noqa: A001
    """Значение P̂(σ) по схеме Горнера."""
    return P.evaluate(sigma)


def companion_eigenvalues(P):
    """
    Собственные значения сопровождающей линеаризации матричного многочлена.

    Returns:
        np.ndarray: Конечные корни det P̂ с учётом кратности
    """
    m, d = P.degree, P.dim
    if m == 0:
        return np.zeros(0, dtype=complex)
    eye = np.eye(d * (m - 1))
    C = np.block([
        [np.zeros((d * (m - 1), d)), eye],
        [-np.hstack(list(P.coeffs[:-1]))],
    ]) if m > 1 else -P.coeffs[0]
    D = np.block([
        [eye, np.zeros((d * (m - 1), d))],
        [np.zeros((d, d * (m - 1))), P.coeffs[-1]],
    ]) if m > 1 else P.coeffs[1]
    values = linalg.eig(C, D, right=False)
    return values[np.isfinite(values)]


def local_multiplicity(P, sigma0, tol=DEFAULT_TOLERANCES):
    """Порядок нуля det P̂ в σ_0 по рангам блочно-тёплицевых матриц."""
    counts = toeplitz_kernel_counts(
        P.taylor_at(sigma0), tol.tol_rank, P.degree * P.dim + 1, scale=P.scale_at(sigma0),
    )
    return sum(multiplicities_from_counts(counts))


def _spectral_key(sigma):
    return (-round(sigma.imag, 12), round(sigma.real, 12))


def cluster_roots(roots, P, tol=DEFAULT_TOLERANCES):
    """
    Сгруппировать корни в точки спектра.

    Первый этап: одиночная связь с порогом tol_cluster·max(1, |σ|).
    Второй этап объединяет группы в пределах merge_radius, только если
    локальная кратность в общем центре равна суммарному числу корней.

    Returns:
        list[tuple[complex, int]]: Центры и кратности
    """
    roots = sorted((complex(r) for r in roots), key=lambda z: (z.real, z.imag))
    groups = []
    for r in roots:
        for g in groups:
            if any(abs(r - q) <= tol.tol_cluster * max(1.0, abs(q)) for q in g):
                g.append(r)
                break
        else:
            groups.append([r])
    merged = True
    while merged:
        merged = False
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                ca, cb = np.mean(groups[a]), np.mean(groups[b])
                if abs(ca - cb) > tol.merge_radius * max(1.0, abs(ca)):
                    continue
                union = groups[a] + groups[b]
                center = complex(np.mean(union))
                if local_multiplicity(P, center, tol) == len(union):
                    logger.debug(f"Объединены кластеры {ca:.6g} и {cb:.6g}")
                    groups[a] = union
                    del groups[b]
                    merged = True
                    break
            if merged:
                break
    return [(complex(np.mean(g)), len(g)) for g in groups]


def boundary_spectrum(model, strip, tol=DEFAULT_TOLERANCES):
    """
    Корни det P̂_0 в полосе im_lo < Im σ < im_hi.

    Args:
        model (ConeModel): Модель
        strip (tuple[float, float]): Границы (im_lo, im_hi)
        tol (Tolerances): Допуски

    Returns:
        list[SpectralPoint]: По убыванию Im σ, затем по возрастанию Re σ

    Raises:
        RootOnBoundary: Если корень ближе tol_edge к границе полосы
    """
    im_lo, im_hi = strip
    P = model.p0
    points = []
    for center, mult in cluster_roots(companion_eigenvalues(P), P, tol):
        for edge in (im_lo, im_hi):
            if abs(center.imag - edge) < tol.tol_edge:
                raise RootOnBoundary(f"корень {center:.6g} лежит на прямой Im σ = {edge:g}")
        if im_lo < center.imag < im_hi:
            points.append(SpectralPoint(center, mult))
    points.sort(key=lambda p: _spectral_key(p.sigma0))
    logger.debug(f"Спектр в полосе ({im_lo:g}, {im_hi:g}): {[p.sigma0 for p in points]}")
    return points


def formal_adjoint(model):
    """Формально сопряжённая модель: B_j = A_j^H, расположение x^k меняется на противоположное."""
    label = model.label[:-1] if model.label.endswith("⋆") else model.label + "⋆"
    return ConeModel(
        nu=model.nu,
        indicial=tuple(p.adjoint() for p in model.indicial),
        label=label,
        placement="left" if model.placement == "right" else "right",
        symmetric=model.symmetric,
        dictionary=model.dictionary,
    )


def symmetry_check(model, tol=DEFAULT_TOLERANCES):
    """Совпадает ли модель с формально сопряжённой (в правом расположении) с точностью tol_sym."""
    adjoint = formal_adjoint(model)
    verdict = all(
        model.effective(k).allclose(adjoint.effective(k), tol.tol_sym)
        for k in range(model.N)
    )
    if model.symmetric is not None and model.symmetric != verdict:
        logger.warning(f"Модель {model.label}: заявленная симметрия {model.symmetric}, вычислено {verdict}")
    return verdict


def positivity_check(model, n_samples=401, radius=20.0, tol=DEFAULT_TOLERANCES):
    """
    Проверка неотрицательности P̂_0(σ) на вещественной оси.

    Raises:
        NotSymmetric: Если модель не симметрична
    """
    if not symmetry_check(model, tol):
        raise NotSymmetric(f"модель {model.label} не симметрична")
    lowest = math.inf
    for sigma in np.linspace(-radius, radius, n_samples):
        value = model.p0.evaluate(sigma)
        lowest = min(lowest, float(linalg.eigvalsh((value + value.conj().T) / 2)[0]))
    logger.debug(f"Минимальное собственное значение P̂_0 на [−{radius}, {radius}]: {lowest:.3e}")
    return lowest >= -tol.tol_pos
