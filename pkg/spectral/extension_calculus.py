"""
Глобальная теория расширений: E(A) = D_max/D_min, рекурсия сдвигов полюсов,
решётка областей (сопряжение, самосопряжённость, насыщение, Фридрихс)
и устойчивость областей.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from config import DEFAULT_TOLERANCES
from .errors import (
    DegeneratePairing, ModelFormatError, NotInvariant, NotPositive, NotRealPoint, NotSymmetric,
    OddMultiplicity, ShiftCollision, UnequalDeficiency,
)
from .local_chains import (
    DEFAULT_MIN_TRUNCATION, adjoint_chains, partial_multiplicities, reduce_germ, singular_chains,
)
from .mellin_numeric import mellin_germ
from .pencil_core import SpectralPoint, boundary_spectrum, formal_adjoint, positivity_check, symmetry_check
from .series import LaurentGerm, apply_series, laurent_inverse, taylor_inverse

logger = logging.getLogger(__name__)

# Совпадение сдвинутой точки с точкой спектра считается точным в этих пределах
EXACT_SHIFT = 1e-12


@dataclass(frozen=True)
class StripSpectrum:
    nu: float
    Sigma: tuple
    SigmaPrime: tuple
    N: dict

    @property
    def dim(self):
        return sum(p.algebraic_mult for p in self.Sigma)


@dataclass(frozen=True, eq=False)
class ExtendedBasisElement:
    """Ψ_{σ_0,j,ℓ}; parts[ϑ] содержит главную часть в точке σ_0 − iϑ, ϑ = 0..N(σ_0)."""

    sigma0: complex
    j: int
    l: int
    parts: tuple

    @property
    def label(self):
        return (self.sigma0, self.j, self.l)


@dataclass(frozen=True, eq=False)
class ExtendedBasis:
    model: object
    points: tuple
    elements: tuple
    chains: dict = field(default_factory=dict)

    @property
    def labels(self):
        return [e.label for e in self.elements]

    @property
    def dim(self):
        return len(self.elements)

    def index(self, label):
        sigma0, j, ell = label
        for n, e in enumerate(self.elements):
            if abs(e.sigma0 - sigma0) <= 1e-9 * max(1.0, abs(sigma0)) and e.j == j and e.l == ell:
                return n
        raise KeyError(label)

    def point_indices(self, sigma0):
        return [n for n, e in enumerate(self.elements) if e.sigma0 == sigma0]


@dataclass(frozen=True, eq=False)
class DomainSubspace:
    """Подпространство Ê(A) в координатах базиса Ψ; столбцы coords ортонормированы."""

    basis_labels: tuple
    coords: np.ndarray

    def __post_init__(self):
        labels = tuple(self.basis_labels)
        coords = np.asarray(self.coords, dtype=complex).reshape(len(labels), -1)
        object.__setattr__(self, "basis_labels", labels)
        object.__setattr__(self, "coords", _orthonormal_columns(coords))

    @classmethod
    def zero(cls, labels):
        return cls(labels, np.zeros((len(labels), 0)))

    @classmethod
    def full(cls, labels):
        return cls(labels, np.eye(len(labels)))

    @property
    def dim(self):
        return self.coords.shape[1]

    def contains(self, vectors, tol=DEFAULT_TOLERANCES):
        """Лежат ли столбцы vectors в подпространстве (относительная невязка tol_angle)."""
        vectors = np.asarray(vectors, dtype=complex).reshape(len(self.basis_labels), -1)
        if vectors.shape[1] == 0:
            return True
        Q = self.coords
        residual = vectors - Q @ (Q.conj().T @ vectors)
        scale = max(1.0, float(np.linalg.norm(vectors)))
        return float(np.linalg.norm(residual)) <= tol.tol_angle * scale

    def equals(self, other, tol=DEFAULT_TOLERANCES):
        """Равенство подпространств по главным углам (порог tol_angle)."""
        if self.dim != other.dim:
            return False
        if self.dim == 0:
            return True
        angles = linalg.subspace_angles(self.coords, other.coords)
        return float(np.max(angles)) < tol.tol_angle

    def to_json(self):
        return {
            "basis_labels": [[[s.real, s.imag], j, ell] for s, j, ell in self.basis_labels],
            "dim": self.dim,
            "coords": [[[z.real, z.imag] for z in row] for row in self.coords],
        }

    @classmethod
    def from_json(cls, doc):
        try:
            labels = [(complex(s[0], s[1]), int(j), int(ell)) for s, j, ell in doc["basis_labels"]]
            coords = np.array(
                [[complex(z[0], z[1]) for z in row] for row in doc["coords"]], dtype=complex
            ).reshape(len(labels), -1)
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise ModelFormatError(f"область: неверный формат ({e})") from e
        return cls(labels, coords)


def _orthonormal_columns(coords, rel=1e-10):
    if coords.shape[1] == 0:
        return coords
    Q, R, _ = linalg.qr(coords, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if not diag.size or diag[0] == 0:
        return np.zeros((coords.shape[0], 0), dtype=complex)
    rank = int(np.sum(diag > rel * diag[0]))
    return Q[:, :rank]


def _shift_depth(sigma0, nu, tol):
    return max(0, math.ceil(sigma0.imag + nu / 2 - tol.tol_edge) - 1)


def strip_spectrum(model, tol=DEFAULT_TOLERANCES):
    """
    Σ(A), Σ′(A) и глубины N(σ_0) в полосе −ν/2 < Im σ < ν/2.

    Raises:
        RootOnBoundary: Если корень лежит на прямой Im σ = ±ν/2
    """
    points = boundary_spectrum(model, (-model.nu / 2, model.nu / 2), tol)
    points = tuple(p.with_mults(partial_multiplicities(model.p0, p.sigma0, tol)) for p in points)
    depths = {p.sigma0: _shift_depth(p.sigma0, model.nu, tol) for p in points}
    shifted = sorted(
        {p.sigma0 - 1j * t for p in points for t in range(depths[p.sigma0] + 1)},
        key=lambda z: (-z.imag, z.real),
    )
    logger.info(f"Σ(A) для {model.label}: {len(points)} точек, dim E = {sum(p.algebraic_mult for p in points)}")
    return StripSpectrum(nu=model.nu, Sigma=points, SigmaPrime=tuple(shifted), N=depths)


def default_truncation(model, point):
    return max(point.algebraic_mult, 2 * model.N + 2, DEFAULT_MIN_TRUNCATION)


def min_equals_max(model, tol=DEFAULT_TOLERANCES):
    """D_min = D_max тогда и только тогда, когда Σ(A) пусто."""
    return not strip_spectrum(model, tol).Sigma


def _inverse_principal(model, spectrum, p, S, tol):
    """Главная часть −P̂_0^{-1}(σ)·S(σ) в точке p (S: Лоранов ряд, смещение и массив)."""
    offset, coeffs = S
    mu_s = -offset
    target = p
    pole = 0
    for q in spectrum.Sigma:
        gap = abs(q.sigma0 - p)
        if gap <= EXACT_SHIFT * max(1.0, abs(q.sigma0)):
            target = q.sigma0
            pole = max(q.partial_mults) if q.partial_mults else q.algebraic_mult
            break
        if gap <= tol.tol_cluster * max(1.0, abs(q.sigma0)):
            raise ShiftCollision(f"сдвиг {p:.12g} почти совпадает с точкой спектра {q.sigma0:.12g}")
    taylor = model.p0.taylor_at(target, mu_s + 2 * pole + 1)
    if pole == 0:
        inv = taylor_inverse(taylor, mu_s, tol.cond_limit)
        out = apply_series(inv, 0, coeffs, offset, offset, -1)
    else:
        inv = laurent_inverse(taylor, pole, mu_s + pole)
        out = apply_series(inv, -pole, coeffs, offset, offset - pole, -1)
    return LaurentGerm(target, -out).trimmed()


def extended_basis(model, sigma0, tol=DEFAULT_TOLERANCES, spectrum=None, chains=None):
    """
    Элементы Ψ_{σ_0,j,ℓ} с частями в сдвинутых точках σ_0 − iϑ.

    ψ_ϑ равна главной части −P̂_0^{-1}(σ)·Σ_{ζ<ϑ} R_{ϑ−ζ}(σ)·ψ_ζ(σ + i(ϑ−ζ));
    ψ_{j,ℓ,ϑ} равна главной части (σ − σ_0 + iϑ)^ℓ·ψ_{j,0,ϑ}.

    Raises:
        TruncationTooShort, ShiftCollision
    """
    spectrum = spectrum or strip_spectrum(model, tol)
    point = next(p for p in spectrum.Sigma if abs(p.sigma0 - sigma0) <= tol.tol_cluster * max(1.0, abs(sigma0)))
    sigma0 = point.sigma0
    chains = chains or singular_chains(model.p0, sigma0, tol, default_truncation(model, point))
    depth = spectrum.N[sigma0]
    elements = []
    for j, (chain, mu) in enumerate(zip(chains.chains, chains.mults)):
        parts = [chain.principal_part()]
        for theta in range(1, depth + 1):
            p_theta = sigma0 - 1j * theta
            pieces = []
            for zeta in range(theta):
                psi = parts[zeta]
                R = model.effective(theta - zeta)
                if not psi.order or R.is_zero():
                    continue
                offset, coeffs = psi.dense()
                high = R.degree - 1
                value = apply_series(R.taylor_at(p_theta), 0, coeffs, offset, offset, max(high, -1))
                pieces.append((offset, value))
            if not pieces:
                parts.append(LaurentGerm.zero(p_theta, model.d))
                continue
            lo = min(o for o, _ in pieces)
            hi = max(o + v.shape[0] - 1 for o, v in pieces)
            S = np.zeros((hi - lo + 1, model.d), dtype=complex)
            for o, v in pieces:
                S[o - lo:o - lo + v.shape[0]] += v
            parts.append(_inverse_principal(model, spectrum, p_theta, (lo, S), tol))
        for ell in range(mu):
            shifted = tuple(part.times_power(ell).principal_part() for part in parts)
            elements.append(ExtendedBasisElement(sigma0=sigma0, j=j + 1, l=ell, parts=shifted))
    logger.debug(f"Расширенный базис в {sigma0:.6g}: {len(elements)} элементов, глубина {depth}")
    return elements


def build_extended_basis(model, tol=DEFAULT_TOLERANCES, spectrum=None, cache=None):
    """Базис E(A) по всем точкам Σ(A) в фиксированном порядке."""
    spectrum = spectrum or strip_spectrum(model, tol)
    elements, chain_map = [], {}
    for point in spectrum.Sigma:
        order = default_truncation(model, point)
        if cache is not None:
            chains = cache.chains(model.p0, point.sigma0, tol, order)
        else:
            chains = singular_chains(model.p0, point.sigma0, tol, order)
        chain_map[point.sigma0] = chains
        elements.extend(extended_basis(model, point.sigma0, tol, spectrum, chains))
    return ExtendedBasis(model=model, points=spectrum.Sigma, elements=tuple(elements), chains=chain_map)


def point_basis(chains):
    """Базис E одной точки без сдвинутых частей (глубина 0) по готовым цепочкам."""
    sigma0 = chains.sigma0
    point = SpectralPoint(sigma0, sum(chains.mults), tuple(chains.mults))
    elements = tuple(
        ExtendedBasisElement(sigma0=sigma0, j=j + 1, l=ell, parts=(chain.times_power(ell).principal_part(),))
        for j, (chain, mu) in enumerate(zip(chains.chains, chains.mults))
        for ell in range(mu)
    )
    return ExtendedBasis(model=None, points=(point,), elements=elements, chains={sigma0: chains})


def dual_extended_basis(model, basis, tol=DEFAULT_TOLERANCES):
    """
    Базис E(A^⋆), построенный из двойственных цепочек: локальные блоки спаривания
    в вещественных точках принимают нормальную форму i·δ_{jk}·δ_{ℓ+ℓ', μ_j−1}.
    """
    adjoint = formal_adjoint(model)
    spectrum = strip_spectrum(adjoint, tol)
    elements, chain_map = [], {}
    for point in spectrum.Sigma:
        source = next(
            (c for s, c in basis.chains.items() if abs(np.conj(s) - point.sigma0) <= tol.tol_cluster * max(1.0, abs(s))),
            None,
        )
        if source is None:
            chains = singular_chains(adjoint.p0, point.sigma0, tol, default_truncation(adjoint, point))
        else:
            chains = adjoint_chains(source, adjoint.p0, tol)
        chain_map[point.sigma0] = chains
        elements.extend(extended_basis(adjoint, point.sigma0, tol, spectrum, chains))
    return ExtendedBasis(model=adjoint, points=spectrum.Sigma, elements=tuple(elements), chains=chain_map)


def holomorphy_defect(model, element, ell):
    """Норма главной части Σ_ϑ P̂_{ℓ−ϑ}(σ)·parts[ϑ](σ + i(ℓ−ϑ)) в точке σ_0 − iℓ."""
    p = element.sigma0 - 1j * ell
    worst = 0.0
    acc = {}
    for theta in range(ell + 1):
        part = element.parts[theta] if theta < len(element.parts) else None
        if part is None or not part.order:
            continue
        offset, coeffs = part.dense()
        R = model.effective(ell - theta)
        value = apply_series(R.taylor_at(p), 0, coeffs, offset, offset, -1)
        for n, row in zip(range(offset, 0), value):
            acc[n] = acc.get(n, 0) + row
    for row in acc.values():
        worst = max(worst, float(np.linalg.norm(row)))
    return worst


def adjoint_domain(D, gram, tol=DEFAULT_TOLERANCES):
    """
    D^⊥ = {v : [u, v]_A = 0 для всех u ∈ D} в координатах E(A^⋆).

    Raises:
        DegeneratePairing: Если dim D^⊥ ≠ dim E(A^⋆) − dim D
    """
    m = len(gram.cols)
    expected = m - D.dim
    if D.dim == 0:
        return DomainSubspace.full(gram.cols)
    M = D.coords.conj().T @ np.conj(gram.G)
    null = linalg.null_space(M, rcond=tol.tol_rank)
    if null.shape[1] != expected:
        raise DegeneratePairing(f"dim D^⊥ = {null.shape[1]}, ожидалось {expected}")
    return DomainSubspace(gram.cols, null)


def is_selfadjoint(D, gram, tol=DEFAULT_TOLERANCES):
    """
    D = D^⊥ для симметричной модели (G кососимметрична по Эрмиту).

    Raises:
        NotSymmetric: Если G ≠ −G^H
        DegeneratePairing: Если спаривание численно вырождено
    """
    G = gram.G
    if G.shape[0] != G.shape[1] or np.max(np.abs(G + G.conj().T), initial=0.0) > 1e-8 * max(1.0, np.max(np.abs(G), initial=0.0)):
        raise NotSymmetric("матрица Грама не кососимметрична: E(A^⋆) не отождествляется с E(A)")
    return adjoint_domain(D, gram, tol).equals(D, tol)


def local_block(basis, sigma0):
    """D_{σ_0}: все элементы в точке σ_0."""
    idx = basis.point_indices(sigma0)
    coords = np.zeros((basis.dim, len(idx)), dtype=complex)
    for c, n in enumerate(idx):
        coords[n, c] = 1
    return DomainSubspace(basis.labels, coords)


def sigma_action(basis, tol=DEFAULT_TOLERANCES):
    """Матрица умножения на σ в Ê(A), построенная разложением (σ−σ_0)·ψ по цепочкам."""
    M = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, element in enumerate(basis.elements):
        chains = basis.chains[element.sigma0]
        product = element.parts[0].times_power(1).principal_part()
        M[col, col] = element.sigma0
        if not product.order:
            continue
        coords = reduce_germ(product, chains, tol).coords
        for j, values in enumerate(coords):
            for ell, w in enumerate(values):
                if w != 0:
                    M[basis.index((element.sigma0, j + 1, ell)), col] += w
    return M


def dilation_action(M, tau):
    """Действие κ_τ на Ê(A): умножение на τ^{iσ} = exp(i·log τ·σ)."""
    return linalg.expm(1j * math.log(tau) * M)


def saturation_check(D, M, tol=DEFAULT_TOLERANCES):
    """M·D ⊆ D."""
    return D.contains(M @ D.coords, tol)


def saturate_decompose(D, M, basis, tol=DEFAULT_TOLERANCES):
    """
    Разложение насыщенного D на компоненты по точкам σ_0.

    Используются координатные проекторы на блоки M, каждый из которых равен σ_0·I плюс нильпотент.

    Raises:
        NotInvariant: Если D не насыщено
    """
    if not saturation_check(D, M, tol):
        raise NotInvariant("подпространство не инвариантно относительно умножения на σ")
    components = {}
    for point in basis.points:
        idx = basis.point_indices(point.sigma0)
        block = M[np.ix_(idx, idx)] - point.sigma0 * np.eye(len(idx))
        if np.max(np.abs(np.linalg.matrix_power(block, len(idx))), initial=0.0) > tol.tol_angle:
            raise NotInvariant(f"блок в {point.sigma0:.6g} не нильпотентен")
        projector = np.zeros((basis.dim, basis.dim))
        projector[idx, idx] = 1
        part = DomainSubspace(D.basis_labels, projector @ D.coords)
        if part.dim:
            components[point.sigma0] = part
    return components


def half_domain(model, sigma0, basis, tol=DEFAULT_TOLERANCES):
    """
    D_{σ_0,1/2}: элементы Ψ_{σ_0,j,ℓ} с ℓ = μ_j/2..μ_j−1.

    Raises:
        NotRealPoint: Если σ_0 не вещественна
        OddMultiplicity: Если некоторое μ_j нечётно
    """
    if abs(sigma0.imag) > tol.tol_edge:
        raise NotRealPoint(f"точка {sigma0:.6g} не вещественна")
    point = next(p for p in basis.points if abs(p.sigma0 - sigma0) <= tol.tol_cluster * max(1.0, abs(sigma0)))
    mults = basis.chains[point.sigma0].mults
    if any(mu % 2 for mu in mults):
        raise OddMultiplicity(f"в точке {sigma0:.6g} кратности {list(mults)} не все чётны")
    columns = []
    for j, mu in enumerate(mults):
        for ell in range(mu // 2, mu):
            e = np.zeros(basis.dim, dtype=complex)
            e[basis.index((point.sigma0, j + 1, ell))] = 1
            columns.append(e)
    coords = np.column_stack(columns) if columns else np.zeros((basis.dim, 0))
    return DomainSubspace(basis.labels, coords)


def friedrichs_domain(model, basis=None, tol=DEFAULT_TOLERANCES):
    """
    D_F: все блоки с −ν/2 < Im σ < 0 плюс полупространства в вещественных точках.

    Raises:
        NotSymmetric, NotPositive, OddMultiplicity
    """
    if not symmetry_check(model, tol):
        raise NotSymmetric(f"модель {model.label} не симметрична")
    if not positivity_check(model, tol=tol):
        raise NotPositive(f"P̂_0 модели {model.label} не неотрицателен на вещественной оси")
    basis = basis or build_extended_basis(model, tol)
    columns = []
    for point in basis.points:
        if abs(point.sigma0.imag) <= tol.tol_edge:
            columns.append(half_domain(model, point.sigma0, basis, tol).coords)
        elif point.sigma0.imag < 0:
            columns.append(local_block(basis, point.sigma0).coords)
    coords = np.hstack(columns) if columns else np.zeros((basis.dim, 0))
    domain = DomainSubspace(basis.labels, coords)
    logger.info(f"Область Фридрихса для {model.label}: dim {domain.dim} из {basis.dim}")
    return domain


def relative_index(D1, D2):
    """Разность индексов A|_{D2} и A|_{D1}: dim D2 − dim D1."""
    if len(D1.basis_labels) != len(D2.basis_labels):
        raise ModelFormatError("области заданы над разными базисами")
    return D2.dim - D1.dim


def _same_bases(b0, b1, tol):
    if b0.dim != b1.dim:
        return False
    for e0, e1 in zip(b0.elements, b1.elements):
        if abs(e0.sigma0 - e1.sigma0) > tol.tol_cluster or (e0.j, e0.l) != (e1.j, e1.l):
            return False
        for p0, p1 in zip(e0.parts, e1.parts):
            if p0.order != p1.order or (p0.order and np.max(np.abs(p0.principal - p1.principal)) > tol.tol_res):
                return False
    return True


def _indicial_agree(model0, model1, depth, tol):
    return all(model0.effective(k).allclose(model1.effective(k), tol.tol_sym) for k in range(depth + 1))


def domain_stability(model0, model1, tol=DEFAULT_TOLERANCES):
    """
    Совпадают ли D_max(A_0) и D_max(A_1) по индициальным данным.

    Сравниваются P̂_k при k = 0..max N(σ_0) по Σ(A_0): рекурсия сдвигов
    других коэффициентов не использует. При совпадении проверяется, что
    расширенные базисы равны.
    """
    if model0.nu != model1.nu or model0.d != model1.d:
        return False
    spectrum = strip_spectrum(model0, tol)
    depth = max([0] + list(spectrum.N.values()))
    if not _indicial_agree(model0, model1, depth, tol):
        return False
    same = _same_bases(build_extended_basis(model0, tol, spectrum), build_extended_basis(model1, tol), tol)
    if not same:
        logger.error("Индициальные данные совпадают, но расширенные базисы различаются")
    return same


def friedrichs_stability(model0, model1, tol=DEFAULT_TOLERANCES):
    """Совпадение областей Фридрихса: сравниваются P̂_k до глубины точек с Im σ ≤ 0."""
    if model0.nu != model1.nu or model0.d != model1.d:
        return False
    spectrum = strip_spectrum(model0, tol)
    lower = [n for s, n in spectrum.N.items() if s.imag <= tol.tol_edge]
    depth = max([0] + lower)
    if not _indicial_agree(model0, model1, depth, tol):
        return False
    return friedrichs_domain(model0, tol=tol).equals(friedrichs_domain(model1, tol=tol), tol)


def selfadjoint_family(gram, theta, tol=DEFAULT_TOLERANCES):
    """
    Лагранжева прямая D^θ для двумерного E с формой −iG сигнатуры (1, 1).

    Raises:
        UnequalDeficiency: Если сигнатура не (1, 1)
    """
    G = gram.G
    if G.shape != (2, 2):
        raise UnequalDeficiency(f"ожидалась матрица 2×2, получено {G.shape}")
    H = -1j * G
    H = (H + H.conj().T) / 2
    values, vectors = linalg.eigh(H)
    if not (values[0] < -tol.tol_det and values[1] > tol.tol_det):
        raise UnequalDeficiency(f"сигнатура формы: собственные значения {values}")
    fixed = []
    for v in vectors.T:
        lead = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
        fixed.append(v * abs(lead) / lead)
    minus, plus = fixed
    w = plus / math.sqrt(values[1]) + np.exp(1j * theta) * minus / math.sqrt(-values[0])
    return DomainSubspace(gram.rows, np.conj(w).reshape(2, 1))


def dictionary_matrix(model, basis, tol=DEFAULT_TOLERANCES, profile=None):
    """
    Матрица T перехода от координат словаря модели к координатам (σ_0, j, ℓ).

    Столбец n содержит координаты Mellin-ростка n-й функции словаря.

    Raises:
        ModelFormatError: Если у модели нет словаря
        NotInSpan: Если функция словаря не лежит в E(A)
    """
    if not model.dictionary:
        raise ModelFormatError(f"у модели {model.label} нет словаря")
    T = np.zeros((basis.dim, len(model.dictionary)), dtype=complex)
    for col, function in enumerate(model.dictionary):
        for point in basis.points:
            germ = mellin_germ(function, point.sigma0, profile=profile, tol=tol)
            if not germ.order:
                continue
            coords = reduce_germ(germ, basis.chains[point.sigma0], tol).coords
            for j, values in enumerate(coords):
                for ell, w in enumerate(values):
                    T[basis.index((point.sigma0, j + 1, ell)), col] = w
    return T
