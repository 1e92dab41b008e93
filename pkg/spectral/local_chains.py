"""
Локальная теория в одной точке спектра: расщепление ядро/образ, дополнение
Шура, сингулярные цепочки и разложение ростков по ним.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from config import DEFAULT_TOLERANCES
from .errors import (
    ChainRankError, NotInSpan, NotRealPoint, NotSpectral, TruncationTooShort, BasePointMismatch,
)
from .series import (
    LaurentGerm, apply_series, laurent_inverse, matrix_series_mul, multiplicities_from_counts,
    scalar_series_div, scalar_series_sqrt, taylor_inverse, toeplitz_kernel_counts,
)

logger = logging.getLogger(__name__)

# Минимальная длина хвостов по умолчанию (2·⌈ν⌉ + 2 при ν ≤ 2)
DEFAULT_MIN_TRUNCATION = 6


@dataclass(frozen=True, eq=False)
class KernelSplit:
    """Ортонормированные базисы K, K^⊥, R^⊥, R для P̂(σ_0) (столбцы)."""

    kernel: np.ndarray
    kernel_perp: np.ndarray
    corange: np.ndarray
    range: np.ndarray

    def adjoint(self):
        """Расщепление для P̂^⋆(σ̄_0): роли ядра и коядра меняются местами."""
        return KernelSplit(self.corange, self.range, self.kernel, self.kernel_perp)


@dataclass(frozen=True, eq=False)
class SchurFamily:
    """Ряды Тейлора дополнения Шура 𝒫: K → R^⊥ и оператора подъёма Y·P_21."""

    split: KernelSplit
    series: np.ndarray
    lift: np.ndarray

    @property
    def order(self):
        return self.series.shape[0] - 1


@dataclass(frozen=True, eq=False)
class SingularChainBasis:
    sigma0: complex
    chains: tuple
    mults: tuple
    kernel_basis: np.ndarray
    corange_basis: np.ndarray
    betas: tuple
    order: int
    reduced: tuple = field(default=())
    schur: SchurFamily = None
    taylor: np.ndarray = None

    @property
    def d(self):
        return self.kernel_basis.shape[0]

    @property
    def leads(self):
        return np.column_stack([c.principal[0] for c in self.chains]) if self.chains else np.zeros((self.d, 0))

    def to_json(self):
        return {
            "sigma0": [self.sigma0.real, self.sigma0.imag],
            "mults": list(self.mults),
            "order": self.order,
            "chains": [
                {"principal": [[[z.real, z.imag] for z in row] for row in c.principal]}
                for c in self.chains
            ],
        }


@dataclass(frozen=True, eq=False)
class GermReduction:
    """Коэффициенты многочленов p_j (coords[j][ℓ]) и остаток главной части."""

    coords: tuple
    residual: LaurentGerm

    @property
    def flat(self):
        return np.concatenate(self.coords) if self.coords else np.zeros(0, dtype=complex)

    @property
    def residual_norm(self):
        return self.residual.principal_norm()


def _split_from_svd(matrix, tol, scale=1.0):
    """Ранг считается относительно масштаба пучка, а не наибольшего сингулярного числа P̂(σ_0)."""
    U, s, Vh = linalg.svd(matrix)
    rank = int(np.sum(s > tol.tol_rank * scale))
    logger.debug(f"Сингулярные числа: {s}, ранг {rank}")
    return KernelSplit(
        kernel=Vh[rank:].conj().T,
        kernel_perp=Vh[:rank].conj().T,
        corange=U[:, rank:],
        range=U[:, :rank],
    )


def _kernel_split(P, sigma0, tol):
    split = _split_from_svd(P.evaluate(sigma0), tol, P.scale_at(sigma0))
    if split.kernel.shape[1] == 0:
        raise NotSpectral(f"P̂({sigma0:.6g}) численно обратим")
    return split


def kernel_range_split(P, sigma0, tol=DEFAULT_TOLERANCES):
    """
    Ортонормированные базисы ядра и коядра P̂(σ_0).

    Returns:
        tuple[np.ndarray, np.ndarray]: (базис K, базис R^⊥) по столбцам

    Raises:
        NotSpectral: Если P̂(σ_0) численно обратим
    """
    split = _kernel_split(P, sigma0, tol)
    return split.kernel, split.corange


def _schur_from_taylor(taylor, split, order, tol):
    count = order + 1
    C = np.zeros((count,) + taylor.shape[1:], dtype=complex)
    C[:min(count, taylor.shape[0])] = taylor[:count]
    K, Kp, Rp, R = split.kernel, split.kernel_perp, split.corange, split.range
    p11 = np.einsum("ai,nab,bj->nij", Rp.conj(), C, K)
    p12 = np.einsum("ai,nab,bj->nij", Rp.conj(), C, Kp)
    p21 = np.einsum("ai,nab,bj->nij", R.conj(), C, K)
    p22 = np.einsum("ai,nab,bj->nij", R.conj(), C, Kp)
    Y = taylor_inverse(p22, order, tol.cond_limit)
    lift = matrix_series_mul(Y, p21, order)
    series = p11 - matrix_series_mul(p12, lift, order)
    return SchurFamily(split=split, series=series, lift=lift)


def schur_family(P, sigma0, order, tol=DEFAULT_TOLERANCES):
    """
    Ряд Тейлора дополнения Шура 𝒫 = P_11 − P_12 P_22^{-1} P_21: K → R^⊥ до степени order.

    Raises:
        NotSpectral: Если σ_0 не является точкой спектра
        BlockNotInvertible: Если P_22(σ_0) плохо обусловлен
    """
    split = _kernel_split(P, sigma0, tol)
    return _schur_from_taylor(P.taylor_at(sigma0), split, order, tol)


def partial_multiplicities(P, sigma0, tol=DEFAULT_TOLERANCES):
    """Частные кратности μ_1 ≥ μ_2 ≥ … по рангам блочно-тёплицевых матриц."""
    counts = toeplitz_kernel_counts(
        P.taylor_at(sigma0), tol.tol_rank, P.degree * P.dim + 1, scale=P.scale_at(sigma0),
    )
    return multiplicities_from_counts(counts)


def _shift(coeffs, s):
    """Умножение на h^s (s ≥ 0) для массива коэффициентов с фиксированным смещением."""
    if s == 0:
        return coeffs.copy()
    out = np.zeros_like(coeffs)
    out[s:] = coeffs[:-s]
    return out


def _pole_orders(G, pole, thr):
    orders = []
    for g in G:
        order = 0
        for n in range(pole):
            if np.linalg.norm(g[n]) > thr:
                order = pole - n
                break
        orders.append(order)
    return orders


def _eliminate(G, pole, thr, rel):
    """
    Исключение с (σ−σ_0)^{μ_i−μ̃}-весами, пока старшие коэффициенты не станут независимыми.

    Returns:
        tuple[np.ndarray, list[int], list[int]]: Цепочки, их порядки и порядок следования
    """
    for _ in range(G.shape[0] * pole * 4 + 4):
        orders = _pole_orders(G, pole, thr)
        if min(orders) == 0:
            raise ChainRankError("после исключения появился голоморфный росток")
        accepted = []
        restart = False
        for m in sorted(set(orders), reverse=True):
            cands = [c for c in range(G.shape[0]) if orders[c] == m]
            leads = np.column_stack([G[c, pole - m] for c in cands])
            resid = leads
            if accepted:
                basis = linalg.orth(np.column_stack([G[a, pole - orders[a]] for a in accepted]))
                resid = leads - basis @ (basis.conj().T @ leads)
            _, r_factor, piv = linalg.qr(resid, mode="economic", pivoting=True)
            diag = np.abs(np.diag(r_factor))
            scale = max(float(np.max(np.linalg.norm(leads, axis=0))), 1e-300)
            rank = int(np.sum(diag > rel * scale)) if diag.size else 0
            accepted.extend(cands[i] for i in piv[:rank])
            dependent = [cands[i] for i in piv[rank:]]
            if not dependent:
                continue
            acc_leads = np.column_stack([G[a, pole - orders[a]] for a in accepted])
            for c in dependent:
                coef, *_ = linalg.lstsq(acc_leads, G[c, pole - m])
                for a, w in zip(accepted, coef):
                    G[c] -= w * _shift(G[a], orders[a] - m)
            logger.debug(f"Исключение на уровне {m}: зависимых цепочек {len(dependent)}")
            restart = True
            break
        if not restart:
            return G, orders, accepted
    raise ChainRankError("исключение не сошлось")


def _normalize_chains(G, pole, orders, sequence):
    """Ортонормировать старшие коэффициенты и добиться ψ_{jℓ} ⊥ ψ_{k0} при μ_k ≥ μ_j − ℓ."""
    chains = [G[c].copy() for c in sequence]
    mults = [orders[c] for c in sequence]
    for j in range(len(chains)):
        for i in range(j):
            lead_i = chains[i][pole - mults[i]]
            a = np.vdot(lead_i, chains[j][pole - mults[j]])
            chains[j] -= a * _shift(chains[i], mults[i] - mults[j])
        chains[j] /= np.linalg.norm(chains[j][pole - mults[j]])
    for j in range(len(chains)):
        for ell in range(1, mults[j]):
            idx = pole - mults[j] + ell
            current = [c.copy() for c in chains]
            for k in range(len(chains)):
                if mults[k] >= mults[j] - ell:
                    a = np.vdot(current[k][pole - mults[k]], current[j][idx])
                    chains[j] -= a * _shift(current[k], mults[k] - mults[j] + ell)
    return chains, mults


def _phase_fix(vector):
    """Фаза, делающая первую заметную компоненту вещественной положительной."""
    big = np.flatnonzero(np.abs(vector) > 1e-8 * max(np.max(np.abs(vector)), 1e-300))
    if not big.size:
        return 1.0
    z = vector[big[0]]
    return abs(z) / z


def _lift(schur, g, pole, order):
    """Полный росток K·g − K^⊥·(Y P_21 g) в точке, коэффициенты от −pole до order."""
    split = schur.split
    low = apply_series(schur.lift, 0, g, -pole, -pole, order)
    return (split.kernel @ g[:pole + order + 1].T).T - (split.kernel_perp @ low.T).T


def _betas(P_taylor, chains, corange, order):
    betas = []
    for chain in chains:
        offset, coeffs = chain.dense()
        values = apply_series(P_taylor, 0, coeffs, offset, 0, order)
        betas.append(LaurentGerm(chain.sigma0, np.zeros((0, corange.shape[1])), values @ corange.conj()))
    return tuple(betas)


def _build_chains(P, sigma0, order, tol):
    mults_expected = partial_multiplicities(P, sigma0, tol)
    if not mults_expected:
        raise NotSpectral(f"det P̂ не обращается в ноль в {sigma0:.6g}")
    pole = max(mults_expected)
    if pole >= order:
        raise TruncationTooShort(f"порядок полюса {pole} достиг длины усечения {order}")
    split = _kernel_split(P, sigma0, tol)
    k = split.kernel.shape[1]
    if k != len(mults_expected):
        raise ChainRankError(f"dim K = {k}, а число цепочек по тёплицевым рангам {len(mults_expected)}")
    taylor = P.taylor_at(sigma0)
    schur = _schur_from_taylor(taylor, split, order + 2 * pole, tol)
    X = laurent_inverse(schur.series, pole, order)
    # X[n] ↔ X_{n−pole}; столбцы: ψ̃_j = 𝒫^{-1} b_j
    G = np.transpose(X, (2, 0, 1)).copy()
    scale = max(float(np.max(np.abs(X[:pole]))), 1e-300)
    thr = tol.tol_rank * scale
    G, orders, sequence = _eliminate(G, pole, thr, tol.tol_rank)
    chains_k, mults = _normalize_chains(G, pole, orders, sequence)
    if sorted(mults, reverse=True) != list(mults_expected):
        raise ChainRankError(f"кратности цепочек {mults} не совпадают с тёплицевыми {mults_expected}")
    chains, reduced = [], []
    for g, mu in zip(chains_k, mults):
        full = _lift(schur, g, pole, order)
        phase = _phase_fix(full[pole - mu])
        full, g = full * phase, g * phase
        chains.append(LaurentGerm(sigma0, full[pole - mu:pole], full[pole:]))
        reduced.append(LaurentGerm(sigma0, g[pole - mu:pole], g[pole:]))
    chains = tuple(chains)
    basis = SingularChainBasis(
        sigma0=complex(sigma0),
        chains=chains,
        mults=tuple(mults),
        kernel_basis=split.kernel,
        corange_basis=split.corange,
        betas=_betas(taylor, chains, split.corange, order),
        order=order,
        reduced=tuple(reduced),
        schur=schur,
        taylor=taylor,
    )
    logger.debug(f"Цепочки в {sigma0:.6g}: кратности {basis.mults}, усечение {order}")
    return basis


def singular_chains(P, sigma0, tol=DEFAULT_TOLERANCES, order=None):
    """
    Сингулярные цепочки ψ_j с ортонормированными старшими коэффициентами.

    Длина усечения удваивается при TruncationTooShort, пока не превысит max_truncation.

    Args:
        P (MatrixPolynomial): Символ
        sigma0 (complex): Точка спектра
        tol (Tolerances): Допуски
        order (int): Начальная длина хвостов L

    Returns:
        SingularChainBasis: Базис цепочек

    Raises:
        NotSpectral, TruncationTooShort, ChainRankError
    """
    sigma0 = complex(sigma0)
    order = order or DEFAULT_MIN_TRUNCATION
    while True:
        try:
            return _build_chains(P, sigma0, order, tol)
        except TruncationTooShort:
            if order * 2 > tol.max_truncation:
                raise
            order *= 2
            logger.debug(f"Длина усечения увеличена до {order}")


def adjoint_chains(basis, P_star, tol=DEFAULT_TOLERANCES):
    """
    Двойственный базис цепочек P̂^⋆ в σ̄_0: ψ_j^⋆ = (σ−σ̄_0)^{−μ_j} β̃_j^⋆.

    Коэффициенты подобраны так, что локальное спаривание принимает нормальную форму
    [(σ−σ_0)^ℓ ψ_j, (σ−σ̄_0)^{ℓ'} ψ_k^⋆] = i·δ_{jk}·δ_{ℓ+ℓ', μ_j−1}.
    """
    order = basis.order
    sigma_star = complex(np.conj(basis.sigma0))
    B = np.stack([np.stack([b.coefficient(n) for b in basis.betas], axis=1) for n in range(order + 1)])
    Binv = taylor_inverse(B, order, tol.cond_limit)
    T = np.conj(np.transpose(Binv, (0, 2, 1)))
    pole = max(basis.mults)
    split = basis.schur.split.adjoint()
    taylor = P_star.taylor_at(sigma_star)
    schur = _schur_from_taylor(taylor, split, order + 2 * pole, tol)
    chains, reduced = [], []
    for j, mu in enumerate(basis.mults):
        g = np.zeros((pole + order + 1, T.shape[1]), dtype=complex)
        # t_n = T_{n+μ}, n = −μ..order−μ
        g[pole - mu:pole - mu + order + 1] = T[:, :, j]
        full = _lift(schur, g, pole, order)
        chains.append(LaurentGerm(sigma_star, full[pole - mu:pole], full[pole:pole + order - mu + 1]))
        reduced.append(LaurentGerm(sigma_star, g[pole - mu:pole], g[pole:pole + order - mu + 1]))
    chains = tuple(chains)
    return SingularChainBasis(
        sigma0=sigma_star,
        chains=chains,
        mults=basis.mults,
        kernel_basis=split.kernel,
        corange_basis=split.corange,
        betas=_betas(taylor, chains, split.corange, order - pole),
        order=order,
        reduced=tuple(reduced),
        schur=schur,
        taylor=taylor,
    )


def reduce_germ(u, basis, tol=DEFAULT_TOLERANCES, strict=True):
    """
    Координаты ростка u в базисе {(σ−σ_0)^ℓ ψ_j} по модулю голоморфных ростков.

    Треугольное решение от самого глубокого полюса: на уровне m участвуют
    цепочки с μ_j ≥ m при ℓ = μ_j − m.

    Returns:
        GermReduction: coords[j][ℓ] и остаток

    Raises:
        BasePointMismatch: Если u задан в другой точке
        NotInSpan: Если остаток больше tol_res·max(1, ‖u‖) и strict
    """
    if abs(u.sigma0 - basis.sigma0) > tol.tol_cluster * max(1.0, abs(basis.sigma0)):
        raise BasePointMismatch(f"росток в {u.sigma0:.6g}, базис в {basis.sigma0:.6g}")
    depth = max([u.order] + list(basis.mults))
    residual = np.zeros((depth, basis.d), dtype=complex)
    if u.order:
        residual[depth - u.order:] = u.principal
    coords = [np.zeros(mu, dtype=complex) for mu in basis.mults]
    for m in range(depth, 0, -1):
        active = [j for j, mu in enumerate(basis.mults) if mu >= m]
        if not active:
            continue
        leads = np.column_stack([basis.chains[j].principal[0] for j in active])
        a, *_ = linalg.lstsq(leads, residual[depth - m])
        for j, w in zip(active, a):
            ell = basis.mults[j] - m
            coords[j][ell] = w
            # (σ−σ_0)^ℓ ψ_j: главная часть от индекса −m до −1
            residual[depth - m:] -= w * basis.chains[j].principal[:m]
    rest = LaurentGerm(u.sigma0, residual)
    size = rest.principal_norm()
    if strict and size > tol.tol_res * max(1.0, u.principal_norm()):
        raise NotInSpan(f"остаток {size:.3e} при разложении ростка по цепочкам")
    return GermReduction(coords=tuple(coords), residual=rest)


def germ_from_coords(basis, coords):
    """Главная часть Σ_j p_j(σ) ψ_j по коэффициентам coords[j][ℓ]."""
    depth = max(basis.mults)
    principal = np.zeros((depth, basis.d), dtype=complex)
    for j, mu in enumerate(basis.mults):
        for ell in range(mu):
            m = mu - ell
            principal[depth - m:] += coords[j][ell] * basis.chains[j].principal[:m]
    return LaurentGerm(basis.sigma0, principal)


def _iota_series(a, b, order):
    """Скалярный ряд Σ_s h^s Σ_{n+m=s} b_m^H a_n для голоморфных рядов (строки)."""
    out = np.zeros(order + 1, dtype=complex)
    for s in range(order + 1):
        for n in range(s + 1):
            if n < a.shape[0] and s - n < b.shape[0]:
                out[s] += np.vdot(b[s - n], a[n])
    return out


def holomorphic_gram_schmidt(basis, tol=DEFAULT_TOLERANCES):
    """
    Ортонормировка голоморфных ростков β̃_j = (σ−σ_0)^{μ_j} ψ_j относительно ι.

    Raises:
        NotRealPoint: Если σ_0 не вещественна
    """
    if abs(basis.sigma0.imag) > tol.tol_edge:
        raise NotRealPoint(f"точка {basis.sigma0:.6g} не лежит на вещественной оси")
    order = basis.order
    tilde = []
    for chain, mu in zip(basis.chains, basis.mults):
        offset, coeffs = chain.dense()
        tilde.append(coeffs[:order + 1].copy())
    for j in range(len(tilde)):
        for i in range(j):
            c = _iota_series(tilde[j], tilde[i], order)
            tilde[j] = tilde[j] - _scalar_times(c, tilde[i], order)
        norm2 = _iota_series(tilde[j], tilde[j], order).real
        inv_root = scalar_series_div(np.eye(1, order + 1)[0], scalar_series_sqrt(norm2, order), order)
        tilde[j] = _scalar_times(inv_root, tilde[j], order)
    chains = []
    for coeffs, mu in zip(tilde, basis.mults):
        chains.append(LaurentGerm(basis.sigma0, coeffs[:mu], coeffs[mu:]))
    chains = tuple(chains)
    betas = _betas(basis.taylor, chains, basis.corange_basis, order - max(basis.mults))
    return replace(basis, chains=chains, reduced=(), betas=betas)


def _scalar_times(c, rows, order):
    out = np.zeros((order + 1, rows.shape[1]), dtype=complex)
    for s in range(order + 1):
        for n in range(s + 1):
            if n < rows.shape[0]:
                out[s] += c[s - n] * rows[n]
    return out

