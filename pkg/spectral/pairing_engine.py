"""
Спаривание ι, локальное вычетное спаривание, матрицы Грама [·,·]_A и
независимая проверка контурными квадратурами.
"""

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from config import DEFAULT_TOLERANCES, WORKERS
from .errors import BasePointMismatch, ContourTouchesSpectrum
from .local_chains import reduce_germ
from .pencil_core import companion_eigenvalues
from .series import LaurentGerm, apply_series

logger = logging.getLogger(__name__)

# Нормировочная фаза: (1/2π)∮ = i·Res
PAIRING_PHASE = 1j


class ConjugationMap:
    """Θ(f)(σ) = conj(f(σ̄)): росток в σ_0 переходит в росток в σ̄_0 с сопряжёнными коэффициентами."""

    @staticmethod
    def apply(germ):
        return LaurentGerm(np.conj(germ.sigma0), np.conj(germ.principal), np.conj(germ.tail))

    @staticmethod
    def apply_series(coeffs):
        return np.conj(np.asarray(coeffs, dtype=complex))

    __call__ = apply


def _same_point(a, b, tol):
    return abs(a - b) <= tol.tol_cluster * max(1.0, abs(a))


def iota(u, v, order=None, tol=DEFAULT_TOLERANCES):
    """
    Лорановы коэффициенты σ ↦ ⟨u(σ), v(σ̄)⟩: c_s = Σ_{n+m=s} v_m^H u_n.

    Args:
        u (LaurentGerm): Росток в σ_0
        v (LaurentGerm): Росток в σ̄_0
        order (int): Последний сохраняемый индекс (по умолчанию все известные)

    Returns:
        LaurentGerm: Скалярный росток (d = 1) в σ_0

    Raises:
        BasePointMismatch: Если v задан не в сопряжённой точке
    """
    if not _same_point(v.sigma0, np.conj(u.sigma0), tol):
        raise BasePointMismatch(f"ι: ожидалась точка {np.conj(u.sigma0):.6g}, получена {v.sigma0:.6g}")
    if u.d != v.d:
        raise BasePointMismatch(f"ι: размерности {u.d} и {v.d} не совпадают")
    ou, U = u.dense()
    ov, V = v.dense()
    lo = ou + ov
    hi = ou + U.shape[0] - 1 + ov + V.shape[0] - 1
    if order is not None:
        hi = min(hi, order)
    coeffs = np.zeros(max(hi - lo + 1, 0), dtype=complex)
    for n in range(U.shape[0]):
        for m in range(V.shape[0]):
            s = n + ou + m + ov
            if s <= hi:
                coeffs[s - lo] += np.vdot(V[m], U[n])
    return LaurentGerm.from_coefficients(u.sigma0, coeffs.reshape(-1, 1), lo)


def residue_pairing_local(u, v, basis, basis_star, tol=DEFAULT_TOLERANCES):
    """
    Локальное спаривание i·Σ_j Σ_k u_{jk}·conj(v_{j, μ_j−k−1}).

    basis_star должен быть двойственным базисом (adjoint_chains) к basis.

    Raises:
        NotInSpan: Если u или v не раскладываются по цепочкам
    """
    cu = reduce_germ(u, basis, tol).coords
    cv = reduce_germ(v, basis_star, tol).coords
    total = 0j
    for j, mu in enumerate(basis.mults):
        for k in range(mu):
            total += cu[j][k] * np.conj(cv[j][mu - k - 1])
    return PAIRING_PHASE * total


def germ_value(germ, sigma):
    """Значение главной части ростка в точках sigma (массив), форма (n, d)."""
    sigma = np.atleast_1d(np.asarray(sigma, dtype=complex))
    h = sigma - germ.sigma0
    out = np.zeros((sigma.size, germ.d), dtype=complex)
    mu = germ.order
    for m in range(mu):
        out += np.outer(h ** (m - mu), germ.principal[m])
    return out


def default_radius(center, points, cap=1.0):
    """Половина расстояния до ближайшей другой особой точки, не больше cap."""
    others = [abs(p - center) for p in points if abs(p - center) > 1e-12]
    return min(cap, 0.5 * min(others)) if others else cap


def contour_integral(integrand, center, radius, tol=DEFAULT_TOLERANCES, n_nodes=None):
    """
    (1/2π)∮ f(σ)dσ по окружности, формулой трапеций с удвоением числа узлов.

    Узлы удваиваются, пока два последовательных значения не совпадут до quad_rtol
    (не более quad_max_nodes).
    """
    n = n_nodes or tol.quad_nodes
    previous = None
    while True:
        theta = 2 * np.pi * np.arange(n) / n
        z = radius * np.exp(1j * theta)
        value = np.mean(integrand(center + z) * 1j * z)
        if previous is not None and abs(value - previous) <= tol.quad_rtol * max(1.0, abs(value)):
            return value
        if n * 2 > tol.quad_max_nodes:
            logger.warning(f"Контурный интеграл не стабилизировался на {n} узлах")
            return value
        previous = value
        n *= 2


def _check_contour(roots, center, radius, tol):
    for q in roots:
        if abs(abs(q - center) - radius) < tol.tol_edge:
            raise ContourTouchesSpectrum(f"окружность |σ−{center:.6g}|={radius:g} проходит через {q:.6g}")


def contour_pairing(u, v, model, gamma=None, n_nodes=None, tol=DEFAULT_TOLERANCES):
    """
    (1/2π)∮ ⟨P̂_0(σ)û(σ), v̂(σ̄)⟩ dσ по окружности gamma = (center, radius).

    Args:
        u (LaurentGerm | list[LaurentGerm]): Ростки для A (главные части суммируются)
        v (LaurentGerm | list[LaurentGerm]): Ростки для A^⋆ в сопряжённых точках
        model (ConeModel): Модель A

    Raises:
        ContourTouchesSpectrum: Если окружность проходит ближе tol_edge к корню det P̂_0
    """
    us = [u] if isinstance(u, LaurentGerm) else list(u)
    vs = [v] if isinstance(v, LaurentGerm) else list(v)
    roots = companion_eigenvalues(model.p0)
    if gamma is None:
        center = us[0].sigma0
        gamma = (center, default_radius(center, roots))
    center, radius = gamma
    _check_contour(roots, center, radius, tol)
    P = model.p0

    def integrand(sigma):
        uu = sum(germ_value(g, sigma) for g in us)
        vv = sum(germ_value(g, np.conj(sigma)) for g in vs)
        out = np.empty(sigma.size, dtype=complex)
        for n, s in enumerate(sigma):
            out[n] = np.vdot(vv[n], P.evaluate(s) @ uu[n])
        return out

    return contour_integral(integrand, center, radius, tol, n_nodes)


@dataclass
class PairingGram:
    """G[α, β] = [Ψ_α, Ψ^⋆_β]_A; blocks: сдвиги τ для пар точек (σ_0, σ_0^⋆)."""

    rows: list
    cols: list
    G: np.ndarray
    blocks: dict = field(default_factory=dict)
    route: str = "closed-form"

    def _indices(self, labels, sigma0, tol=DEFAULT_TOLERANCES):
        return [n for n, lab in enumerate(labels) if _same_point(lab[0], sigma0, tol)]

    def block(self, sigma0, sigma0_star):
        r = self._indices(self.rows, sigma0)
        c = self._indices(self.cols, sigma0_star)
        return self.G[np.ix_(r, c)]

    def reversed(self):
        """Матрица Грама спаривания [·,·]_{A^⋆} между E(A^⋆) и E(A): [v, u]_{A^⋆} = −conj([u, v]_A)."""
        blocks = {(b, a): tau for (a, b), tau in self.blocks.items()}
        return PairingGram(rows=list(self.cols), cols=list(self.rows), G=-self.G.conj().T, blocks=blocks, route=self.route)

    def to_json(self):
        return {
            "route": self.route,
            "rows": [label_text(lab) for lab in self.rows],
            "cols": [label_text(lab) for lab in self.cols],
            "G": [[[z.real, z.imag] for z in row] for row in self.G],
        }

    def to_csv(self):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow([""] + [label_text(lab) for lab in self.cols])
        for lab, row in zip(self.rows, self.G):
            writer.writerow([label_text(lab)] + [f"{z.real:.15g}{z.imag:+.15g}j" for z in row])
        return buffer.getvalue()


def label_text(label):
    sigma0, j, ell = label
    return f"({sigma0.real:.15g},{sigma0.imag:.15g},{j},{ell})"


def conjugate_shift(sigma0, sigma0_star, tol=DEFAULT_TOLERANCES):
    """τ ∈ ℕ_0 с σ_0 = conj(σ_0^⋆) + iτ, либо None."""
    diff = sigma0 - np.conj(sigma0_star)
    tau = round(diff.imag)
    if abs(diff.real) > tol.tol_cluster * max(1.0, abs(sigma0)) or tau < 0:
        return None
    if abs(diff.imag - tau) > tol.tol_cluster * max(1.0, abs(sigma0)):
        return None
    return int(tau)


def _shifted_terms(model, u, v, tau):
    """Слагаемые (z, k, U, V) формулы для блока со сдвигом τ."""
    base = np.conj(v.sigma0)
    terms = []
    for theta in range(tau + 1):
        for theta_p in range(theta + 1):
            k = theta - theta_p
            if tau - theta >= len(u.parts) or theta_p >= len(v.parts) or k >= model.N:
                continue
            U, V = u.parts[tau - theta], v.parts[theta_p]
            if not U.order or not V.order:
                continue
            z = base + 1j * theta
            terms.append((z, k, U.rebased(z), V.rebased(np.conj(z))))
    return terms


def closed_form_entry(model, u, v, tau, tol=DEFAULT_TOLERANCES):
    """
    [u, v]_A для элементов расширенных базисов со сдвигом τ, вычеты из усечённых рядов.

    Для каждого ϑ ≤ τ и ϑ' ≤ ϑ (k = ϑ−ϑ') берётся i·c_{−1} ряда
    ⟨R_k(σ−ik)·u_{τ−ϑ}(σ), v_{ϑ'}(σ̄+ik)⟩ в точке conj(σ_0^⋆) + iϑ.
    """
    total = 0j
    for z, k, U, V in _shifted_terms(model, u, v, tau):
        R = model.effective(k)
        taylor = R.taylor_at(z - 1j * k)
        ou, Uc = U.principal_part().dense()
        # c_{−1} = Σ_{n+m=−1} V_m^H F_n, m = −μ_v..−1
        F = apply_series(taylor, 0, Uc, ou, 0, V.order - 1)
        c = sum(np.vdot(V.principal[V.order + m], F[-1 - m]) for m in range(-V.order, 0))
        total += c
    return PAIRING_PHASE * total


def contour_entry(model, u, v, tau, radius, tol=DEFAULT_TOLERANCES, n_nodes=None):
    """То же значение, что closed_form_entry, но контурными интегралами."""
    total = 0j
    for z, k, U, V in _shifted_terms(model, u, v, tau):
        R = model.effective(k)

        def integrand(sigma, R=R, U=U, V=V, k=k):
            uu = germ_value(U, sigma)
            vv = germ_value(V, np.conj(sigma))
            return np.array([np.vdot(vv[n], R.evaluate(s - 1j * k) @ uu[n]) for n, s in enumerate(sigma)])

        total += contour_integral(integrand, z, radius, tol, n_nodes)
    return total


def _point_groups(basis):
    groups = {}
    for n, element in enumerate(basis.elements):
        groups.setdefault(element.sigma0, []).append(n)
    return list(groups.items())


def _assemble(model, basisE, basisEstar, entry, tol, workers, route):
    rows, cols = list(basisE.labels), list(basisEstar.labels)
    G = np.zeros((len(rows), len(cols)), dtype=complex)
    tasks = []
    blocks = {}
    for sigma0, r_idx in _point_groups(basisE):
        for sigma_star, c_idx in _point_groups(basisEstar):
            tau = conjugate_shift(sigma0, sigma_star, tol)
            if tau is None:
                continue
            blocks[(sigma0, sigma_star)] = tau
            tasks.append((r_idx, c_idx, tau))

    def compute(task):
        r_idx, c_idx, tau = task
        block = np.zeros((len(r_idx), len(c_idx)), dtype=complex)
        for a, r in enumerate(r_idx):
            for b, c in enumerate(c_idx):
                block[a, b] = entry(model, basisE.elements[r], basisEstar.elements[c], tau)
        return block

    if workers and workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(compute, tasks))
    else:
        results = [compute(t) for t in tasks]
    for (r_idx, c_idx, _), block in zip(tasks, results):
        G[np.ix_(r_idx, c_idx)] = block
    logger.debug(f"Матрица Грама {G.shape} собрана ({route}), блоков {len(tasks)}")
    return PairingGram(rows=rows, cols=cols, G=G, blocks=blocks, route=route)


def pairing_gram(model, basisE, basisEstar, tol=DEFAULT_TOLERANCES, workers=WORKERS):
    """
    Полная матрица Грама между E(A) и E(A^⋆) в замкнутой форме.

    Блоки для пар точек, не связанных соотношением σ_0 = conj(σ_0^⋆) + iτ, равны нулю.
    """
    return _assemble(
        model, basisE, basisEstar,
        lambda m, u, v, tau: closed_form_entry(m, u, v, tau, tol),
        tol, workers, "closed-form",
    )


def contour_gram(model, basisE, basisEstar, radius=None, tol=DEFAULT_TOLERANCES, n_nodes=None, workers=WORKERS):
    """Матрица Грама, каждый вычет которой взят контурной квадратурой."""
    points = [p.sigma0 for p in basisE.points]
    shifted = points + [p - 1j * t for p in points for t in range(1, model.N + 1)]
    if radius is None:
        radius = min([default_radius(p, shifted) for p in points] or [1.0])
    return _assemble(
        model, basisE, basisEstar,
        lambda m, u, v, tau: contour_entry(m, u, v, tau, radius, tol, n_nodes),
        tol, workers, "contour",
    )


def nondegeneracy_check(gram, per_point=False, tol=DEFAULT_TOLERANCES):
    """
    Невырожденность спаривания: |det| блока с нормированными строками больше tol_det.

    per_point=True проверяет только диагональные (τ = 0) блоки; иначе также всю матрицу.
    """

    def healthy(matrix, where):
        if matrix.shape[0] != matrix.shape[1]:
            logger.warning(f"{where}: блок {matrix.shape} не квадратный")
            return False
        if matrix.size == 0:
            return True
        norms = np.linalg.norm(matrix, axis=1)
        if np.any(norms == 0):
            logger.warning(f"{where}: нулевая строка")
            return False
        value = abs(linalg.det(matrix / norms[:, None]))
        if value <= tol.tol_det:
            logger.warning(f"{where}: |det| = {value:.3e} не превышает {tol.tol_det:g}")
            return False
        return True

    verdict = True
    for (sigma0, sigma_star), tau in gram.blocks.items():
        if tau == 0:
            verdict &= healthy(gram.block(sigma0, sigma_star), f"блок ({sigma0:.6g}, {sigma_star:.6g})")
    if not per_point:
        verdict &= healthy(gram.G, "вся матрица Грама")
    return bool(verdict)
