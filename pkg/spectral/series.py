"""
Усечённые ряды Тейлора и Лорана: ростки, матричные ряды, тёплицевы ранги.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import BlockNotInvertible, BasePointMismatch, TruncationTooShort

logger = logging.getLogger(__name__)


def _as_rows(rows, d):
    arr = np.asarray(rows, dtype=complex)
    if arr.size == 0:
        return np.zeros((0, d), dtype=complex)
    return arr.reshape(-1, d)


@dataclass(frozen=True, eq=False)
class LaurentGerm:
    """
    Росток вектор-функции в точке sigma0.

    principal[m]: коэффициент при (σ−σ_0)^{−μ+m}, m = 0..μ−1;
    tail[n]: коэффициент при (σ−σ_0)^n, n = 0..L.
    """

    sigma0: complex
    principal: np.ndarray
    tail: np.ndarray = field(default=None)

    def __post_init__(self):
        principal = np.asarray(self.principal, dtype=complex)
        tail = np.asarray(self.tail if self.tail is not None else [], dtype=complex)
        if principal.ndim == 2 and principal.shape[1] > 0:
            d = principal.shape[1]
        elif tail.ndim == 2 and tail.shape[1] > 0:
            d = tail.shape[1]
        elif principal.ndim == 1 and principal.size:
            d = principal.size
        else:
            d = 1
        object.__setattr__(self, "principal", _as_rows(principal, d))
        object.__setattr__(self, "tail", _as_rows(tail, d))
        object.__setattr__(self, "sigma0", complex(self.sigma0))

    @classmethod
    def zero(cls, sigma0, d):
        return cls(sigma0, np.zeros((0, d), dtype=complex))

    @classmethod
    def from_coefficients(cls, sigma0, coeffs, offset):
        """Собрать росток из коэффициентов c_offset, c_{offset+1}, ... (строки массива)."""
        coeffs = np.asarray(coeffs, dtype=complex)
        d = coeffs.shape[1]
        start = max(0, -offset)
        if coeffs.shape[0] < start:
            coeffs = np.vstack([coeffs, np.zeros((start - coeffs.shape[0], d), dtype=complex)])
        principal = coeffs[:start] if offset < 0 else np.zeros((0, d), dtype=complex)
        tail_from = coeffs[start:]
        if offset > 0:
            tail_from = np.vstack([np.zeros((offset, d), dtype=complex), tail_from])
        return cls(sigma0, principal, tail_from)

    @property
    def d(self):
        return self.principal.shape[1]

    @property
    def order(self):
        """Длина главной части (порядок полюса, если старший коэффициент ненулевой)."""
        return self.principal.shape[0]

    @property
    def truncation(self):
        return self.tail.shape[0] - 1

    def coefficient(self, n):
        """Коэффициент при (σ−σ_0)^n; ноль вне хранимого диапазона."""
        if n < 0:
            m = self.order + n
            return self.principal[m] if m >= 0 else np.zeros(self.d, dtype=complex)
        return self.tail[n] if n < self.tail.shape[0] else np.zeros(self.d, dtype=complex)

    def dense(self):
        """Пара (смещение, массив коэффициентов подряд от c_{−μ})."""
        return -self.order, np.vstack([self.principal, self.tail])

    def principal_part(self):
        return LaurentGerm(self.sigma0, self.principal.copy())

    def rebased(self, sigma0):
        """Тот же набор коэффициентов в переменной σ − sigma0 (сдвиг аргумента)."""
        return LaurentGerm(sigma0, self.principal.copy(), self.tail.copy())

    def trimmed(self, tol=0.0):
        """Отбросить нулевые старшие коэффициенты главной части."""
        principal = self.principal
        while principal.shape[0] and np.linalg.norm(principal[0]) <= tol:
            principal = principal[1:]
        return LaurentGerm(self.sigma0, principal, self.tail)

    def scaled(self, c):
        return LaurentGerm(self.sigma0, c * self.principal, c * self.tail)

    def times_power(self, ell):
        """Умножение на (σ−σ_0)^ell, ell ≥ 0."""
        offset, coeffs = self.dense()
        return LaurentGerm.from_coefficients(self.sigma0, coeffs, offset + ell)

    def mapped(self, matrix):
        """Применить постоянную матрицу ко всем коэффициентам."""
        matrix = np.asarray(matrix, dtype=complex)
        return LaurentGerm(self.sigma0, self.principal @ matrix.T, self.tail @ matrix.T)

    def is_holomorphic(self, tol=0.0):
        return not self.order or float(np.max(np.linalg.norm(self.principal, axis=1))) <= tol

    def principal_norm(self):
        return float(np.linalg.norm(self.principal)) if self.order else 0.0

    def to_json(self):
        return {
            "sigma0": [self.sigma0.real, self.sigma0.imag],
            "principal": [[[z.real, z.imag] for z in row] for row in self.principal],
            "tail": [[[z.real, z.imag] for z in row] for row in self.tail],
        }


def combine(germs, weights, d=None):
    """
    Линейная комбинация ростков в общей точке.

    Args:
        germs (list[LaurentGerm]): Ростки с одинаковой базовой точкой
        weights (Iterable[complex]): Коэффициенты

    Returns:
        LaurentGerm: Сумма с выровненными главными частями и хвостами

    Raises:
        BasePointMismatch: Если базовые точки различаются
    """
    germs = list(germs)
    weights = list(weights)
    if not germs:
        return LaurentGerm.zero(0.0, d or 1)
    sigma0 = germs[0].sigma0
    if any(abs(g.sigma0 - sigma0) > 1e-12 * max(1.0, abs(sigma0)) for g in germs):
        raise BasePointMismatch("ростки заданы в разных точках")
    mu = max(g.order for g in germs)
    length = max(g.tail.shape[0] for g in germs)
    dim = germs[0].d
    principal = np.zeros((mu, dim), dtype=complex)
    tail = np.zeros((length, dim), dtype=complex)
    for g, w in zip(germs, weights):
        if g.order:
            principal[mu - g.order:] += w * g.principal
        if g.tail.shape[0]:
            tail[:g.tail.shape[0]] += w * g.tail
    return LaurentGerm(sigma0, principal, tail)


def matrix_series_mul(a, b, order):
    """Произведение матричных рядов Тейлора a(h)·b(h) до степени order включительно."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out = np.zeros((order + 1, a.shape[1], b.shape[2]), dtype=complex)
    for n in range(order + 1):
        for k in range(max(0, n - b.shape[0] + 1), min(n, a.shape[0] - 1) + 1):
            out[n] += a[k] @ b[n - k]
    return out


def apply_series(matrix_coeffs, offset_m, vec_coeffs, offset_v, lo, hi):
    """
    Коэффициенты произведения матричного ряда на векторный с индексами lo..hi.

    Args:
        matrix_coeffs (np.ndarray): Массив (n, r, c), первый индекс ↔ степень offset_m
        vec_coeffs (np.ndarray): Массив (m, c), первый индекс ↔ степень offset_v

    Returns:
        np.ndarray: Массив (hi−lo+1, r)
    """
    matrix_coeffs = np.asarray(matrix_coeffs, dtype=complex)
    vec_coeffs = np.asarray(vec_coeffs, dtype=complex)
    rows = matrix_coeffs.shape[1]
    out = np.zeros((hi - lo + 1, rows), dtype=complex)
    for a in range(matrix_coeffs.shape[0]):
        for b in range(vec_coeffs.shape[0]):
            n = a + offset_m + b + offset_v
            if lo <= n <= hi:
                out[n - lo] += matrix_coeffs[a] @ vec_coeffs[b]
    return out


def taylor_inverse(coeffs, order, cond_limit=1e10):
    """
    Ряд Тейлора обратной матрицы: Y_0 = C_0^{-1}, Y_n = −Y_0 Σ_{k=1}^{n} C_k Y_{n−k}.

    Raises:
        BlockNotInvertible: Если число обусловленности C_0 превышает cond_limit
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    size = coeffs.shape[1]
    out = np.zeros((order + 1, size, size), dtype=complex)
    if size == 0:
        return out
    cond = np.linalg.cond(coeffs[0])
    if not np.isfinite(cond) or cond > cond_limit:
        raise BlockNotInvertible(f"число обусловленности {cond:.3e} превышает {cond_limit:.1e}")
    out[0] = linalg.inv(coeffs[0])
    for n in range(1, order + 1):
        acc = np.zeros((size, size), dtype=complex)
        for k in range(1, min(n, coeffs.shape[0] - 1) + 1):
            acc += coeffs[k] @ out[n - k]
        out[n] = -out[0] @ acc
    return out


def block_toeplitz(coeffs, n):
    """Нижняя блочно-тёплицева матрица с блоками C_0..C_n (блок (i, j) равен C_{i−j})."""
    coeffs = np.asarray(coeffs, dtype=complex)
    r, c = coeffs.shape[1], coeffs.shape[2]
    out = np.zeros(((n + 1) * r, (n + 1) * c), dtype=complex)
    for i in range(n + 1):
        for j in range(i + 1):
            if i - j < coeffs.shape[0]:
                out[i * r:(i + 1) * r, j * c:(j + 1) * c] = coeffs[i - j]
    return out


def toeplitz_kernel_counts(coeffs, tol_rank, max_order, scale=None):
    """
    Размерности ядер T_0, T_1, ... до стабилизации.

    dim ker T_n = Σ_j min(μ_j, n+1), поэтому приращения считают цепочки длины > n.

    Args:
        scale (float): Масштаб порога; по умолчанию max(1, max_q ‖C_q‖)

    Returns:
        list[int]: counts[n] = #{j : μ_j ≥ n+1}, последний элемент равен нулю

    Raises:
        TruncationTooShort: Если стабилизации нет до max_order
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if scale is None:
        scale = max([1.0] + [float(np.linalg.norm(c, 2)) for c in coeffs])
    threshold = tol_rank * scale
    counts = []
    previous = 0
    for n in range(max_order + 1):
        if n >= coeffs.shape[0]:
            padded = np.concatenate([coeffs, np.zeros((n + 1 - coeffs.shape[0],) + coeffs.shape[1:], dtype=complex)])
        else:
            padded = coeffs
        toeplitz = block_toeplitz(padded, n)
        s = linalg.svd(toeplitz, compute_uv=False)
        kernel = toeplitz.shape[1] - int(np.sum(s > threshold))
        counts.append(kernel - previous)
        logger.debug(f"Тёплицев ранг: n={n}, dim ker={kernel}")
        if counts[-1] <= 0:
            counts[-1] = 0
            return counts
        previous = kernel
    raise TruncationTooShort(f"ранги тёплицевых матриц не стабилизировались до порядка {max_order}")


def multiplicities_from_counts(counts):
    """Частные кратности (по убыванию) из приращений размерностей ядер."""
    mults = []
    for m in range(len(counts) - 1, 0, -1):
        mults.extend([m] * max(0, counts[m - 1] - counts[m]))
    return mults


def laurent_inverse(coeffs, pole, order):
    """
    Лорановское разложение обратной к голоморфной матричной функции.

    Решает Σ_q C_q X_{n−q} = δ_{n0} I для n = −pole..order+pole методом
    наименьших квадратов и оставляет X_{−pole}..X_order, которые
    определены однозначно.

    Args:
        coeffs (np.ndarray): Коэффициенты Тейлора C_0, C_1, ... (квадратные)
        pole (int): Верхняя оценка порядка полюса
        order (int): Последний нужный индекс

    Returns:
        np.ndarray: Массив (pole+order+1, r, r), элемент k ↔ X_{k−pole}
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    size = coeffs.shape[1]
    top = order + pole
    count = top + pole + 1
    padded = np.zeros((count, size, size), dtype=complex)
    padded[:min(count, coeffs.shape[0])] = coeffs[:count]
    system = block_toeplitz(padded, count - 1)
    rhs = np.zeros((count * size, size), dtype=complex)
    rhs[pole * size:(pole + 1) * size] = np.eye(size)
    solution, *_ = linalg.lstsq(system, rhs)
    blocks = solution.reshape(count, size, size)
    return blocks[:pole + order + 1]


def scalar_series_sqrt(a, order):
    """Квадратный корень скалярного ряда с a_0 ≠ 0 (главная ветвь в a_0)."""
    a = np.asarray(a, dtype=complex)
    s = np.zeros(order + 1, dtype=complex)
    s[0] = np.sqrt(a[0])
    for n in range(1, order + 1):
        acc = a[n] if n < a.shape[0] else 0.0
        acc -= np.sum(s[1:n] * s[n - 1:0:-1])
        s[n] = acc / (2 * s[0])
    return s


def scalar_series_div(a, b, order):
    """Частное скалярных рядов a/b при b_0 ≠ 0."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    q = np.zeros(order + 1, dtype=complex)
    for n in range(order + 1):
        acc = a[n] if n < a.shape[0] else 0.0
        for k in range(1, min(n, b.shape[0] - 1) + 1):
            acc -= b[k] * q[n - k]
        q[n] = acc / b[0]
    return q
