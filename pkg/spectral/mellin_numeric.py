"""
Численный слой Меллина: срезающая функция ω, модельные функции
c·ω(x)·x^{iσ_0}·(log x)^k, функция Φ, квадратуры во взвешенном L² и
прямое вычисление [u, v]_A = (Au, v) − (u, A^⋆v) для скалярных моделей.

Соглашения: D_x = −i d/dx, û(σ) = ∫ x^{−iσ} u(x) dx/x, скалярное
произведение ∫_0^1 u·v̄·x^{ν−1} dx; все интегралы берутся по t = log x.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import sympy
from numpy.polynomial import polynomial as npoly

from config import CACHE_SIZE, DEFAULT_TOLERANCES
from .errors import Divergent, ModelFormatError, NotScalar, QuadratureFailure
from .pencil_core import formal_adjoint
from .series import LaurentGerm

logger = logging.getLogger(__name__)

# Нижний предел интегрирования по x
X_FLOOR = 1e-12
# Порядок правила Гаусса–Лежандра на одной панели
PANEL_ORDER = 16
# Коэффициенты с модулем ниже этого порога считаются нулевыми
COEFF_FLOOR = 1e-13


@lru_cache(maxsize=None)
def _symbolic_profile(x_lo, x_hi, kind, order):
    """Лямбдифицированная производная ω: kind = "x" для d^n/dx^n, "dilation" для (−i·x·d/dx)^n."""
    x = sympy.Symbol("x", positive=True)
    s = (x_hi - x) / (x_hi - x_lo)
    expr = 1 / (1 + sympy.exp(1 / s - 1 / (1 - s)))
    for _ in range(order):
        expr = sympy.diff(expr, x) if kind == "x" else -sympy.I * x * sympy.diff(expr, x)
    return sympy.lambdify(x, expr, "numpy")


@dataclass(frozen=True)
class CutoffProfile:
    """ω(x) = S((x_hi − x)/(x_hi − x_lo)), S(s) = 1/(1 + exp(1/s − 1/(1−s))); ω = 1 при x ≤ x_lo, 0 при x ≥ x_hi."""

    x_lo: float = 0.25
    x_hi: float = 0.75

    def __post_init__(self):
        if not 0 < self.x_lo < self.x_hi < 1:
            raise ModelFormatError(f"срезка: требуется 0 < x_lo < x_hi < 1, получено ({self.x_lo}, {self.x_hi})")

    def _evaluate(self, x, kind, order):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        if order == 0:
            out[x <= self.x_lo] = 1.0
        inside = (x > self.x_lo) & (x < self.x_hi)
        if np.any(inside):
            fn = _symbolic_profile(self.x_lo, self.x_hi, kind, order)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                values = np.asarray(fn(x[inside]), dtype=complex) * np.ones(int(np.sum(inside)))
            values[~np.isfinite(values)] = 0.0
            out[inside] = values
        return out

    def __call__(self, x):
        return self._evaluate(x, "x", 0).real

    def derivative(self, order):
        """Функция x ↦ ω^{(order)}(x)."""
        return lambda x: self._evaluate(x, "x", order).real

    def dilation_derivative(self, order):
        """Функция x ↦ ((xD_x)^order ω)(x)."""
        return lambda x: self._evaluate(x, "dilation", order)


def default_profile(tol=DEFAULT_TOLERANCES):
    return CutoffProfile(tol.cutoff_lo, tol.cutoff_hi)


@dataclass(frozen=True)
class ModelTerm:
    """
    c·((xD_x)^j ω)(x)·x^{iσ_0}·(log x)^k·e; j > 0: остаток с компактным носителем.

    direction: вектор e ∈ C^d; None означает скалярную функцию (d = 1).
    """

    c: complex
    sigma0: complex
    k: int
    j: int = 0
    direction: Optional[tuple] = None

    @property
    def key(self):
        return (self.sigma0, self.k, self.j, self.direction)

    @property
    def vector(self):
        if self.direction is None:
            return np.ones(1, dtype=complex)
        return np.asarray(self.direction, dtype=complex)


@dataclass(frozen=True, eq=False)
class ModelFunction:
    terms: tuple
    label: str = ""
    profile: Optional[CutoffProfile] = field(default=None)

    def __post_init__(self):
        merged = {}
        for term in self.terms:
            direction = tuple(complex(z) for z in term.direction) if term.direction is not None else None
            key = (complex(term.sigma0), int(term.k), int(term.j), direction)
            merged[key] = merged.get(key, 0j) + complex(term.c)
        terms = tuple(ModelTerm(c, s, k, j, e) for (s, k, j, e), c in merged.items() if abs(c) > 0)
        sizes = {len(t.vector) for t in terms}
        if len(sizes) > 1:
            raise ModelFormatError(f"функция {self.label!r}: направления разной длины {sorted(sizes)}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def power_log(cls, sigma0, k=0, c=1.0, label="", direction=None):
        direction = tuple(complex(z) for z in direction) if direction is not None else None
        return cls((ModelTerm(complex(c), complex(sigma0), k, 0, direction),), label=label)

    @property
    def d(self):
        return len(self.terms[0].vector) if self.terms else 1

    @property
    def exponents(self):
        return sorted({t.sigma0 for t in self.terms if t.j == 0}, key=lambda z: (-z.imag, z.real))

    def scaled(self, c):
        terms = tuple(ModelTerm(c * t.c, t.sigma0, t.k, t.j, t.direction) for t in self.terms)
        return ModelFunction(terms, self.label, self.profile)

    def __add__(self, other):
        return ModelFunction(self.terms + other.terms, self.label or other.label, self.profile or other.profile)

    def resolved_profile(self, profile=None, tol=DEFAULT_TOLERANCES):
        return profile or self.profile or default_profile(tol)

    def vector_values(self, t, profile=None, tol=DEFAULT_TOLERANCES):
        """Значения в точках x = e^t, массив (n, d)."""
        profile = self.resolved_profile(profile, tol)
        t = np.asarray(t, dtype=float)
        x = np.exp(t)
        out = np.zeros(t.shape + (self.d,), dtype=complex)
        cut = {}
        for term in self.terms:
            if term.j not in cut:
                cut[term.j] = profile.dilation_derivative(term.j)(x) if term.j else profile(x).astype(complex)
            scalar = term.c * cut[term.j] * np.exp(1j * term.sigma0 * t) * t ** term.k
            out += scalar[..., None] * term.vector
        return out

    def evaluate_log(self, t, profile=None, tol=DEFAULT_TOLERANCES):
        """Значения функции в точках x = e^t (для d = 1 одномерный массив)."""
        values = self.vector_values(t, profile, tol)
        return values[..., 0] if self.d == 1 else values

    def to_json(self):
        rows = []
        for t in self.terms:
            if t.j:
                continue
            row = [[t.c.real, t.c.imag], [t.sigma0.real, t.sigma0.imag], t.k]
            if t.direction is not None:
                row.append([[z.real, z.imag] for z in t.vector])
            rows.append(row)
        return {"label": self.label, "terms": rows}


@lru_cache(maxsize=8)
def _gauss_legendre(order):
    return np.polynomial.legendre.leggauss(order)


def _panel(f, a, b, order):
    nodes, weights = _gauss_legendre(order)
    half = (b - a) / 2
    t = a + half * (nodes + 1)
    values = np.asarray(f(t))
    return half * np.tensordot(weights, values, axes=(0, 0))


def adaptive_quad(f, a, b, tol=DEFAULT_TOLERANCES, breakpoints=(), order=PANEL_ORDER):
    """
    Составное правило Гаусса–Лежандра с делением панели с наибольшей оценкой ошибки.

    Args:
        f (Callable): Функция массива узлов; возвращает массив (n,) или (n, m)
        a, b (float): Пределы
        tol (Tolerances): quad_rtol и quad_max_nodes
        breakpoints (Iterable[float]): Начальные точки разбиения

    Returns:
        complex | np.ndarray: Значение интеграла

    Raises:
        QuadratureFailure: Если точность не достигнута до исчерпания панелей
    """
    edges = sorted({a, b} | {p for p in breakpoints if a < p < b})
    max_panels = max(4, tol.quad_max_nodes // order)

    def assess(lo, hi):
        mid = (lo + hi) / 2
        whole = _panel(f, lo, hi, order)
        halves = _panel(f, lo, mid, order) + _panel(f, mid, hi, order)
        return [lo, hi, halves, float(np.max(np.abs(halves - whole)))]

    panels = [assess(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    while True:
        total = sum(p[2] for p in panels)
        error = sum(p[3] for p in panels)
        scale = max(float(np.max(np.abs(total))), 1e-300)
        if error <= tol.quad_rtol * scale or error <= 1e-15:
            return total
        if len(panels) >= max_panels:
            raise QuadratureFailure(f"квадратура: оценка ошибки {error:.3e} при {len(panels)} панелях")
        worst = max(range(len(panels)), key=lambda n: panels[n][3])
        lo, hi, _, _ = panels.pop(worst)
        mid = (lo + hi) / 2
        panels.extend([assess(lo, mid), assess(mid, hi)])


def phi_values(z, profile=None, tol=DEFAULT_TOLERANCES):
    """Φ(z) = −i∫ W′(t)·e^{−izt} dt, W(t) = ω(e^t), для массива z."""
    profile = profile or default_profile(tol)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    first = profile.derivative(1)

    def integrand(t):
        w = first(np.exp(t)) * np.exp(t)
        return -1j * w[:, None] * np.exp(-1j * np.outer(t, z))

    return adaptive_quad(integrand, math.log(profile.x_lo), math.log(profile.x_hi), tol)


def phi(sigma, profile=None, tol=DEFAULT_TOLERANCES):
    """
    Значение Φ(σ); Φ целая и Φ(0) = i для любой допустимой срезки.

    Raises:
        QuadratureFailure
    """
    return complex(phi_values([sigma], profile, tol)[0])


@lru_cache(maxsize=CACHE_SIZE)
def _phi_taylor_cached(count, profile, radius, nodes, tol):
    angles = 2 * np.pi * np.arange(nodes) / nodes
    values = phi_values(radius * np.exp(1j * angles), profile, tol)
    coeffs = np.fft.fft(values) / nodes
    out = coeffs[:count] / radius ** np.arange(count)
    logger.debug(f"Коэффициенты Тейлора Φ: {count} шт., срезка ({profile.x_lo}, {profile.x_hi})")
    return tuple(out)


def phi_taylor(count, profile=None, tol=DEFAULT_TOLERANCES):
    """Первые count коэффициентов Тейлора Φ в нуле (интеграл Коши на окружности phi_radius)."""
    profile = profile or default_profile(tol)
    if count > tol.phi_nodes // 2:
        raise QuadratureFailure(f"запрошено {count} коэффициентов Φ при {tol.phi_nodes} узлах")
    return np.array(_phi_taylor_cached(count, profile, tol.phi_radius, tol.phi_nodes, tol))


def mellin_germ(u, sigma0, profile=None, tol=DEFAULT_TOLERANCES, tail_order=0):
    """
    Росток û в σ_0 по формуле M[ω x^{is}(log x)^k](σ) = i^k·F^{(k)}(σ − s), F(z) = Φ(z)/z.

    Главная часть слагаемого: i^k·Φ(0)·(−1)^k·k!/(σ−s)^{k+1}. Хвост (до tail_order)
    содержит только вклады слагаемых с показателем σ_0; остальные слагаемые и
    остатки с производными ω голоморфны в σ_0.

    Returns:
        LaurentGerm: Росток в C^d, d = u.d
    """
    profile = u.resolved_profile(profile, tol)
    sigma0 = complex(sigma0)
    own = [
        t for t in u.terms
        if t.j == 0 and abs(t.sigma0 - sigma0) <= tol.tol_cluster * max(1.0, abs(sigma0))
    ]
    if not own:
        return LaurentGerm(sigma0, np.zeros((0, u.d)), np.zeros((tail_order + 1, u.d)) if tail_order else None)
    depth = max(t.k for t in own) + 1
    phi0 = phi(0.0, profile, tol)
    principal = np.zeros((depth, u.d), dtype=complex)
    tail = np.zeros((tail_order + 1, u.d), dtype=complex)
    taylor = phi_taylor(tail_order + depth + 1, profile, tol) if tail_order else None
    for t in own:
        principal[depth - t.k - 1] += t.c * (1j ** t.k) * phi0 * (-1) ** t.k * math.factorial(t.k) * t.vector
        if tail_order:
            for n in range(tail_order + 1):
                tail[n] += t.c * (1j ** t.k) * taylor[n + 1 + t.k] * math.factorial(n + t.k) / math.factorial(n) * t.vector
    return LaurentGerm(sigma0, principal, tail if tail_order else None).trimmed(COEFF_FLOOR)


def _dilation_matrix(s, m):
    """Матрица xD_x на span{x^{is}(log x)^n, n = 0..m}: e_n ↦ s·e_n − i·n·e_{n−1}."""
    D = np.diag(np.full(m + 1, s, dtype=complex))
    for n in range(1, m + 1):
        D[n - 1, n] = -1j * n
    return D


def _apply_poly(coeffs, s, m):
    """R(xD_x) на x^{is}(log x)^m: коэффициенты при (log x)^n."""
    D = _dilation_matrix(s, m)
    e = np.zeros(m + 1, dtype=complex)
    e[m] = 1
    out = np.zeros(m + 1, dtype=complex)
    for a in coeffs[::-1]:
        out = D @ out + a * e
    return out


def apply_model(model, u):
    """
    Действие A = x^{−ν} Σ_k R_k(xD_x)·x^k на модельную функцию (только d = 1).

    По формуле Лейбница R(δ)(ω_j·g) = Σ_i ω_{j+i}·R^{(i)}(δ)g/i!, где δ = xD_x и
    ω_j = δ^j ω; слагаемые с i > 0: остатки с носителем в [x_lo, x_hi].

    Raises:
        NotScalar: Если d ≠ 1
    """
    if model.d != 1:
        raise NotScalar(f"модель {model.label}: прямое вычисление определено только при d = 1")
    terms = []
    for k in range(model.N):
        R = model.effective(k).coeffs[:, 0, 0]
        if not np.any(R):
            continue
        for term in u.terms:
            s = term.sigma0 - 1j * k
            derived = R.copy()
            for i in range(len(R)):
                if i:
                    derived = npoly.polyder(derived)
                values = _apply_poly(derived, s, term.k)
                for n, w in enumerate(values):
                    c = term.c * w / math.factorial(i)
                    if abs(c) > COEFF_FLOOR:
                        # x^{−ν} сдвигает показатель на iν
                        terms.append(ModelTerm(c, s + 1j * model.nu, n, term.j + i))
    return ModelFunction(tuple(terms), label=f"A·{u.label}" if u.label else "", profile=u.profile)


def _decay_rate(u, v, nu):
    """Наименьшая скорость убывания |u·v̄|·e^{νt} при t → −∞ по главным слагаемым."""
    rates = [
        nu - a.sigma0.imag - b.sigma0.imag
        for a in u.terms if a.j == 0
        for b in v.terms if b.j == 0
    ]
    return min(rates) if rates else math.inf


def weighted_inner(u, v, nu, profile=None, tol=DEFAULT_TOLERANCES):
    """
    (u, v) = ∫_0^1 u·v̄·x^{ν−1} dx = ∫ u·v̄·e^{νt} dt.

    Raises:
        Divergent: Если интеграл расходится в нуле
        QuadratureFailure
    """
    if u.d != v.d:
        raise ModelFormatError(f"скалярное произведение функций со значениями в C^{u.d} и C^{v.d}")
    profile = profile or u.profile or v.profile or default_profile(tol)
    rate = _decay_rate(u, v, nu)
    if rate <= tol.tol_edge:
        raise Divergent(f"скорость убывания {rate:.3g} ≤ 0: (u, v) расходится в нуле")
    lower = math.log(X_FLOOR)
    if math.isfinite(rate):
        lower = min(lower, -40.0 / rate)
    else:
        lower = math.log(profile.x_lo) - 1.0

    def integrand(t):
        values = u.vector_values(t, profile, tol) * np.conj(v.vector_values(t, profile, tol))
        return np.sum(values, axis=-1) * np.exp(nu * t)

    upper = math.log(profile.x_hi)
    breaks = (math.log(profile.x_lo),)
    return complex(adaptive_quad(integrand, lower, upper, tol, breaks))


def green_pairing_direct(model, u, v, profile=None, tol=DEFAULT_TOLERANCES):
    """
    [u, v]_A = (Au, v) − (u, A^⋆v) в x-пространстве; независимый оракул для вычетных формул.

    Raises:
        NotScalar, Divergent, QuadratureFailure
    """
    if model.d != 1:
        raise NotScalar(f"модель {model.label}: прямое вычисление определено только при d = 1")
    profile = profile or u.profile or v.profile or default_profile(tol)
    Au = apply_model(model, u)
    Av = apply_model(formal_adjoint(model), v)
    value = weighted_inner(Au, v, model.nu, profile, tol) - weighted_inner(u, Av, model.nu, profile, tol)
    logger.debug(f"[{u.label}, {v.label}]_A по формуле Грина: {value:.12g}")
    return value
