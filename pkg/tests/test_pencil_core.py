"""
Тесты для матричных многочленов, моделей и граничного спектра.
"""

import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from config import DEFAULT_TOLERANCES
from spectral.errors import ModelFormatError, NotSymmetric, RootOnBoundary
from spectral.generators import engineered_pencil
from spectral.local_chains import partial_multiplicities, singular_chains
from spectral.pencil_core import (
    ConeModel, MatrixPolynomial, boundary_spectrum, eval, formal_adjoint, local_multiplicity,
    positivity_check, symmetry_check,
)


def by_position(item):
    return (item[0].real, item[0].imag)


def scalar_model(coeffs, nu=2.0, extra=None, **kwargs):
    indicial = [MatrixPolynomial.scalar(coeffs)] + [MatrixPolynomial.scalar(c) for c in (extra or [[0.0]])]
    return ConeModel(nu=nu, indicial=tuple(indicial[:int(np.ceil(nu))]), **kwargs)


class TestMatrixPolynomial(unittest.TestCase):
    """Тесты для вычисления и преобразований символов."""

    def test_identity_pencil_at_origin(self):
        P = MatrixPolynomial(np.array([np.zeros((2, 2)), np.eye(2)]))
        assert_allclose(eval(P, 0.0), np.zeros((2, 2)))

    def test_scalar_root(self):
        """σ² + 4 обращается в ноль в σ = 2i."""
        P = MatrixPolynomial.scalar([4.0, 0.0, 1.0])
        self.assertAlmostEqual(abs(eval(P, 2j)[0, 0]), 0.0, places=14)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_horner_matches_power_sum(self, seed):
        rng = np.random.default_rng(seed)
        coeffs = rng.standard_normal((4, 3, 3)) + 1j * rng.standard_normal((4, 3, 3))
        sigma = 1.7 - 0.3j
        naive = sum(coeffs[k] * sigma ** k for k in range(4))
        assert_allclose(eval(MatrixPolynomial(coeffs), sigma), naive, rtol=1e-13, atol=1e-13)

    def test_shifted_polynomial(self):
        """shifted(δ) задаёт σ ↦ P̂(σ + δ)."""
        P = MatrixPolynomial.scalar([1.0, 2.0, 3.0])
        Q = P.shifted(0.5j)
        for sigma in (0.0, 1.0, -2.0 + 1j):
            assert_allclose(Q.evaluate(sigma), P.evaluate(sigma + 0.5j))

    def test_rejects_non_square(self):
        with self.assertRaises(ModelFormatError):
            MatrixPolynomial(np.zeros((2, 2, 3)))

    def test_rank_scale(self):
        """max(1, Σ‖A_k‖·|σ_0|^k)."""
        P = MatrixPolynomial.scalar([0.25, 0.0, 1.0])
        self.assertAlmostEqual(P.scale_at(2j), 4.25)
        self.assertEqual(P.scale_at(0.1), 1.0)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_multiplicities_survive_constant_equivalence(self, seed):
        """E·P̂·F с постоянными унитарными E, F сохраняет частные кратности."""
        rng = np.random.default_rng(seed)
        P, expected = engineered_pencil(rng, 3, [2, 0, 1], 0.3 - 0.2j)
        E = unitary_group.rvs(3, random_state=rng)
        F = unitary_group.rvs(3, random_state=rng)
        Q = P.conjugated(E, F)
        assert_allclose(Q.evaluate(0.7), E @ P.evaluate(0.7) @ F, atol=1e-12)
        self.assertEqual(partial_multiplicities(Q, 0.3 - 0.2j, DEFAULT_TOLERANCES), expected)
        self.assertEqual(list(singular_chains(Q, 0.3 - 0.2j, DEFAULT_TOLERANCES).mults), expected)


class TestConeModel(unittest.TestCase):
    """Тесты для проверок модели."""

    def test_indicial_length_must_match_nu(self):
        with self.assertRaises(ModelFormatError):
            ConeModel(nu=2.0, indicial=(MatrixPolynomial.scalar([0.0, 0.0, 1.0]),))

    def test_singular_leading_coefficient(self):
        P = MatrixPolynomial(np.array([np.eye(2), np.diag([1.0, 0.0])]))
        with self.assertRaises(ModelFormatError):
            ConeModel(nu=1.0, indicial=(P,))

    def test_left_placement_effective(self):
        """x·P_1(xD_x) записывается как P_1(xD_x + i)·x."""
        model = ConeModel(
            nu=2.0,
            indicial=(MatrixPolynomial.scalar([0.0, 0.0, 1.0]), MatrixPolynomial.scalar([0.0, 1.0])),
            placement="left",
        )
        self.assertAlmostEqual(model.effective(1).evaluate(0.0)[0, 0], 1j)
        self.assertTrue(model.effective(5).is_zero())


class TestBoundarySpectrum(unittest.TestCase):
    """Тесты для граничного спектра в полосе."""

    tol = DEFAULT_TOLERANCES

    def test_double_root(self):
        points = boundary_spectrum(scalar_model([0.0, 0.0, 1.0]), (-1, 1), self.tol)
        self.assertEqual(len(points), 1)
        self.assertAlmostEqual(abs(points[0].sigma0), 0.0, places=6)
        self.assertEqual(points[0].algebraic_mult, 2)

    def test_order_by_imaginary_part(self):
        """σ² + 0.36: сначала 0.6i, затем −0.6i."""
        points = boundary_spectrum(scalar_model([0.36, 0.0, 1.0]), (-1, 1), self.tol)
        assert_allclose([p.sigma0 for p in points], [0.6j, -0.6j], atol=1e-10)
        self.assertEqual([p.algebraic_mult for p in points], [1, 1])

    def test_roots_outside_strip(self):
        P = MatrixPolynomial(np.array([-(2 + 5j) * np.eye(3), np.eye(3)]))
        model = ConeModel(nu=2.0, indicial=(P, MatrixPolynomial.zero(3)))
        self.assertEqual(boundary_spectrum(model, (-1, 1), self.tol), [])

    def test_root_on_boundary(self):
        with self.assertRaises(RootOnBoundary):
            boundary_spectrum(scalar_model([1.0, 0.0, 1.0]), (-1, 1), self.tol)

    def test_local_multiplicity(self):
        self.assertEqual(local_multiplicity(MatrixPolynomial.scalar([0.0, 0.0, 1.0]), 0.0, self.tol), 2)


class TestAdjointAndSymmetry(unittest.TestCase):
    """Тесты для формально сопряжённой модели."""

    tol = DEFAULT_TOLERANCES

    def test_conjugate_transpose(self):
        """[[σ, i], [0, σ]] ↦ [[σ, 0], [−i, σ]]."""
        P = MatrixPolynomial(np.array([[[0, 1j], [0, 0]], np.eye(2)]))
        adjoint = formal_adjoint(ConeModel(nu=1.0, indicial=(P,)))
        assert_allclose(adjoint.p0.coeffs[0], [[0, 0], [-1j, 0]])
        assert_allclose(adjoint.p0.coeffs[1], np.eye(2))

    def test_adjoint_spectrum_is_conjugate(self):
        """Σ(A^⋆) = conj Σ(A) с теми же алгебраическими кратностями."""
        rng = np.random.default_rng(4)
        B = 0.5 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        C = 0.5 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        model = ConeModel(nu=1.0, indicial=(MatrixPolynomial(np.stack([C, B, np.eye(2)])),))
        self.assertFalse(symmetry_check(model, self.tol))
        strip = (-50.0, 50.0)
        points = boundary_spectrum(model, strip, self.tol)
        points_star = boundary_spectrum(formal_adjoint(model), strip, self.tol)
        self.assertEqual(sum(p.algebraic_mult for p in points), 4)
        conjugate = sorted(((complex(np.conj(p.sigma0)), p.algebraic_mult) for p in points), key=by_position)
        found = sorted(((p.sigma0, p.algebraic_mult) for p in points_star), key=by_position)
        self.assertEqual([m for _, m in conjugate], [m for _, m in found])
        assert_allclose([s for s, _ in found], [s for s, _ in conjugate], atol=1e-8)

    def test_adjoint_is_involution(self):
        model = scalar_model([0.0, 1j, 1.0], extra=[[2.0, 1.0]], label="m")
        twice = formal_adjoint(formal_adjoint(model))
        self.assertEqual(twice.placement, model.placement)
        self.assertEqual(twice.label, "m")
        for a, b in zip(twice.indicial, model.indicial):
            self.assertTrue(a.allclose(b, 0.0))

    def test_symmetry(self):
        self.assertTrue(symmetry_check(scalar_model([4.0, 0.0, 1.0]), self.tol))
        self.assertTrue(symmetry_check(scalar_model([-0.25, 0.0, 1.0]), self.tol))
        P = MatrixPolynomial(np.array([[[0, 1], [0, 0]], np.eye(2)]))
        self.assertFalse(symmetry_check(ConeModel(nu=1.0, indicial=(P,)), self.tol))

    def test_positivity(self):
        self.assertTrue(positivity_check(scalar_model([0.25, 0.0, 1.0]), tol=self.tol))
        self.assertFalse(positivity_check(scalar_model([-0.25, 0.0, 1.0]), tol=self.tol))

    def test_positivity_requires_symmetry(self):
        with self.assertRaises(NotSymmetric):
            positivity_check(scalar_model([0.0, 1j, 1.0]), tol=self.tol)


if __name__ == "__main__":
    unittest.main()
