"""
Тесты для численного слоя Меллина.
"""

import math
import os
import unittest
from dataclasses import replace

import numpy as np
from scipy import integrate

from config import DEFAULT_TOLERANCES, MODELS_DIR
from spectral.errors import Divergent, ModelFormatError, NotScalar, QuadratureFailure
from spectral.mellin_numeric import (
    CutoffProfile, ModelFunction, adaptive_quad, apply_model, green_pairing_direct, mellin_germ, phi,
    phi_taylor, weighted_inner,
)
from spectral.model_io import load_model


def bundled(name):
    return load_model(os.path.join(MODELS_DIR, f"{name}.json"))


class TestCutoffProfile(unittest.TestCase):
    """Тесты для срезающей функции ω."""

    def test_plateaus_and_midpoint(self):
        omega = CutoffProfile()
        values = omega(np.array([0.1, 0.25, 0.5, 0.75, 0.9]))
        np.testing.assert_allclose(values, [1.0, 1.0, 0.5, 0.0, 0.0], atol=1e-14)

    def test_derivative_vanishes_outside(self):
        first = CutoffProfile().derivative(1)
        values = first(np.array([0.1, 0.5, 0.9]))
        self.assertEqual(values[0], 0.0)
        self.assertEqual(values[2], 0.0)
        self.assertLess(values[1], 0.0)

    def test_invalid_interval(self):
        with self.assertRaises(ModelFormatError):
            CutoffProfile(0.8, 0.5)
        with self.assertRaises(ModelFormatError):
            CutoffProfile(0.0, 0.5)


class TestPhi(unittest.TestCase):
    """Тесты для Φ и её коэффициентов Тейлора."""

    tol = DEFAULT_TOLERANCES

    def test_value_at_zero(self):
        """Φ(0) = i не зависит от срезки."""
        for profile in (CutoffProfile(), CutoffProfile(0.1, 0.5)):
            with self.subTest(profile=profile):
                self.assertAlmostEqual(phi(0.0, profile, self.tol), 1j, places=10)

    def test_taylor_starts_with_phi0(self):
        coeffs = phi_taylor(4, tol=self.tol)
        self.assertAlmostEqual(coeffs[0], 1j, places=9)
        self.assertAlmostEqual(coeffs[1], phi_taylor(2, tol=self.tol)[1], places=12)

    def test_taylor_needs_enough_nodes(self):
        with self.assertRaises(QuadratureFailure):
            phi_taylor(self.tol.phi_nodes, tol=self.tol)


class TestQuadrature(unittest.TestCase):
    """Тесты для адаптивной квадратуры."""

    def test_smooth_integral(self):
        self.assertAlmostEqual(adaptive_quad(np.sin, 0.0, math.pi), 2.0, places=12)

    def test_vector_valued(self):
        value = adaptive_quad(lambda t: np.stack([t, t ** 2], axis=1), 0.0, 1.0)
        np.testing.assert_allclose(value, [0.5, 1 / 3], atol=1e-14)

    def test_failure_when_panels_exhausted(self):
        tight = replace(DEFAULT_TOLERANCES, quad_max_nodes=16, quad_rtol=1e-14)
        with self.assertRaises(QuadratureFailure):
            adaptive_quad(lambda t: np.sin(200 * t), 0.0, 10.0, tight)


class TestMellinGerm(unittest.TestCase):
    """Тесты для ростков преобразования Меллина."""

    tol = DEFAULT_TOLERANCES

    def test_cutoff_has_simple_pole(self):
        germ = mellin_germ(ModelFunction.power_log(0.0), 0.0, tol=self.tol)
        self.assertEqual(germ.order, 1)
        self.assertAlmostEqual(germ.principal[0, 0], 1j, places=10)

    def test_log_power_raises_order(self):
        """ω·log x ↦ 1/σ²."""
        germ = mellin_germ(ModelFunction.power_log(0.0, k=1), 0.0, tol=self.tol)
        self.assertEqual(germ.order, 2)
        self.assertAlmostEqual(germ.principal[0, 0], 1.0, places=10)
        self.assertAlmostEqual(abs(germ.principal[1, 0]), 0.0, places=10)

    def test_other_exponent_is_holomorphic(self):
        germ = mellin_germ(ModelFunction.power_log(0.5), -0.5, tol=self.tol)
        self.assertEqual(germ.order, 0)

    def test_vector_cutoff_points_along_direction(self):
        """ω·e_1 в C^2 ↦ i·e_1/σ."""
        u = ModelFunction.power_log(0.0, direction=(1, 0))
        germ = mellin_germ(u, 0.0, tol=self.tol)
        self.assertEqual(germ.principal.shape, (1, 2))
        np.testing.assert_allclose(germ.principal[0], [1j, 0.0], atol=1e-10)

    def test_terms_are_merged(self):
        u = ModelFunction.power_log(0.3) + ModelFunction.power_log(0.3, c=-1.0)
        self.assertEqual(u.terms, ())


class TestDirectPairing(unittest.TestCase):
    """Тесты для вычислений в x-пространстве."""

    tol = DEFAULT_TOLERANCES

    def test_apply_model_power(self):
        """σ² − 0.25 на ω·x^{0.3i}: главное слагаемое −0.16·ω·x^{i(0.3 + 2i)}."""
        model = bundled("beta_minus_b05")
        image = apply_model(model, ModelFunction.power_log(0.3))
        main = [t for t in image.terms if t.j == 0]
        self.assertEqual(len(main), 1)
        self.assertAlmostEqual(main[0].c, -0.16)
        self.assertAlmostEqual(main[0].sigma0, 0.3 + 2j)
        self.assertTrue(any(t.j == 2 for t in image.terms))

    def test_apply_model_requires_scalar(self):
        with self.assertRaises(NotScalar):
            apply_model(bundled("cex1_a06"), ModelFunction.power_log(0.0))

    def test_weighted_inner_against_scipy(self):
        omega = CutoffProfile()
        expected, _ = integrate.quad(lambda x: float(omega(np.array([x]))[0]) ** 2 * x, 0.0, 1.0, points=[0.25, 0.75])
        u = ModelFunction.power_log(0.0)
        self.assertAlmostEqual(weighted_inner(u, u, 2.0, tol=self.tol), expected, places=8)

    def test_weighted_inner_vector_valued(self):
        """(ω·(1, i), ω·(2, 0)) = 2·(ω, ω)."""
        scalar = weighted_inner(ModelFunction.power_log(0.0), ModelFunction.power_log(0.0), 2.0, tol=self.tol)
        u = ModelFunction.power_log(0.0, direction=(1, 1j))
        v = ModelFunction.power_log(0.0, direction=(2, 0))
        self.assertAlmostEqual(weighted_inner(u, v, 2.0, tol=self.tol), 2 * scalar, places=8)
        self.assertAlmostEqual(weighted_inner(u, u, 2.0, tol=self.tol), 2 * scalar, places=8)
        with self.assertRaises(ModelFormatError):
            weighted_inner(u, ModelFunction.power_log(0.0), 2.0, tol=self.tol)

    def test_weighted_inner_divergence(self):
        u = ModelFunction.power_log(1j)
        with self.assertRaises(Divergent):
            weighted_inner(u, u, 2.0, tol=self.tol)

    def test_green_formula(self):
        """[ω, iω log x]_A = i и [ω, ω]_A = 0 для σ²."""
        model = bundled("cex1_a2")
        omega, omega_log = model.dictionary
        self.assertAlmostEqual(green_pairing_direct(model, omega, omega_log, tol=self.tol), 1j, places=7)
        self.assertAlmostEqual(green_pairing_direct(model, omega, omega, tol=self.tol), 0.0, places=7)


if __name__ == "__main__":
    unittest.main()
