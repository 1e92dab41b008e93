"""
Тесты для спаривания [·,·]_A и матриц Грама.
"""

import os
import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from config import DEFAULT_TOLERANCES, MODELS_DIR
from spectral.errors import BasePointMismatch, ContourTouchesSpectrum
from spectral.extension_calculus import build_extended_basis, dual_extended_basis
from spectral.local_chains import adjoint_chains, germ_from_coords, singular_chains
from spectral.model_io import load_model
from spectral.pairing_engine import (
    ConjugationMap, PairingGram, conjugate_shift, contour_gram, contour_integral, contour_pairing,
    germ_value, iota, nondegeneracy_check, pairing_gram, residue_pairing_local,
)
from spectral.pencil_core import MatrixPolynomial
from spectral.series import LaurentGerm


def bundled(name):
    return load_model(os.path.join(MODELS_DIR, f"{name}.json"))


class TestLocalPairing(unittest.TestCase):
    """Тесты для ι и локального вычетного спаривания."""

    tol = DEFAULT_TOLERANCES

    def test_iota_of_simple_poles(self):
        """⟨1/σ, 1/σ⟩ = 1/σ²."""
        u = LaurentGerm(0.0, [[1.0]])
        germ = iota(u, u, tol=self.tol)
        self.assertEqual(germ.order, 2)
        self.assertEqual(germ.coefficient(-2)[0], 1.0)
        self.assertEqual(germ.coefficient(-1)[0], 0.0)

    def test_iota_requires_conjugate_point(self):
        u = LaurentGerm(1j, [[1.0]])
        with self.assertRaises(BasePointMismatch):
            iota(u, u, tol=self.tol)
        self.assertEqual(iota(u, ConjugationMap.apply(u), tol=self.tol).sigma0, 1j)

    def test_conjugation_map(self):
        germ = ConjugationMap.apply(LaurentGerm(0.5 + 0.2j, [[1j]], [[2 - 1j]]))
        self.assertEqual(germ.sigma0, 0.5 - 0.2j)
        self.assertEqual(germ.principal[0, 0], -1j)
        self.assertEqual(germ.tail[0, 0], 2 + 1j)

    def test_residue_pairing_normal_form(self):
        """[ψ, σ·ψ^⋆] = i для σ² в нуле."""
        P = MatrixPolynomial.scalar([0.0, 0.0, 1.0])
        basis = singular_chains(P, 0.0, self.tol)
        dual = adjoint_chains(basis, P.adjoint(), self.tol)
        u = germ_from_coords(basis, [np.array([1.0, 0.0])])
        v = germ_from_coords(dual, [np.array([0.0, 1.0])])
        self.assertAlmostEqual(residue_pairing_local(u, v, basis, dual, self.tol), 1j, places=10)
        self.assertAlmostEqual(residue_pairing_local(u, u, basis, dual, self.tol), 0.0, places=10)


class TestContour(unittest.TestCase):
    """Тесты для контурных квадратур."""

    tol = DEFAULT_TOLERANCES

    def test_residue_of_inverse(self):
        """(1/2π)∮ dσ/σ = i."""
        value = contour_integral(lambda s: 1 / s, 0.0, 0.5, self.tol)
        self.assertAlmostEqual(value, 1j, places=12)

    def test_germ_value(self):
        germ = LaurentGerm(1.0, [[2.0], [3.0]])
        assert_allclose(germ_value(germ, [2.0])[:, 0], [5.0])

    def test_contour_pairing_matches_residue(self):
        model = bundled("cex1_a2")
        u = LaurentGerm(0.0, [[1.0], [0.0]])
        v = LaurentGerm(0.0, [[1.0]])
        self.assertAlmostEqual(contour_pairing(u, v, model, tol=self.tol), 1j, places=10)

    def test_contour_must_avoid_spectrum(self):
        model = bundled("cex1_a06")
        u = LaurentGerm(0.0, [[1.0], [0.0]])
        with self.assertRaises(ContourTouchesSpectrum):
            contour_pairing(u, u, model, gamma=(0.0, 0.6), tol=self.tol)

    def test_conjugate_shift(self):
        self.assertEqual(conjugate_shift(0.5, 0.5, self.tol), 0)
        self.assertEqual(conjugate_shift(0.0, 1j, self.tol), 1)
        self.assertEqual(conjugate_shift(1j, 1j, self.tol), 2)
        self.assertIsNone(conjugate_shift(0.3, 0.5, self.tol))
        self.assertIsNone(conjugate_shift(-1j, 0.0, self.tol))
        self.assertIsNone(conjugate_shift(0.6j, 0.6j, self.tol))


class TestPairingGram(unittest.TestCase):
    """Тесты для матриц Грама на комплектных моделях."""

    tol = DEFAULT_TOLERANCES

    @classmethod
    def setUpClass(cls):
        cls.model = bundled("cex1_a2")
        cls.basis = build_extended_basis(cls.model, cls.tol)

    def test_cex1_raw_gram(self):
        """В базисе (ℓ = 0, ℓ = 1) спаривание равно i·[[0, 1], [1, 0]]."""
        gram = pairing_gram(self.model, self.basis, self.basis, self.tol, workers=1)
        assert_allclose(gram.G, 1j * np.array([[0, 1], [1, 0]]), atol=1e-10)

    def test_contour_route_agrees(self):
        closed = pairing_gram(self.model, self.basis, self.basis, self.tol, workers=1)
        contour = contour_gram(self.model, self.basis, self.basis, radius=0.5, tol=self.tol, n_nodes=256, workers=1)
        self.assertEqual(contour.route, "contour")
        assert_allclose(contour.G, closed.G, atol=1e-8)

    def test_dual_basis_is_nondegenerate(self):
        dual = dual_extended_basis(self.model, self.basis, self.tol)
        gram = pairing_gram(self.model, self.basis, dual, self.tol)
        self.assertTrue(nondegeneracy_check(gram, tol=self.tol))
        self.assertTrue(nondegeneracy_check(gram, per_point=True, tol=self.tol))

    def test_reversed(self):
        gram = pairing_gram(self.model, self.basis, self.basis, self.tol, workers=1)
        back = gram.reversed()
        assert_allclose(back.G, -gram.G.conj().T)
        self.assertEqual(back.rows, gram.cols)

    def test_parallel_assembly_is_deterministic(self):
        model = bundled("cex1_a06")
        basis = build_extended_basis(model, self.tol)
        sequential = pairing_gram(model, basis, basis, self.tol, workers=1)
        parallel = pairing_gram(model, basis, basis, self.tol, workers=4)
        assert_array_equal(sequential.G, parallel.G)

    def test_degenerate_gram(self):
        labels = [(0j, 1, 0), (0j, 1, 1)]
        gram = PairingGram(rows=labels, cols=labels, G=np.zeros((2, 2), dtype=complex), blocks={(0j, 0j): 0})
        self.assertFalse(nondegeneracy_check(gram, tol=self.tol))

    def test_csv_export(self):
        gram = pairing_gram(self.model, self.basis, self.basis, self.tol, workers=1)
        lines = gram.to_csv().strip().split("\n")
        self.assertEqual(len(lines), 3)
        self.assertTrue(lines[0].startswith(',"('))
        self.assertTrue(lines[1].endswith("j"))


if __name__ == "__main__":
    unittest.main()
