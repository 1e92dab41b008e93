"""
Тесты для генераторов тестовых пучков.
"""

import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from config import DEFAULT_TOLERANCES
from spectral.generators import engineered_pencil, positive_pencil, random_subspace, winding_number
from spectral.local_chains import partial_multiplicities


class TestEngineeredPencil(unittest.TestCase):
    """Тесты для пучков с заданными кратностями."""

    def test_expected_multiplicities(self):
        P, expected = engineered_pencil(np.random.default_rng(1), 3, [2, 0, 1], 0.3)
        self.assertEqual(expected, [2, 1])
        self.assertEqual(partial_multiplicities(P, 0.3, DEFAULT_TOLERANCES), [2, 1])

    def test_winding_counts_zeros_of_det(self):
        P, expected = engineered_pencil(np.random.default_rng(2), 3, [2, 0, 1], 0.3)
        self.assertEqual(winding_number(P, 0.3, radius=0.5), sum(expected))
        self.assertEqual(winding_number(P, 2.0, radius=0.5), 0)


class TestPositivePencil(unittest.TestCase):
    """Тесты для пучков Q^⋆Q."""

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_nonnegative_on_real_axis(self, seed):
        P = positive_pencil(np.random.default_rng(seed), 2, [1, 1], sigma0=0.2)
        for sigma in np.linspace(-2, 2, 9):
            value = P.evaluate(sigma)
            np.testing.assert_allclose(value, value.conj().T, atol=1e-12)
            self.assertGreaterEqual(np.linalg.eigvalsh(value).min(), -1e-10)

    def test_multiplicities_double(self):
        P = positive_pencil(np.random.default_rng(5), 2, [1], sigma0=0.0)
        self.assertEqual(partial_multiplicities(P, 0.0, DEFAULT_TOLERANCES), [2])


class TestRandomSubspace(unittest.TestCase):
    """Тесты для случайных подпространств."""

    def test_dimension(self):
        labels = [(0j, 1, ell) for ell in range(4)]
        rng = np.random.default_rng(0)
        for dim in range(5):
            self.assertEqual(random_subspace(labels, dim, rng).dim, dim)


if __name__ == "__main__":
    unittest.main()
