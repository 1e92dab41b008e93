"""
Тесты для усечённых рядов Тейлора и Лорана.
"""

import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from spectral.errors import BasePointMismatch, BlockNotInvertible
from spectral.series import (
    LaurentGerm, combine, laurent_inverse, matrix_series_mul, multiplicities_from_counts,
    scalar_series_div, scalar_series_sqrt, taylor_inverse, toeplitz_kernel_counts,
)

finite = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)


class TestLaurentGerm(unittest.TestCase):
    """Тесты для ростков в одной точке."""

    def test_from_coefficients_splits_principal_and_tail(self):
        """Отрицательное смещение попадает в главную часть."""
        germ = LaurentGerm.from_coefficients(0.0, [[1.0], [2.0], [3.0]], -1)
        self.assertEqual(germ.order, 1)
        self.assertEqual(germ.coefficient(-1)[0], 1.0)
        self.assertEqual(germ.coefficient(0)[0], 2.0)
        self.assertEqual(germ.coefficient(5)[0], 0.0)

    def test_times_power_moves_pole_into_tail(self):
        """Умножение 1/h на h даёт голоморфный росток."""
        germ = LaurentGerm(0.0, [[1.0]], [[2.0]])
        shifted = germ.times_power(1)
        self.assertEqual(shifted.order, 0)
        assert_allclose(shifted.tail[:2, 0], [1.0, 2.0])

    def test_trimmed_drops_zero_leading_rows(self):
        germ = LaurentGerm(1.0, [[0.0], [5.0]])
        self.assertEqual(germ.trimmed().order, 1)

    def test_combine_requires_common_point(self):
        """Ростки в разных точках не складываются."""
        with self.assertRaises(BasePointMismatch):
            combine([LaurentGerm(0.0, [[1.0]]), LaurentGerm(1.0, [[1.0]])], [1, 1])

    def test_combine_aligns_orders(self):
        a = LaurentGerm(0.0, [[1.0], [0.0]])
        b = LaurentGerm(0.0, [[3.0]])
        total = combine([a, b], [1.0, 2.0])
        assert_allclose(total.principal[:, 0], [1.0, 6.0])


class TestSeriesArithmetic(unittest.TestCase):
    """Тесты для операций над рядами."""

    def test_taylor_inverse_of_one_plus_h(self):
        """(1 + h)^{-1} = Σ (−h)^n."""
        coeffs = np.array([[[1.0]], [[1.0]]])
        inv = taylor_inverse(coeffs, 5)
        assert_allclose(inv[:, 0, 0], [(-1) ** n for n in range(6)])

    def test_taylor_inverse_rejects_singular_block(self):
        with self.assertRaises(BlockNotInvertible):
            taylor_inverse(np.zeros((2, 2, 2)), 3)

    @settings(max_examples=25, deadline=None)
    @given(arrays(np.float64, (3, 2, 2), elements=finite))
    def test_taylor_inverse_is_right_inverse(self, perturbation):
        """C(h)·C(h)^{-1} = I до усечения."""
        coeffs = perturbation.astype(complex)
        coeffs[0] += 4 * np.eye(2)
        inv = taylor_inverse(coeffs, 6)
        product = matrix_series_mul(coeffs, inv, 6)
        expected = np.zeros_like(product)
        expected[0] = np.eye(2)
        assert_allclose(product, expected, atol=1e-10)

    def test_laurent_inverse_of_h(self):
        """h^{-1}: единственный ненулевой коэффициент X_{−1} = 1."""
        blocks = laurent_inverse(np.array([[[0.0]], [[1.0]]]), 1, 2)
        assert_allclose(blocks[:, 0, 0], [1.0, 0.0, 0.0, 0.0], atol=1e-12)

    def test_scalar_sqrt_and_div(self):
        assert_allclose(scalar_series_sqrt([4.0, 4.0, 1.0], 3), [2.0, 1.0, 0.0, 0.0], atol=1e-14)
        assert_allclose(scalar_series_div([1.0], [1.0, -1.0], 4), np.ones(5))


class TestToeplitzRanks(unittest.TestCase):
    """Тесты для кратностей по рангам блочно-тёплицевых матриц."""

    def test_diagonal_pencil_counts(self):
        """diag(h², h): цепочки длины 2 и 1."""
        coeffs = np.zeros((3, 2, 2), dtype=complex)
        coeffs[1, 1, 1] = 1
        coeffs[2, 0, 0] = 1
        counts = toeplitz_kernel_counts(coeffs, 1e-8, 6)
        self.assertEqual(counts, [2, 1, 0])
        self.assertEqual(multiplicities_from_counts(counts), [2, 1])

    def test_invertible_has_no_chains(self):
        counts = toeplitz_kernel_counts(np.eye(2)[None, :, :], 1e-8, 4)
        self.assertEqual(multiplicities_from_counts(counts), [])


if __name__ == "__main__":
    unittest.main()
