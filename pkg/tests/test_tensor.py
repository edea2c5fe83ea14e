"""
Tests for dense tensors and the t-product algebra.
"""

import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from tensor_ccs.exceptions import CapExceededError, IndexRangeError, ParameterError, ShapeError
from tensor_ccs.sampling import make_rng
from tensor_ccs.tensor import (
    DenseTensor3,
    IndexSet,
    bcirc,
    fold,
    identity_tensor,
    inner_product,
    norm,
    sampling_tensor,
    subtensor,
    tprod,
    ttranspose,
    unfold,
)


def random(shape, seed=0):
    return DenseTensor3(make_rng(seed).standard_normal(shape))


class TestDenseTensor3(unittest.TestCase):
    """Test cases for DenseTensor3."""

    def test_construction_copies_and_freezes(self):
        """Test that the backing array is a read-only copy."""
        source = np.ones((2, 3, 4))
        t = DenseTensor3(source)
        source[0, 0, 0] = 5.0

        self.assertEqual(t.dims, (2, 3, 4))
        self.assertEqual(t.values[0, 0, 0], 1.0)
        self.assertFalse(t.values.flags.writeable)

    def test_rejects_bad_input(self):
        """Test rejection of wrong order, empty dimensions and non-finite values."""
        cases = {
            "matrix": np.ones((2, 2)),
            "empty": np.ones((2, 0, 2)),
        }
        for name, values in cases.items():
            with self.subTest(name=name):
                with self.assertRaises(ShapeError):
                    DenseTensor3(values)
        with self.assertRaises(ParameterError):
            DenseTensor3(np.full((1, 1, 1), np.nan))

    def test_arithmetic(self):
        """Test elementwise arithmetic and its dimension check."""
        a = random((2, 3, 2), 1)
        b = random((2, 3, 2), 2)

        assert_allclose((a + b).values, a.values + b.values)
        assert_allclose((a - b).values, a.values - b.values)
        assert_allclose((2.5 * a).values, 2.5 * a.values)
        assert_allclose((-a).values, -a.values)
        with self.assertRaises(ShapeError):
            a + random((3, 2, 2))

    def test_frontal_slice(self):
        """Test frontal slice access and its range check."""
        t = random((3, 2, 4))
        assert_array_equal(t.frontal_slice(2), t.values[:, :, 2])
        with self.assertRaises(IndexRangeError):
            t.frontal_slice(4)


class TestIndexSet(unittest.TestCase):
    """Test cases for IndexSet."""

    def test_complement(self):
        """Test the sorted complement."""
        s = IndexSet.of([4, 0, 2], 6)
        assert_array_equal(s.complement(), [1, 3, 5])
        self.assertEqual(len(s), 3)

    def test_validation(self):
        """Test range and duplicate checks."""
        with self.assertRaises(IndexRangeError):
            IndexSet.of([0, 6], 6)
        with self.assertRaises(ParameterError):
            IndexSet.of([1, 1], 6)
        self.assertEqual(len(IndexSet.of([1, 1], 6, replacement=True)), 2)


class TestTProduct(unittest.TestCase):
    """Test cases for the t-product and related operators."""

    def test_fold_unfold(self):
        """Test that fold inverts unfold."""
        t = random((3, 4, 5))
        self.assertEqual(unfold(t).shape, (15, 4))
        self.assertTrue(fold(unfold(t), t.dims).equals(t))
        with self.assertRaises(ShapeError):
            fold(np.zeros((4, 4)), t.dims)

    def test_tprod_matches_bcirc(self):
        """Test unfold(A * B) == bcirc(A) unfold(B) for several shapes."""
        for n3 in (1, 2, 5, 6):
            with self.subTest(n3=n3):
                a = random((3, 4, n3), n3)
                b = random((4, 2, n3), n3 + 10)
                assert_allclose(unfold(tprod(a, b)), bcirc(a) @ unfold(b), atol=1e-12)

    def test_tprod_shape_mismatch(self):
        """Test that non-conforming operands raise."""
        with self.assertRaises(ShapeError):
            tprod(random((3, 4, 2)), random((3, 4, 2)))

    def test_identity_and_transpose(self):
        """Test I * A = A and (A * B)^T = B^T * A^T."""
        a = random((3, 4, 5), 3)
        b = random((4, 2, 5), 4)
        assert_allclose(tprod(identity_tensor(3, 5), a).values, a.values, atol=1e-12)
        assert_allclose(
            ttranspose(tprod(a, b)).values, tprod(ttranspose(b), ttranspose(a)).values, atol=1e-12
        )
        self.assertTrue(ttranspose(ttranspose(a)).equals(a))

    def test_bcirc_cap(self):
        """Test that bcirc refuses to materialize beyond its cap."""
        with self.assertRaises(CapExceededError) as ctx:
            bcirc(random((3, 3, 3)), max_entries=10)
        self.assertEqual(ctx.exception.requested, 81)

    def test_sampling_tensor(self):
        """Test S_I * T == T[I, :, :]."""
        t = random((5, 3, 4))
        rows = IndexSet.of([3, 1], 5)
        assert_allclose(tprod(sampling_tensor(rows, 4), t).values, subtensor(t, rows=rows).values, atol=1e-12)


class TestNorms(unittest.TestCase):
    """Test cases for norms and the inner product."""

    def test_norms(self):
        """Test the three norm kinds on a hand-built tensor."""
        values = np.zeros((2, 2, 2))
        values[0, 0, 0] = 3.0
        values[0, 1, 1] = -4.0
        t = DenseTensor3(values)

        self.assertAlmostEqual(norm(t), 5.0)
        self.assertEqual(norm(t, "infinity"), 4.0)
        self.assertAlmostEqual(norm(t, "inf2"), 5.0)
        self.assertAlmostEqual(inner_product(t, t), 25.0)
        with self.assertRaises(ParameterError):
            norm(t, "nuclear")

    def test_subtensor_preserves_order(self):
        """Test that index order and duplicates are preserved."""
        t = random((4, 5, 2))
        rows = IndexSet.of([2, 0, 2], 4, replacement=True)
        cols = IndexSet.of([4, 1], 5)
        sub = subtensor(t, rows=rows, cols=cols)
        self.assertEqual(sub.dims, (3, 2, 2))
        assert_array_equal(sub.values, t.values[[2, 0, 2]][:, [4, 1]])
        with self.assertRaises(IndexRangeError):
            subtensor(t, rows=IndexSet.of([0], 5))


if __name__ == '__main__':
    unittest.main()
