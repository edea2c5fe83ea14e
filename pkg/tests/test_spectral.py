"""
Tests for Fourier-domain linear algebra.
"""

import unittest

import numpy as np
from numpy.testing import assert_allclose

from tensor_ccs.exceptions import DomainError, ParameterError
from tensor_ccs.experiments import gen_lowrank
from tensor_ccs.sampling import make_rng
from tensor_ccs.spectral import (
    condition_number,
    dft3,
    idft3,
    incoherence_mu0,
    ranks,
    spectral_norm,
    tnn,
    tpinv,
    truncate_rank,
    tsvd,
)
from tensor_ccs.tensor import DenseTensor3, bcirc, identity_tensor, norm, tprod, ttranspose


def random(shape, seed=0):
    return DenseTensor3(make_rng(seed).standard_normal(shape))


class TestTransforms(unittest.TestCase):
    """Test cases for the mode-3 DFT."""

    def test_round_trip_and_symmetry(self):
        """Test idft3(dft3(t)) == t and conjugate symmetry of real spectra."""
        for n3 in (1, 4, 7):
            with self.subTest(n3=n3):
                t = random((3, 2, n3), n3)
                spectrum = dft3(t)
                self.assertTrue(spectrum.is_conjugate_symmetric())
                assert_allclose(idft3(spectrum).values, t.values, atol=1e-12)

    def test_matches_direct_summation(self):
        """Test dft3 against the O(n3^2) DFT sum on a 3 x 3 x 7 tensor."""
        t = random((3, 3, 7), 11)
        n3 = t.n3
        direct = np.zeros(t.dims, dtype=np.complex128)
        for k in range(n3):
            for m in range(n3):
                direct[:, :, k] += t.values[:, :, m] * np.exp(-2j * np.pi * k * m / n3)
        assert_allclose(dft3(t).slices, direct, rtol=0, atol=1e-12)


class TestTSvd(unittest.TestCase):
    """Test cases for the t-SVD and rank truncation."""

    def test_reconstruction_and_orthogonality(self):
        """Test W * S * V^T == T and W^T * W == I for a rank-3 tensor."""
        for n3 in (4, 5):
            with self.subTest(n3=n3):
                t = gen_lowrank(8, 7, n3, 3, seed=n3)
                f = tsvd(t)

                self.assertEqual(f.r, 3)
                self.assertEqual(f.W.dims, (8, 3, n3))
                rebuilt = tprod(tprod(f.W, f.S), ttranspose(f.V))
                assert_allclose(rebuilt.values, t.values, atol=1e-9)
                gram = tprod(ttranspose(f.W), f.W)
                assert_allclose(gram.values, identity_tensor(3, n3).values, atol=1e-9)

    def test_rank_out_of_range(self):
        """Test that ranks outside [1, min(n1, n2)] raise."""
        t = random((4, 3, 2))
        for r in (0, 4):
            with self.subTest(r=r):
                with self.assertRaises(ParameterError):
                    tsvd(t, r)

    def test_truncate_rank(self):
        """Test that H_r keeps a rank-r tensor and lowers the rank of a full one."""
        low = gen_lowrank(6, 6, 3, 2, seed=1)
        assert_allclose(truncate_rank(low, 2).values, low.values, atol=1e-9)
        full = random((6, 6, 3), 5)
        self.assertEqual(ranks(truncate_rank(full, 2)).tubal, 2)


class TestRanksAndNorms(unittest.TestCase):
    """Test cases for ranks, pseudo-inverse and spectral norms."""

    def test_generated_tubal_rank(self):
        """Test that gen_lowrank produces the requested tubal rank."""
        for seed in range(3):
            with self.subTest(seed=seed):
                multirank = ranks(gen_lowrank(20, 20, 4, 3, seed=seed))
                self.assertEqual(multirank.tubal, 3)
                self.assertEqual(multirank.per_slice, (3, 3, 3, 3))
                self.assertEqual(multirank.sum, 12)

    def test_zero_tensor_rank(self):
        """Test the multi-rank of the zero tensor."""
        multirank = ranks(DenseTensor3.zeros((3, 3, 2)))
        self.assertEqual(multirank.tubal, 0)
        self.assertEqual(multirank.per_slice, (0, 0))

    def test_pseudo_inverse(self):
        """Test the Moore-Penrose identities A * A^+ * A == A and A^+ * A * A^+ == A^+."""
        for a in (random((4, 6, 3), 2), gen_lowrank(5, 5, 4, 2, seed=3)):
            with self.subTest(dims=a.dims):
                p = tpinv(a)
                self.assertEqual(p.dims, (a.n2, a.n1, a.n3))
                assert_allclose(tprod(tprod(a, p), a).values, a.values, atol=1e-9)
                assert_allclose(tprod(tprod(p, a), p).values, p.values, atol=1e-8)

    def test_spectral_norm_and_tnn(self):
        """Test the spectral and nuclear norms against the block circulant matrix."""
        t = random((3, 4, 5), 9)
        singular = np.linalg.svd(bcirc(t), compute_uv=False)
        self.assertAlmostEqual(spectral_norm(t), singular[0], places=10)
        self.assertAlmostEqual(tnn(t), singular.sum() / 5, places=10)
        self.assertAlmostEqual(norm(t) ** 2, (singular**2).sum() / 5, places=10)

    def test_condition_number(self):
        """Test kappa of the identity and of the zero tensor."""
        self.assertAlmostEqual(condition_number(identity_tensor(4, 3)), 1.0)
        self.assertGreaterEqual(condition_number(random((5, 5, 2), 1)), 1.0)
        with self.assertRaises(DomainError):
            condition_number(DenseTensor3.zeros((2, 2, 2)))

    def test_incoherence_range(self):
        """Test 1 <= mu0 <= max(n1, n2) / r on random low-rank tensors."""
        for seed in range(3):
            with self.subTest(seed=seed):
                t = gen_lowrank(20, 16, 4, 2, seed=seed)
                mu0 = incoherence_mu0(t)
                self.assertGreaterEqual(mu0, 1.0 - 1e-9)
                self.assertLessEqual(mu0, 20 / 2 + 1e-9)
        with self.assertRaises(DomainError):
            incoherence_mu0(DenseTensor3.zeros((3, 3, 1)))


if __name__ == '__main__':
    unittest.main()
