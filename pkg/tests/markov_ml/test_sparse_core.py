import os
import unittest
from tempfile import TemporaryDirectory

import numpy as np
from scipy import sparse

from markov_ml.errors import (DimensionMismatchError, InputError,
                              MatrixMarketError, OracleSizeError)
from markov_ml.problem_gen import gen_complex_chain, gen_uniform_chain
from markov_ml.sparse_core import *


class AsCsrTestCase(unittest.TestCase):

    def test_canonical_form(self):
        m = sparse.coo_matrix(
            ([1., 2., 0., 3.], ([1, 1, 0, 0], [2, 2, 1, 0])), shape=(3, 3))
        c = as_csr(m)
        self.assertIsInstance(c, sparse.csr_matrix)
        self.assertTrue(c.has_sorted_indices)
        self.assertEqual(2, c.nnz)
        self.assertEqual(3., c[1, 2])
        self.assertEqual(3., c[0, 0])
        self.assertEqual(np.float64, c.dtype)

    def test_copy(self):
        m = sparse.csr_matrix(np.eye(2))
        c = as_csr(m)
        c.data[0] = 5.
        self.assertEqual(1., m[0, 0])

    def test_errors(self):
        with self.assertRaises(InputError):
            as_csr([1., 2.])
        with self.assertRaises(InputError):
            as_csr([[1., np.nan], [0., 1.]])
        with self.assertRaises(InputError):
            as_vector([[1.]])
        with self.assertRaises(DimensionMismatchError):
            as_vector([1., 2.], length=3)


class SpmvTestCase(unittest.TestCase):

    def test_spmv(self):
        b = gen_uniform_chain(4)
        x = np.array([1., 2., 3., 4.])
        np.testing.assert_allclose(b.toarray().dot(x), spmv(b, x))

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            spmv(gen_uniform_chain(4), np.ones(3))


class ChainPropertiesTestCase(unittest.TestCase):

    def test_column_stochastic(self):
        b = gen_uniform_chain(8)
        self.assertTrue(validate_column_stochastic(b))
        np.testing.assert_allclose(np.ones(8), column_sums(b))
        bad = b.tolil()
        bad[0, 0] = 0.5
        self.assertFalse(validate_column_stochastic(bad))
        with self.assertRaises(InputError):
            validate_column_stochastic(sparse.csr_matrix(np.ones((2, 3))))

    def test_irreducible(self):
        b = gen_uniform_chain(6)
        self.assertTrue(is_irreducible(b))
        self.assertFalse(is_irreducible(sparse.block_diag([b, b])))

    def test_pattern_symmetric(self):
        self.assertTrue(is_pattern_symmetric(gen_uniform_chain(6)))
        self.assertFalse(is_pattern_symmetric(gen_complex_chain(8)))


class DenseEigenOracleTestCase(unittest.TestCase):

    def test_uniform_chain_spectrum(self):
        n = 16
        report = dense_eigen_oracle(gen_uniform_chain(n))
        expected = (1. + np.cos(np.arange(n) * np.pi / n)) / 2.
        np.testing.assert_allclose(expected, report.eigenvalues.real,
                                   atol=1e-10)
        np.testing.assert_allclose(np.zeros(n), report.eigenvalues.imag,
                                   atol=1e-10)
        self.assertAlmostEqual(expected[1], report.second_eigenvalue,
                               places=10)
        self.assertAlmostEqual(expected[1] - expected[2],
                               report.spectral_gap_after_second, places=10)

        # stationary vector of the uniform chain is uniform
        v1 = report.eigenvectors[:, 0]
        np.testing.assert_allclose(np.full(n, 1. / n), v1.real, atol=1e-12)
        for i in range(n):
            self.assertAlmostEqual(1., np.sum(np.abs(
                report.eigenvectors[:, i])))

    def test_size_limit(self):
        with self.assertRaises(OracleSizeError):
            dense_eigen_oracle(gen_uniform_chain(20), max_n=10)

    def test_normalize_eigenvector(self):
        v = normalize_eigenvector(np.array([0., -2., 2.]))
        np.testing.assert_allclose([0., 0.5, -0.5], v)


class MatrixMarketTestCase(unittest.TestCase):

    def test_write_and_read(self):
        b = gen_uniform_chain(10)
        with TemporaryDirectory() as tempdir:
            path = os.path.join(tempdir, 'chain.mtx')
            write_matrix_market(b, path)
            with open(path, 'rb') as f:
                lines = f.read().decode('utf-8').split('\n')
            self.assertEqual(
                '%%MatrixMarket matrix coordinate real general', lines[0])
            self.assertEqual('10 10 28', lines[1])
            c = read_matrix_market(path)
        self.assertEqual(0, (b != c).nnz)

    def test_symmetric(self):
        with TemporaryDirectory() as tempdir:
            path = os.path.join(tempdir, 'sym.mtx')
            with open(path, 'wb') as f:
                f.write(b'%%MatrixMarket matrix coordinate real symmetric\n'
                        b'% a comment\n'
                        b'2 2 2\n'
                        b'1 1 0.5\n'
                        b'2 1 0.5\n')
            m = read_matrix_market(path)
        np.testing.assert_array_equal([[0.5, 0.5], [0.5, 0.]], m.toarray())

    def test_errors(self):
        with TemporaryDirectory() as tempdir:
            path = os.path.join(tempdir, 'bad.mtx')
            with open(path, 'wb') as f:
                f.write(b'%%MatrixMarket matrix coordinate real general\n'
                        b'2 2 1\n'
                        b'1 x 0.5\n')
            with self.assertRaises(MatrixMarketError) as cm:
                read_matrix_market(path)
            self.assertEqual(3, cm.exception.lineno)
            self.assertIn('bad.mtx:3:', str(cm.exception))

            with open(path, 'wb') as f:
                f.write(b'%%MatrixMarket matrix array real general\n')
            with self.assertRaises(MatrixMarketError) as cm:
                read_matrix_market(path)
            self.assertEqual(1, cm.exception.lineno)

            with open(path, 'wb') as f:
                f.write(b'%%MatrixMarket matrix coordinate real general\n'
                        b'2 2 2\n'
                        b'1 1 0.5\n')
            with self.assertRaisesRegex(MatrixMarketError,
                                        'expected 2 entries, found 1'):
                read_matrix_market(path)

            with open(path, 'wb') as f:
                f.write(b'%%MatrixMarket matrix coordinate real general\n'
                        b'2 2 1\n'
                        b'3 1 0.5\n')
            with self.assertRaisesRegex(MatrixMarketError, 'out of range'):
                read_matrix_market(path)


if __name__ == '__main__':
    unittest.main()
