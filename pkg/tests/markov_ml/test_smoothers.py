import unittest

import numpy as np
from scipy import sparse

from markov_ml.errors import (BreakdownError, InputError,
                              SingularDiagonalError)
from markov_ml.problem_gen import gen_uniform_chain
from markov_ml.smoothers import *
from markov_ml.sparse_core import dense_eigen_oracle, spmv


def _random_chain(rng, n):
    m = rng.random_sample((n, n)) + 0.01
    return m / m.sum(axis=0, keepdims=True)


def _assert_same_multiset(test, expected, actual, tol):
    remaining = list(actual)
    for value in expected:
        k = int(np.argmin([abs(value - r) for r in remaining]))
        test.assertLessEqual(abs(value - remaining[k]), tol)
        del remaining[k]


class NormalizeTestCase(unittest.TestCase):

    def test_normalize(self):
        np.testing.assert_allclose([0.5, -0.25, -0.25],
                                   normalize(np.array([-2., 1., 1.])))
        np.testing.assert_allclose([0.5, 0.5],
                                   normalize(np.array([3., 3.])))
        with self.assertRaises(BreakdownError):
            normalize(np.zeros(3))
        with self.assertRaises(BreakdownError):
            normalize(np.array([1., np.inf]))

    def test_rayleigh_estimate(self):
        x = np.array([1., -2., 3.])
        self.assertAlmostEqual(2.5, rayleigh_estimate(2.5 * x, x))

    def test_validate_smoother_config(self):
        validate_smoother_config(SmootherConfig())
        for cfg in (SmootherConfig(kind='sor'), SmootherConfig(omega=0.),
                    SmootherConfig(omega=1.5), SmootherConfig(steps=-1),
                    SmootherConfig(cheb_roots=(0.5,)),
                    SmootherConfig(cheb_roots=(-0.1, -0.2, -0.3, -0.4))):
            with self.assertRaises(InputError):
                validate_smoother_config(cfg)


class DeflatedOperatorTestCase(unittest.TestCase):

    def test_deflation_spectrum(self):
        rng = np.random.RandomState(1234)
        n = 50
        for trial in range(20):
            dense = _random_chain(rng, n)
            values, vectors = np.linalg.eig(dense)
            k = int(np.argmin(np.abs(values - 1.)))
            v1 = np.real(vectors[:, k])
            v1 = v1 / v1.sum()
            u = rng.random_sample(n)
            u = u / np.dot(v1, u)
            for mu in (0.5, 1.):
                op = DeflatedOperator(sparse.csr_matrix(dense), v1, u, mu)
                expected = values.copy()
                expected[k] = 1. - mu
                actual = np.linalg.eigvals(op.materialize())
                _assert_same_multiset(self, expected, actual, 1e-8)

    def test_hotelling_eigenvectors(self):
        b = gen_uniform_chain(32)
        report = dense_eigen_oracle(b)
        v1 = np.real(report.eigenvectors[:, 0])
        op = DeflatedOperator.hotelling(b, v1)
        np.testing.assert_allclose(np.zeros(32), op.apply(v1), atol=1e-14)
        for i in range(1, 8):
            vi = np.real(report.eigenvectors[:, i])
            lam = report.eigenvalues[i].real
            np.testing.assert_allclose(lam * vi, op.apply(vi), atol=1e-12)

    def test_wielandt_eigenvectors(self):
        b = gen_uniform_chain(32)
        report = dense_eigen_oracle(b)
        v1 = np.real(report.eigenvectors[:, 0])
        v1 = v1 / v1.sum()
        u = np.random.RandomState(7).random_sample(32)
        u = u / np.dot(v1, u)
        op = DeflatedOperator(b, v1, u, 1.)
        for i in range(1, 6):
            vi = np.real(report.eigenvectors[:, i])
            lam = report.eigenvalues[i].real
            gamma = np.dot(u, vi) / lam
            w = vi - gamma * v1
            np.testing.assert_allclose(lam * w, op.apply(w), atol=1e-10)

    def test_diagonal(self):
        b = gen_uniform_chain(6)
        op = DeflatedOperator.hotelling(b, np.full(6, 1. / 6))
        np.testing.assert_allclose(np.diag(op.materialize()), op.diagonal())

    def test_errors(self):
        b = gen_uniform_chain(4)
        with self.assertRaises(InputError):
            DeflatedOperator(b, np.full(4, 0.25), np.ones(4) * 2.)
        with self.assertRaises(InputError):
            DeflatedOperator.hotelling(b, np.array([1., -1., 1., -1.]))
        with self.assertRaises(InputError):
            DeflatedOperator(2. * b, np.full(4, 0.25), np.ones(4))


class RelaxationTestCase(unittest.TestCase):

    def setUp(self):
        self.n = 64
        self.b = gen_uniform_chain(self.n)
        report = dense_eigen_oracle(self.b)
        self.values = report.eigenvalues.real
        self.v2 = normalize(np.real(report.eigenvectors[:, 1]))
        self.op = DeflatedOperator.hotelling(self.b, np.full(self.n, 1.))

    def test_power_and_jacobi_fixed_points(self):
        v1 = np.full(self.n, 1. / self.n)
        np.testing.assert_allclose(v1, power_step(self.b, v1), atol=1e-15)
        a = sparse.identity(self.n, format='csr') - self.b
        np.testing.assert_allclose(v1, jacobi_step(a, v1, 0.7), atol=1e-15)
        np.testing.assert_allclose(
            self.v2, deflated_power_step(self.op, self.v2), atol=1e-12)
        np.testing.assert_allclose(
            self.v2, deflated_jacobi_step(self.op, self.v2, 0.7), atol=1e-12)
        np.testing.assert_allclose(
            self.v2, chebyshev_step(self.op, self.v2), atol=1e-12)

    def test_singular_diagonal(self):
        a = sparse.csr_matrix(np.array([[0., -1.], [0., 1.]]))
        with self.assertRaises(SingularDiagonalError):
            jacobi_step(a, np.array([0.5, 0.5]))
        op = DeflatedOperator.hotelling(gen_uniform_chain(4),
                                        np.full(4, 0.25))
        with self.assertRaises(SingularDiagonalError):
            deflated_jacobi_step(op, np.array([1., -1., 1., -1.]),
                                 lam=op.diagonal()[0])

    def test_chebyshev_needs_roots(self):
        with self.assertRaises(InputError):
            chebyshev_step(self.op, self.v2, ())

    def test_relax_counts(self):
        calls = []
        counter = [0]
        x = normalize(np.random.RandomState(0).standard_normal(self.n))
        relax(self.op, x, SmootherConfig(), 5, counter,
              lambda step, y: calls.append(step))
        self.assertEqual([0, 1, 2, 3, 4], calls)
        self.assertEqual(15, counter[0])

        counter = [0]
        relax(self.op, x, SmootherConfig(kind=DEFLATED_JACOBI, steps=4),
              counter=counter)
        self.assertEqual(4, counter[0])

    def test_deflated_power_rate(self):
        x = np.random.RandomState(42).standard_normal(self.n)
        x = normalize(x - x.mean())
        residuals = {}
        for step in range(1, 3001):
            x = deflated_power_step(self.op, x)
            if step in (2000, 3000):
                bx = spmv(self.b, x)
                lam = rayleigh_estimate(bx, x)
                residuals[step] = np.sum(np.abs(bx - lam * x))
        measured = (residuals[3000] / residuals[2000]) ** (1. / 1000)
        expected = abs(self.values[2]) / self.values[1]
        self.assertLess(abs((1. - measured) - (1. - expected)),
                        0.1 * (1. - expected))


if __name__ == '__main__':
    unittest.main()
