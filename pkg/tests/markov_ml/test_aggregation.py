import codecs
import os
import unittest
from tempfile import TemporaryDirectory

import numpy as np

from markov_ml.aggregation import *
from markov_ml.errors import CancellationError, InputError
from markov_ml.problem_gen import gen_uniform_chain
from markov_ml.sparse_core import dense_eigen_oracle


def _pairs(n, target_size=2):
    b = gen_uniform_chain(n)
    s = strength_matrix(b, np.full(n, 1. / n))
    return aggregate_bottom_up(s, AggregationConfig(target_size=target_size))


class AggregationTestCase(unittest.TestCase):

    def test_membership(self):
        agg = Aggregation([0, 0, 1, 2, 2])
        self.assertEqual(5, agg.n_fine)
        self.assertEqual(3, agg.n_coarse)
        np.testing.assert_array_equal([2, 1, 2], agg.sizes)
        np.testing.assert_array_equal([3, 4], agg.members(2))
        self.assertEqual((5, 3), agg.q.shape)
        np.testing.assert_array_equal(np.ones(5), agg.q.sum(axis=1).A1)
        self.assertEqual(Aggregation.singletons(3), Aggregation([0, 1, 2]))
        self.assertEqual('Aggregation(n_fine=5, n_coarse=3)', repr(agg))

    def test_membership_errors(self):
        with self.assertRaises(InputError):
            Aggregation([0, 2])
        with self.assertRaises(InputError):
            Aggregation([[0, 1]])
        with self.assertRaises(InputError):
            validate_aggregation_config(AggregationConfig(target_size=1))
        with self.assertRaises(InputError):
            validate_aggregation_config(AggregationConfig(theta=1.))


class StrengthTestCase(unittest.TestCase):

    def test_symmetric_without_diagonal(self):
        b = gen_uniform_chain(6)
        s = strength_matrix(b, np.arange(1., 7.))
        np.testing.assert_allclose(s.toarray(), s.toarray().T)
        np.testing.assert_array_equal(np.zeros(6), s.diagonal())
        self.assertAlmostEqual(0.5 * (0.25 * 2. + 0.25 * 1.), s[0, 1])

    def test_sign_constraint(self):
        b = gen_uniform_chain(6)
        x = np.array([1., 1., 1., -1., -1., -1.])
        s = strength_matrix(b, x, sign_constrained=True)
        self.assertEqual(0., s[2, 3])
        self.assertEqual(0.25, s[3, 4])
        s = strength_matrix(b, x, sign_constrained=False)
        self.assertEqual(0., s[3, 4])
        self.assertEqual(0.125, s[2, 3])


class AggregateBottomUpTestCase(unittest.TestCase):

    def test_pairs(self):
        np.testing.assert_array_equal([0, 0, 1, 1, 2, 2, 3, 3],
                                      _pairs(8).membership)

    def test_triples(self):
        np.testing.assert_array_equal([0, 0, 0, 1, 1, 1, 2, 2, 2],
                                      _pairs(9, 3).membership)

    def test_lonely_node_joins_neighbor(self):
        np.testing.assert_array_equal([0, 0, 1, 1, 2, 2, 2],
                                      _pairs(7).membership)

    def test_unconnected_nodes_stay_singletons(self):
        b = gen_uniform_chain(4)
        x = np.array([1., -1., 1., -1.])
        s = strength_matrix(b, x, sign_constrained=True)
        agg = aggregate_bottom_up(s, AggregationConfig(sign_constrained=True))
        self.assertEqual(Aggregation.singletons(4), agg)

    def test_sign_homogeneous(self):
        b = gen_uniform_chain(64)
        v2 = np.real(dense_eigen_oracle(b).eigenvectors[:, 1])
        s = strength_matrix(b, v2, sign_constrained=True)
        agg = aggregate_bottom_up(
            s, AggregationConfig(sign_constrained=True, sign_vector=v2))
        self.assertLess(agg.n_coarse, 64)
        for j in range(agg.n_coarse):
            members = v2[agg.members(j)]
            self.assertTrue(np.all(members > 0) or np.all(members < 0))


class TransferTestCase(unittest.TestCase):

    def test_restrict_and_prolong(self):
        agg = Aggregation([0, 0, 1, 2, 2])
        x = np.array([1., 3., -2., -1., -3.])
        rx = restrict(agg, x)
        np.testing.assert_allclose([4., -2., -4.], rx)
        np.testing.assert_allclose([0.25, 0.75, 1., 0.25, 0.75],
                                   proportions(agg, x))
        np.testing.assert_allclose(x, prolong(agg, x, rx))
        np.testing.assert_allclose([0.5, 1.5, 7., 0.25, 0.75],
                                   prolong(agg, x, [2., 7., 1.]))

    def test_errors(self):
        agg = Aggregation([0, 0, 1])
        with self.assertRaises(CancellationError):
            proportions(agg, [1., -1., 2.])
        with self.assertRaises(InputError):
            prolong(agg, [1., 1., 1.], [1., 2., 3.])

    def test_write_csv(self):
        with TemporaryDirectory() as tempdir:
            path = os.path.join(tempdir, 'agg.csv')
            write_aggregation_csv(Aggregation([0, 0, 1]), path)
            with codecs.open(path, 'rb', 'utf-8') as f:
                self.assertEqual(
                    'fine_index,aggregate_index\n0,0\n1,0\n2,1\n', f.read())


if __name__ == '__main__':
    unittest.main()
