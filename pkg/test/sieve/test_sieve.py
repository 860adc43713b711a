import math
import unittest

import numpy as np

from eotsieve.errors import (DegenerateMarginal, InvalidArgument,
                             PartitionBudgetExceeded)
from eotsieve.measures import (DiscreteMarginal, UniformMarginal,
                               quadratic_cost)
from eotsieve.reference import ReferenceMeasure, sample_reference
from eotsieve.sieve import (GENERAL, REDUCED, build_dictionary,
                            build_partition, entropy_condition_ok,
                            evaluate_batch, evaluate_dictionary, kappa,
                            optimal_sample_size, signed_values)

from test.base import rng


class PartitionTest(unittest.TestCase):

    def setUp(self):
        self.x = UniformMarginal(0.0, 1.0)
        self.y = UniformMarginal(0.0, 2.0)

    def test_sizes(self):
        '''Test partition sizes for uniform marginals.'''
        part = build_partition(self.x, self.y, 0.1)
        self.assertEqual((part.n_x, part.n_y, part.n_total), (80, 80, 160))
        part = build_partition(self.x, self.y, 0.2)
        self.assertEqual(part.n_total, 80)
        self.assertFalse(part.check_reference_marginals)

    def test_cdf_increments(self):
        '''Test F changes by at most epsilon / 8 within every cell.'''
        eps = 0.1
        part = build_partition(self.x, self.y, eps)
        for marg, cells in ((self.x, part.x_cells), (self.y, part.y_cells)):
            inc = marg.cdf_values(cells[:, 1]) - marg.cdf_values(cells[:, 0])
            self.assertTrue(np.all(inc <= eps / 8 + 1e-12))
            self.assertEqual(cells[0, 0], marg.support_lo[0])
            self.assertEqual(cells[-1, 1], marg.support_hi[0])

    def test_representatives(self):
        '''Test representatives are cell midpoints.'''
        part = build_partition(self.x, self.y, 0.5)
        self.assertTrue(np.allclose(part.x_representatives,
                                    part.x_cells.mean(axis=1)))
        self.assertEqual(part.x_breakpoints.size, part.n_x + 1)

    def test_point_mass(self):
        '''Test a point mass needs a single cell.'''
        part = build_partition(UniformMarginal(0.3, 0.3), self.y, 0.1)
        self.assertEqual(part.n_x, 1)
        self.assertEqual(part.x_representatives[0], 0.3)

    def test_heavy_atoms(self):
        '''Test atoms heavier than epsilon / 8 get their own waived cells.'''
        x = DiscreteMarginal([0.0, 1.0])
        part = build_partition(x, self.y, 0.1)
        self.assertEqual(part.x_cells.tolist(), [[0.0, 0.0], [1.0, 1.0]])
        self.assertEqual(part.waived_x_cells, (0, 1))
        self.assertEqual(part.waived_y_cells, ())

    def test_bad_epsilon(self):
        for eps in (0.0, 1.0, -0.1, 2.0):
            self.assertRaises(InvalidArgument, build_partition, self.x,
                              self.y, eps)

    def test_to_dict(self):
        d = build_partition(self.x, self.y, 0.5).to_dict()
        self.assertEqual(d['n_total'], 32)
        self.assertEqual(len(d['x_representatives']), 16)

    def test_reference_refinement(self):
        '''Test refinement bounds the reference-marginal cell masses.'''
        ref = ReferenceMeasure.build(5.0, quadratic_cost(), self.x, self.y,
                                     10 ** 4, rng(1))
        eps = 0.2
        part = build_partition(self.x, self.y, eps, ref=ref, rng=rng(2),
                               reference_sample_count=4000)
        self.assertTrue(part.check_reference_marginals)
        self.assertTrue(part.n_total > 80)
        cells = part.y_cells
        self.assertTrue(np.all(cells[1:, 0] == cells[:-1, 1]))

    def test_accuracy_transfer(self):
        '''Test moment functions of one cell stay close in L1(R).'''
        ref = ReferenceMeasure.build(5.0, quadratic_cost(), self.x, self.y,
                                     10 ** 5, rng(3))
        eps = 0.2
        part = build_partition(self.x, self.y, eps, ref=ref, rng=rng(4))
        draws = sample_reference(ref, 10 ** 4, rng=rng(5))
        for marg, cells, obs in ((self.x, part.x_cells, draws.x[:, 0]),
                                 (self.y, part.y_cells, draws.y[:, 0])):
            for a, b in cells:
                # F(a) - 1[obs <= a] minus the same at b
                diff = marg.cdf(a) - marg.cdf(b) - \
                    ((obs <= a).astype(float) - (obs <= b))
                dist = float(np.abs(diff).mean())
                stderr = float(np.abs(diff).std()) / math.sqrt(obs.size)
                self.assertTrue(dist <= eps / 2 + 4 * stderr, (a, b, dist))

    def test_size_scaling(self):
        '''Test halving epsilon at most doubles the cell counts.'''
        x = DiscreteMarginal(np.linspace(0.0, 1.0, 7),
                             [0.05, 0.3, 0.05, 0.2, 0.1, 0.1, 0.2])
        for pair in ((self.x, self.y), (x, self.y)):
            parts = [build_partition(pair[0], pair[1], eps)
                     for eps in (0.4, 0.2, 0.1)]
            for coarse, fine in zip(parts, parts[1:]):
                self.assertTrue(coarse.n_x <= fine.n_x <= 2 * coarse.n_x)
                self.assertTrue(coarse.n_y <= fine.n_y <= 2 * coarse.n_y)
                self.assertTrue(fine.n_total <= 2 * coarse.n_total)

    def test_refinement_budget(self):
        ref = ReferenceMeasure.build(5.0, quadratic_cost(), self.x, self.y,
                                     10 ** 4, rng(1))
        self.assertRaises(PartitionBudgetExceeded, build_partition, self.x,
                          self.y, 0.1, ref=ref, rng=rng(2),
                          reference_sample_count=4000, max_cells=50)


class KappaTest(unittest.TestCase):

    def test_continuous(self):
        self.assertEqual(kappa(UniformMarginal(0, 1), UniformMarginal(0, 2)),
                         1.0)

    def test_atom_at_infimum(self):
        '''Test kappa grows with the mass at the support infima.'''
        x = DiscreteMarginal([0.0, 1.0], [0.5, 0.5])
        y = DiscreteMarginal([0.0, 1.0], [0.75, 0.25])
        self.assertEqual(kappa(x, y), 2.0)
        self.assertEqual(kappa(DiscreteMarginal([0.3]),
                               UniformMarginal(0, 1)), 1.0)

    def test_degenerate(self):
        self.assertRaises(DegenerateMarginal, kappa, DiscreteMarginal([0.3]),
                          UniformMarginal(0.5, 0.5))


class DictionaryTest(unittest.TestCase):

    def setUp(self):
        self.x = UniformMarginal(0.0, 1.0)
        self.y = UniformMarginal(0.0, 2.0)
        self.part = build_partition(self.x, self.y, 0.2)

    def test_scale(self):
        '''Test the exponent scale of both program kinds.'''
        d = build_dictionary(self.part, self.x, self.y, 100.0, 2.0)
        self.assertEqual(d.kind, REDUCED)
        self.assertEqual(d.scale, 200.0)
        self.assertEqual(d.shift, 200.0)
        g = build_dictionary(self.part, self.x, self.y, 100.0, 2.0,
                             kind=GENERAL, kappa_value=1.5)
        self.assertEqual(g.scale, 300.0)
        self.assertRaises(InvalidArgument, build_dictionary, self.part,
                          self.x, self.y, 1.0, 2.0, kind='other')
        self.assertRaises(InvalidArgument, build_dictionary, self.part,
                          self.x, self.y, 1.0, -2.0)

    def test_values(self):
        '''Test the moment functions at single points.'''
        d = build_dictionary(self.part, self.x, self.y, 1.0, 2.0)
        v = evaluate_dictionary(d, (0.0, 2.0))
        self.assertEqual(v.shape, (80,))
        # every indicator of x = inf X is one, none of y = sup Y
        self.assertTrue(np.allclose(v[:40], d.x_levels - 1.0))
        self.assertTrue(np.allclose(v[40:], d.y_levels))
        self.assertTrue(np.all(np.abs(v) <= 1.0))

    def test_mean_zero(self):
        '''Test the moment functions have mean zero under the product.'''
        d = build_dictionary(self.part, self.x, self.y, 1.0, 2.0)
        n = 40000
        g = rng(5)
        values = evaluate_batch(d, self.x.sample(n, g), self.y.sample(n, g))
        self.assertEqual(values.shape, (n, 80))
        self.assertTrue(np.all(np.abs(values.mean(axis=0)) < 5 / math.sqrt(n)))

    def test_signed(self):
        v = np.array([[0.25, -0.5]])
        self.assertEqual(signed_values(v).tolist(), [[0.25, -0.5, -0.25, 0.5]])


class SampleSizeTest(unittest.TestCase):

    def test_rule(self):
        '''Test the balanced sample size.'''
        self.assertEqual(optimal_sample_size(0.1, 160), 1015)
        self.assertEqual(optimal_sample_size(0.2, 80), 220)
        self.assertEqual(optimal_sample_size(0.1, 2), 139)
        self.assertEqual(optimal_sample_size(1.0, 8), 5)
        self.assertRaises(InvalidArgument, optimal_sample_size, 0.1, 1)

    def test_balance(self):
        '''Test the stochastic term matches epsilon up to the ceiling.'''
        for eps, n in ((0.1, 160), (0.2, 80), (0.05, 320), (0.4, 40)):
            big_n = optimal_sample_size(eps, n)
            term = math.sqrt(2 * math.log(n) / big_n)
            self.assertTrue(abs(term - eps) <= eps / big_n, (eps, n, big_n))

    def test_entropy_condition(self):
        self.assertEqual(entropy_condition_ok([(0.2, 80, 500),
                                               (0.1, 160, 1015)]),
                         [True, True])
        self.assertEqual(entropy_condition_ok([(0.1, 160, 1015),
                                               (0.05, 320, 100)]),
                         [True, False])
        self.assertRaises(InvalidArgument, entropy_condition_ok, [])


def suite():
    suite = unittest.TestSuite()
    for case in (PartitionTest, KappaTest, DictionaryTest, SampleSizeTest):
        suite.addTest(unittest.TestLoader().loadTestsFromTestCase(case))
    return suite


if __name__ == '__main__':
    unittest.TextTestRunner(verbosity=2).run(suite())
