import json
import math
import unittest

import numpy as np
from scipy.special import logsumexp

from eotsieve.baseline import solve_oracle
from eotsieve.errors import InvalidArgument, NotConverged
from eotsieve.estimator import (estimate_eot, rate_bound, stochastic_term,
                                symmetric_ci, value_from_theta)
from eotsieve.measures import (DiscreteMarginal, UniformMarginal,
                               quadratic_cost)
from eotsieve.reference import ReferenceMeasure
from eotsieve.saa import solve_reduced
from eotsieve.sieve import build_dictionary, build_partition, evaluate_batch

from test.base import rng


def _reference(gamma=2.0, log_a=-0.5):
    return ReferenceMeasure(gamma, quadratic_cost(2.0, 0.0),
                            UniformMarginal(0.0, 1.0),
                            UniformMarginal(0.0, 2.0), log_a, 1e-3, 1000)


class RateTest(unittest.TestCase):

    def test_value_from_theta(self):
        '''Test the dual value maps to the EOT scale decreasingly.'''
        self.assertEqual(value_from_theta(0.0, 0.0, 3.0), 0.0)
        self.assertEqual(math.copysign(1.0, value_from_theta(0.0, 0.0, 3.0)),
                         1.0)
        self.assertAlmostEqual(value_from_theta(-1.0, -0.5, 2.0), 0.75)
        self.assertTrue(value_from_theta(-2.0, -0.5, 2.0) >
                        value_from_theta(-1.0, -0.5, 2.0))
        self.assertEqual(value_from_theta(-math.inf, -0.5, 2.0), math.inf)

    def test_table_primitives(self):
        '''Test the rate diagnostic at the balanced sample size.'''
        self.assertAlmostEqual(stochastic_term(160, 1015), 0.1, places=5)
        self.assertAlmostEqual(rate_bound(0.1, 160, 1015, 100.0, 1.0, 2.0),
                               math.log10(0.4) + 400 / math.log(10), places=4)
        self.assertEqual(round(rate_bound(0.1, 160, 1015, 100.0, 1.0, 2.0),
                               1), 173.3)

    def test_small_gamma(self):
        '''Test the bound approaches its leading factor as gamma vanishes.'''
        lead = max(stochastic_term(160, 1015), 0.1) * 2.0 * 2.0
        self.assertAlmostEqual(rate_bound(0.1, 160, 1015, 1e-12, 1.0, 2.0),
                               math.log10(lead), places=9)

    def test_small_epsilon(self):
        '''Test the stochastic term dominates for small epsilon.'''
        a = rate_bound(1e-6, 160, 1015, 1.0, 1.0, 2.0)
        b = rate_bound(1e-3, 160, 1015, 1.0, 1.0, 2.0)
        self.assertEqual(a, b)

    def test_bad_arguments(self):
        for args in ((0.0, 160, 1015, 1.0, 1.0, 2.0),
                     (0.1, 160, 0, 1.0, 1.0, 2.0),
                     (0.1, 160, 1015, -1.0, 1.0, 2.0),
                     (0.1, 160, 1015, 1.0, 1.0, 0.0)):
            self.assertRaises(InvalidArgument, rate_bound, *args)


class EstimateTest(unittest.TestCase):

    def setUp(self):
        self.values = rng(31).uniform(-1.0, 1.0, size=(400, 6))
        self.solution = solve_reduced(self.values, 4.0, 4.0)
        self.ref = _reference()

    def test_estimate(self):
        '''Test the point estimate and its diagnostics.'''
        est = estimate_eot(self.solution, self.ref, epsilon=0.2, n_total=6,
                           N=400, kappa=1.0)
        self.assertAlmostEqual(est.eot_value,
                               (0.5 - self.solution.log_theta_hat) / 2.0)
        self.assertAlmostEqual(est.theta_hat, self.solution.theta_hat)
        self.assertEqual(est.gamma, 2.0)
        self.assertEqual(est.rate_bound_log10,
                         rate_bound(0.2, 6, 400, 2.0, 1.0, 2.0))
        self.assertEqual(est.solver_status, self.solution.status)
        self.assertIsNone(est.ci_lo)

    def test_without_diagnostics(self):
        est = estimate_eot(self.solution, self.ref)
        self.assertIsNone(est.rate_bound_log10)
        self.assertIsNone(est.epsilon)

    def test_not_converged(self):
        '''Test estimates of an unconverged solve are refused.'''
        sol = solve_reduced(self.values, 4.0, 4.0, options={'max_iters': 1})
        self.assertRaises(NotConverged, estimate_eot, sol, self.ref)
        self.assertRaises(NotConverged, symmetric_ci, sol, self.values, 4.0,
                          4.0)

    def test_ci_ordering(self):
        '''Test the interval brackets the estimate on both scales.'''
        ci = symmetric_ci(self.solution, self.values, 4.0, 4.0,
                          bootstrap_draws=300, index_grid_size=32,
                          rng=rng(32))
        theta = self.solution.theta_hat
        self.assertTrue(0 <= ci.lo <= theta <= ci.hi)
        self.assertTrue(ci.lo < ci.hi)
        self.assertEqual(ci.level, 0.95)
        self.assertEqual(ci.bootstrap_draws, 300)
        self.assertEqual(ci.index_grid_size, 32)
        est = estimate_eot(self.solution, self.ref).with_ci(ci)
        self.assertTrue(est.value_ci_lo <= est.eot_value <= est.value_ci_hi)
        self.assertEqual(est.ci_lo, ci.lo)

    def test_level_widens(self):
        '''Test a higher level never gives a narrower interval.'''
        mult = rng(33).standard_normal((400, 400))
        narrow = symmetric_ci(self.solution, self.values, 4.0, 4.0,
                              level=0.8, index_grid_size=16, rng=rng(34),
                              multipliers=mult)
        wide = symmetric_ci(self.solution, self.values, 4.0, 4.0,
                            level=0.99, index_grid_size=16, rng=rng(34),
                            multipliers=mult)
        self.assertTrue(wide.lo <= narrow.lo and narrow.hi <= wide.hi)

    def test_zero_multipliers(self):
        '''Test vanishing multipliers give a degenerate interval.'''
        ci = symmetric_ci(self.solution, self.values, 4.0, 4.0,
                          index_grid_size=8, rng=rng(),
                          multipliers=np.zeros((10, 400)))
        self.assertEqual(ci.lo, self.solution.theta_hat)
        self.assertEqual(ci.hi, self.solution.theta_hat)
        self.assertEqual(ci.log_quantile, -math.inf)

    def test_interval_reaching_zero(self):
        '''Test a wide interval is cut at zero and unbounded in value.'''
        ci = symmetric_ci(self.solution, self.values, 4.0, 4.0,
                          index_grid_size=8, rng=rng(),
                          multipliers=np.full((10, 400), 1e6) *
                          np.sign(self.values[:, :1].T))
        self.assertEqual(ci.lo, 0.0)
        self.assertEqual(ci.log_lo, -math.inf)
        est = estimate_eot(self.solution, self.ref).with_ci(ci)
        self.assertEqual(est.value_ci_hi, math.inf)
        record = json.loads(est.to_json())
        self.assertIsNone(record['value_ci_hi'])
        self.assertEqual(record['ci_lo'], 0.0)

    def test_bootstrap_repeatable(self):
        '''Test independent bootstrap runs give nearly the same interval.'''
        a = symmetric_ci(self.solution, self.values, 4.0, 4.0,
                         bootstrap_draws=2000, index_grid_size=16,
                         rng=rng(35))
        b = symmetric_ci(self.solution, self.values, 4.0, 4.0,
                         bootstrap_draws=2000, index_grid_size=16,
                         rng=rng(36))
        self.assertTrue(abs(a.lo - b.lo) <= 0.05 * b.lo, (a.lo, b.lo))
        self.assertTrue(abs(a.hi - b.hi) <= 0.05 * b.hi, (a.hi, b.hi))

    def test_two_atom_instance(self):
        '''Test the estimate of a 2 x 2 instance against the grid oracle.'''
        gamma = 2.0
        x = DiscreteMarginal([0.0, 1.0], [0.3, 0.7])
        y = DiscreteMarginal([0.0, 1.0], [0.6, 0.4])
        cost = quadratic_cost(0.5, 0.0)
        # the four support points with their exact reference masses
        xs, ys = np.repeat([0.0, 1.0], 2), np.tile([0.0, 1.0], 2)
        prior = np.repeat(x.weights, 2) * np.tile(y.weights, 2)
        expo = -gamma * cost(xs[:, None], ys[:, None])
        log_a = float(logsumexp(expo, b=prior))
        ref = ReferenceMeasure(gamma, cost, x, y, log_a, 0.0, 0)
        weights = prior * np.exp(expo - log_a)

        part = build_partition(x, y, 0.2)
        self.assertEqual(part.n_total, 4)
        dic = build_dictionary(part, x, y, gamma, cost.sup_norm)
        sol = solve_reduced(evaluate_batch(dic, xs, ys), dic.scale,
                            dic.shift, weights=weights / weights.sum())
        est = estimate_eot(sol, ref)
        oracle = solve_oracle(x, y, quadratic_cost(), gamma,
                              grid_per_axis=16, richardson=False, tol=1e-12)
        self.assertAlmostEqual(est.eot_value, oracle.eot_value, delta=1e-3)
        self.assertTrue(est.theta_hat <= 1.0)

    def test_bad_arguments(self):
        for kwargs in ({'level': 0.5}, {'level': 1.0},
                       {'bootstrap_draws': 100}, {'index_grid_size': 0}):
            self.assertRaises(InvalidArgument, symmetric_ci, self.solution,
                              self.values, 4.0, 4.0, **kwargs)
        self.assertRaises(InvalidArgument, symmetric_ci, self.solution,
                          self.values, 4.0, 4.0,
                          multipliers=np.zeros((10, 3)))


def suite():
    suite = unittest.TestSuite()
    for case in (RateTest, EstimateTest):
        suite.addTest(unittest.TestLoader().loadTestsFromTestCase(case))
    return suite


if __name__ == '__main__':
    unittest.TextTestRunner(verbosity=2).run(suite())
