import io
import math
import unittest

from eotsieve.report import (RESULT_COLUMNS, SCHEMA_VERSION, Stats,
                             _format_table, box_stats, read_results_csv,
                             write_results_csv)


def _records():
    return [{'replication_index': 1, 'seed': 2 ** 63 + 5,
             'sieve_value': 0.1725, 'sinkhorn_value': 0.21,
             'theta_hat': 1.5e-80, 'acceptance_rate': 0.0571,
             'solver_iterations': 412},
            {'replication_index': 0, 'seed': 17, 'sieve_value': 0.1975,
             'sinkhorn_value': 0.2311, 'theta_hat': 2.5e-81,
             'ci_lo': 1e-81, 'ci_hi': 4e-81, 'acceptance_rate': 0.0566,
             'solver_iterations': 380},
            {'replication_index': 2, 'seed': 99,
             'acceptance_rate': 0.0001,
             'sieve_error': 'AcceptanceBudgetExceeded'}]


class ResultsFileTest(unittest.TestCase):

    def test_write_read(self):
        '''Test results survive a write and read unchanged.'''
        out = io.StringIO()
        write_results_csv(_records(), out)
        text = out.getvalue()
        lines = text.splitlines()
        self.assertEqual(lines[0], '# schema_version=%d' % SCHEMA_VERSION)
        self.assertEqual(lines[1], ','.join(RESULT_COLUMNS))
        self.assertTrue(lines[2].startswith('0,17,'))
        records = read_results_csv(io.StringIO(text))
        self.assertEqual([r['replication_index'] for r in records], [0, 1, 2])
        self.assertEqual(records[1]['seed'], 2 ** 63 + 5)
        self.assertEqual(records[1]['theta_hat'], 1.5e-80)
        self.assertIsNone(records[1]['ci_lo'])
        self.assertEqual(records[2]['sieve_error'],
                         'AcceptanceBudgetExceeded')
        self.assertIsNone(records[2]['sinkhorn_error'])
        self.assertIsNone(records[0]['sieve_error'])

    def test_timings_column(self):
        out = io.StringIO()
        recs = [dict(_records()[0], wall_time_ms=12.5)]
        write_results_csv(recs, out, record_timings=True)
        records = read_results_csv(io.StringIO(out.getvalue()))
        self.assertEqual(records[0]['wall_time_ms'], 12.5)
        out = io.StringIO()
        write_results_csv(recs, out)
        self.assertNotIn('wall_time_ms', out.getvalue())

    def test_schema_header(self):
        self.assertRaises(ValueError, read_results_csv,
                          io.StringIO('replication_index,seed\n'))
        self.assertRaises(ValueError, read_results_csv,
                          io.StringIO('# schema_version=99\n'))


class StatsTest(unittest.TestCase):

    def test_box_stats(self):
        '''Test box-plot figures and Tukey whiskers.'''
        st = box_stats([4, 1, 3, 100, 2])
        self.assertEqual((st['q1'], st['median'], st['q3']), (2.0, 3.0, 4.0))
        self.assertEqual((st['whisker_lo'], st['whisker_hi']), (1.0, 4.0))
        self.assertEqual((st['min'], st['max']), (1.0, 100.0))
        self.assertEqual(st['outliers'], 1)

    def test_summary(self):
        '''Test per estimator statistics against a target value.'''
        stats = Stats(_records(), target_value=0.1846)
        summ = stats.summary()
        self.assertEqual(summ['replications'], 3)
        self.assertEqual(summ['failures'], 1)
        self.assertEqual((summ['failures_sieve'], summ['failures_sinkhorn']),
                         (1, 0))
        self.assertFalse(summ['complete'])
        sieve = summ['estimators']['sieve']
        self.assertEqual(sieve['count'], 2)
        self.assertAlmostEqual(sieve['mean'], 0.185)
        self.assertAlmostEqual(sieve['mean_abs_dev'], 0.0125)
        self.assertAlmostEqual(sieve['abs_dev_of_mean'], 0.0004)
        self.assertAlmostEqual(summ['estimators']['sinkhorn']['mean'],
                               0.22055)

    def test_without_target(self):
        stats = Stats([{'replication_index': 0, 'sieve_value': 0.2},
                       {'replication_index': 1, 'sieve_value': math.nan}])
        summ = stats.summary()
        self.assertNotIn('mean_abs_dev', summ['estimators']['sieve'])
        self.assertEqual(summ['estimators']['sieve']['count'], 1)
        self.assertNotIn('sinkhorn', summ['estimators'])

    def test_dump_load(self):
        '''Test dumped summaries load again.'''
        tmp = io.StringIO()
        Stats(_records(), 0.1846, extra={'N': 1015}).dump_stats(tmp,
                                                                 close=False)
        tmp.seek(0)
        loaded = Stats(stream=io.StringIO())
        loaded.load_stats(tmp)
        self.assertEqual(loaded.target_value, 0.1846)
        self.assertEqual(loaded.summary()['N'], 1015)
        self.assertEqual(loaded.summary()['estimators']['sieve']['count'], 2)

    def test_print_summary(self):
        out = io.StringIO()
        Stats(_records(), 0.1846, stream=out,
              extra={'wall_time_s': 75.0}).print_summary()
        text = out.getvalue()
        self.assertIn('sieve', text)
        self.assertIn('sinkhorn', text)
        self.assertIn('target value: 0.1846', text)
        self.assertIn('failed replications: 1 of 3', text)
        self.assertIn('wall time: 00:01:15.00', text)

    def test_format_table(self):
        rows = list(_format_table([['a', 'bb'], [1, 22]]))
        self.assertEqual(rows, ['  a |   bb', '=== | ====', '  1 |   22'])


def suite():
    suite = unittest.TestSuite()
    for case in (ResultsFileTest, StatsTest):
        suite.addTest(unittest.TestLoader().loadTestsFromTestCase(case))
    return suite


if __name__ == '__main__':
    unittest.TextTestRunner(verbosity=2).run(suite())
