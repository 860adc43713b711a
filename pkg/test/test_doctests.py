import doctest
import unittest

from eotsieve import (baseline, estimator, harness, measures, report, saa,
                      sieve)
from eotsieve.util import stringutils


MODULES = (measures, sieve, saa, estimator, baseline, report, harness,
           stringutils)


def suite():
    suite = unittest.TestSuite()
    for mod in MODULES:
        suite.addTest(doctest.DocTestSuite(mod))
    return suite


def load_tests(loader, tests, pattern):
    tests.addTest(suite())
    return tests


if __name__ == '__main__':
    unittest.TextTestRunner(verbosity=2).run(suite())
