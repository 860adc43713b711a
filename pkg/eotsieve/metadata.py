"""Project metadata.

This information is used in setup.py as well as in doc/source/conf.py.

"""

project_name = 'EOTSieve'
version      = '0.1'
url          = 'https://github.com/eotsieve/eotsieve'
license      = 'Apache License, Version 2.0'
author       = 'The EOTSieve developers'
author_email = 'eotsieve-dev@googlegroups.com'
copyright    = '2026, ' + author
description  = ('Sieve M-estimation of entropically regularized optimal '
                'transport values.')
long_description = '''
EOTSieve estimates the value of the entropically regularized optimal
transport (EOT) problem between compactly supported marginals.

The EOT problem is rewritten as an information projection onto a set of
moment constraints relative to a Gibbs reference measure. The dual of that
projection is approximated by a sieve of finite moment dictionaries and
solved by sample average approximation on draws from the reference measure.
The package provides point estimates and multiplier-bootstrap confidence
intervals for the EOT value, together with two baselines: the empirical
Sinkhorn divergence and a grid-discretization oracle.

A command line harness runs seeded, reproducible Monte Carlo campaigns
comparing the estimators and writes CSV records and box-plot summaries.

EOTSieve requires Python 3.8 or newer, numpy and scipy.
'''
