#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Run Sphinx, the Python documentation tool.

   First try the Sphinx build command of the current Python
   installation.  If Sphinx is not importable, fall back to the
   ``sphinx-build`` script on the ``PATH`` which may belong to a
   different Python version.

   Used by ``run.py --html`` and ``run.py --doctest`` to build the
   EOTSieve manual from ``doc/source``.
'''

import sys

try:
    from sphinx.cmd.build import main
    sys.exit(main(sys.argv[1:]))

except ImportError:
    pass

 # Sphinx not installed in this Python build,
 # try running the standalone sphinx-build
import os

os.execlp('sphinx-build', 'sphinx-build', *sys.argv[1:])
