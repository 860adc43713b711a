# -*- coding: utf-8 -*-
#
# EOTSieve documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.
#
# All configuration values have a default value; values that are commented out
# serve to show the default value.

import sys, os

sys.path.append(os.path.abspath(os.path.join('..', '..')))
import eotsieve.metadata as metadata

# General configuration
# ---------------------

# Add any Sphinx extension module names here, as strings. They can be extensions
# coming with Sphinx (named 'sphinx.ext.*') or your custom ones.
extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest',
              'sphinx.ext.mathjax']

# Add any paths that contain templates here, relative to this directory.
templates_path = ['.templates']

# The suffix of source filenames.
source_suffix = ['.rst']

# The master toctree document.
master_doc = 'index'

# General substitutions.
project = metadata.project_name
copyright = metadata.copyright

# The short X.Y version.
version = metadata.version
# The full version, including alpha/beta/rc tags.
release = metadata.version

today_fmt = '%B %d, %Y'

# The name of the Pygments (syntax highlighting) style to use.
pygments_style = 'sphinx'

# Members are listed in source order, matching the module docstrings.
autodoc_member_order = 'bysource'

# Setup code shared by all doctest blocks in the manual.
doctest_global_setup = '''
import numpy as np
'''


# Options for HTML output
# -----------------------

html_theme = 'default'

# Add any paths that contain custom static files (such as style sheets) here,
# relative to this directory.
html_static_path = ['.static']

# If not '', a 'Last updated on:' timestamp is inserted at every page bottom,
# using the given strftime format.
html_last_updated_fmt = '%b %d, %Y'

# Output file base name for HTML help builder.
htmlhelp_basename = 'eotsievedoc'


# Options for LaTeX output
# ------------------------

# Grouping the document tree into LaTeX files. List of tuples
# (source start file, target name, title, author, document class [howto/manual]).
latex_documents = [
  ('index', 'eotsieve.tex', metadata.project_name + ' Documentation', metadata.author, 'manual'),
]
