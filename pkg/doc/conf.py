# -*- coding: utf-8 -*-
#
# dpq2p1 documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys

import sphinx_rtd_theme

from dpq2p1 import __version__

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
    'sphinx.ext.imgmath',
    'numpydoc',
    'matplotlib.sphinxext.plot_directive'
]

# this is needed for some reason...
# see https://github.com/numpy/numpydoc/issues/69
numpydoc_show_class_members = False

autodoc_default_options = {'members': True, 'inherited-members': True}

templates_path = ['_templates']

# generate autosummary even if no references
autosummary_generate = True

source_suffix = '.rst'
master_doc = 'index'

project = u'dpq2p1'
copyright = u'2026, the dpq2p1 developers'

version = __version__
release = __version__

exclude_patterns = ['_build', '_templates']

pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]

htmlhelp_basename = 'dpq2p1doc'

# -- Options for LaTeX output ---------------------------------------------

latex_documents = [
    ('index', 'dpq2p1.tex', u'dpq2p1 Documentation',
     u'the dpq2p1 developers', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    ('index', 'dpq2p1', u'dpq2p1 Documentation',
     [u'the dpq2p1 developers'], 1)
]

# intersphinx configuration
intersphinx_mapping = {
    'python': ('https://docs.python.org/{.major}'.format(
        sys.version_info), None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/reference', None),
    'pandas': ('https://pandas.pydata.org/docs/', None),
    'matplotlib': ('https://matplotlib.org/', None),
    'sklearn': ('https://scikit-learn.org/stable', None)
}
