# -*- coding: utf-8 -*-
#
# rbtools documentation build configuration file.
#
# Only the settings that differ from the sphinx-quickstart defaults are
# listed here.

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join('..', 'lib')))

import sphinx_rtd_theme

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'rbtools'
copyright = u'2026, the rbtools developers'
author = u'the rbtools developers'

version = u'0.1'
release = u'0.1.0'

language = None
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'
todo_include_todos = False

html_theme = "sphinx_rtd_theme"
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
html_static_path = []
htmlhelp_basename = 'rbtoolsdoc'

latex_documents = [
    (master_doc, 'rbtools.tex', u'rbtools Documentation',
     author, 'manual'),
]

man_pages = [
    (master_doc, 'rbtools', u'rbtools Documentation',
     [author], 1)
]

texinfo_documents = [
    (master_doc, 'rbtools', u'rbtools Documentation',
     author, 'rbtools', 'Planning and simulation for roundabout driving.',
     'Miscellaneous'),
]

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable/', None),
                       'scipy': ('https://docs.scipy.org/doc/scipy/', None),
                       'pandas': ('https://pandas.pydata.org/docs/', None)}
