# blockorder documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys
sys.path.insert(0, os.path.abspath('../..'))

import blockorder  # noqa: E402

# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.doctest',
              'sphinx.ext.intersphinx',
              'sphinx.ext.todo',
              'sphinx.ext.coverage',
              'sphinx.ext.mathjax',
              'sphinx.ext.viewcode',
              'sphinx.ext.githubpages']

templates_path = []  # '_templates'
source_suffix = '.rst'
source_encoding = 'utf-8'
master_doc = 'index'

# General information about the project.
project = 'blockorder'
copyright = '2024, blockorder developers'
author = 'blockorder developers'

version = blockorder.__version__
release = blockorder.__version__

language = None
exclude_patterns = []
pygments_style = 'sphinx'
todo_include_todos = True

# -- Options for HTML output ----------------------------------------------

html_theme = 'classic'
html_static_path = []  # '_static'
htmlhelp_basename = 'blockorder'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
    'papersize': 'letterpaper',
    'pointsize': '12pt',
}
latex_documents = [
    (master_doc, 'blockorder.tex', 'blockorder Documentation',
     author, 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    ('manpage',
     'blockorder',
     'estimate the number of communities in multi-layer and dynamic SBMs',
     [author],
     1)  # Section 1 - General Commands
]

# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
    (master_doc, 'blockorder', 'blockorder Documentation',
     author, 'blockorder', blockorder.__about__.__summary__,
     'Miscellaneous'),
]

intersphinx_mapping = {'https://docs.python.org/3': None,
                       'https://numpy.org/doc/stable/': None}
