# Sphinx configuration for the LWFR Solver documentation.
import os
import re

with open(os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'lwfr', 'version.py'), 'r') as fd:
    __version__ = re.search(r'^__version__\s*=\s*[\'"]([^\'"]*)[\'"]', fd.read(), re.MULTILINE).group(1)

project = 'LWFR Solver'
author = 'LWFR Solver developers'
copyright = '2026, ' + author
version = __version__
release = __version__

extensions = []
source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = ['_build']
pygments_style = 'sphinx'

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'LWFRSolverdoc'

man_pages = [
    (master_doc, 'lwfr', 'LWFR Solver Documentation', [author], 1),
]
