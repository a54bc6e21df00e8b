# Configuration file for the Sphinx documentation builder of
# snap-asset-pricing
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------
# read the release from the package without importing its dependencies
import os
import re

root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..'))
with open(os.path.join(root, 'snap_toolkit', '__init__.py')) as fid:
    version_line, = [l for l in fid if l.startswith('__version__')]

# -- Project information -----------------------------------------------------
project = 'snap-asset-pricing'
copyright = '2026, snap-asset-pricing developers'
author = 'snap-asset-pricing developers'
release = re.findall(r"'(.*)'", version_line)[0]

# -- General configuration ---------------------------------------------------
# markdown user guides with tables
extensions = ['recommonmark','sphinx_markdown_tables']
exclude_patterns = ['**.ipynb_checkpoints']
source_suffix = ['.rst', '.md']
master_doc = 'index'

# -- Options for HTML output -------------------------------------------------
html_theme = 'sphinxdoc'
