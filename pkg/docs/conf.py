# conf.py

import os
import sys

import sphinx_rtd_theme

# Add your package directory to sys.path
this_file_path = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(this_file_path, ".."))

# -- Project information -----------------------------------------------------
project = "qudithhl"

# The full version, including alpha/beta/rc tags
release = "0.1.0"

# -- General configuration ---------------------------------------------------
extensions = [
    "sphinx.ext.autodoc",  # docstring extraction
    "sphinx.ext.napoleon",  # numpy-style docstrings
    "sphinx_mdinclude",  # markdown pages
]

# The master toctree document.
master_doc = "index"

# -- Options for HTML output -------------------------------------------------
html_theme = "sphinx_rtd_theme"
html_static_path = ["_static"]

index_filename = "README.md"
