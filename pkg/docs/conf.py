# Sphinx configuration of the cantilever-lattice docs.
# Build with: poetry run sphinx-build -b html docs docs/_build

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

project = "cantilever-lattice"
copyright = "2023, Hryhorii Biloshenko"
author = "Hryhorii Biloshenko"

extensions = [
    "myst_parser",
    "sphinx.ext.napoleon",
    "sphinx.ext.autodoc",
    "sphinx.ext.mathjax",
]
source_suffix = {".rst": "restructuredtext", ".md": "markdown"}
myst_enable_extensions = ["dollarmath"]

exclude_patterns = ["_build"]

html_theme = "furo"
html_title = "cantilever-lattice"

napoleon_google_docstring = True
napoleon_numpy_docstring = False
napoleon_include_init_with_doc = True
napoleon_use_param = True

autodoc_default_options = {
    "member-order": "bysource",
    "special-members": "__slots__",
}
autodoc_mock_imports = ["matplotlib"]
autodoc_typehints = "signature"
autodoc_typehints_format = "short"
autodoc_inherit_docstrings = True

napoleon_type_aliases = autodoc_type_aliases = {
    "FloatArray": "FloatArray",
    "Result": "Result",
    "NoneResult": "NoneResult",
    "CantileverResult": "CantileverResult",
    "NoneCantileverResult": "NoneCantileverResult",
    "ExternalForceField": "ExternalForceField",
}
