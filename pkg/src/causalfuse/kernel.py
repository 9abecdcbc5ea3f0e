"""Backend selection for the witness search.

The compiled extension is used when it imports; set
``CAUSALFUSE_PURE_PYTHON=1`` to force the pure-Python implementation.
"""
import os

from . import _kernel_py

OP_VAR = _kernel_py.OP_VAR
OP_CONST = _kernel_py.OP_CONST
OP_NOT = _kernel_py.OP_NOT
OP_AND = _kernel_py.OP_AND
OP_OR = _kernel_py.OP_OR
OP_XOR = _kernel_py.OP_XOR

pure_first_witness = _kernel_py.first_witness

try:
    from ._kernel import first_witness as compiled_first_witness
except ImportError:  # extension not built
    compiled_first_witness = None

if compiled_first_witness is not None and not os.environ.get("CAUSALFUSE_PURE_PYTHON"):
    first_witness = compiled_first_witness
    BACKEND = "cython"
else:
    first_witness = pure_first_witness
    BACKEND = "python"
