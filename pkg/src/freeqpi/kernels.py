"""Word kernels, compiled when the extension is built, pure Python otherwise.

Set ``FREEQPI_PURE=1`` to force the Python implementation.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if not os.environ.get("FREEQPI_PURE"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

free_reduce = _impl.free_reduce
mul = _impl.mul
inverse = _impl.inverse
cyclic_split = _impl.cyclic_split
power = _impl.power
letter_key = _impl.letter_key
shortlex_key = _impl.shortlex_key
substitute = _impl.substitute

__all__ = [
    "BACKEND",
    "free_reduce",
    "mul",
    "inverse",
    "cyclic_split",
    "power",
    "letter_key",
    "shortlex_key",
    "substitute",
]
