"""Numeric hot loops.

The numba build is used when numba imports cleanly and the environment
variable ``TEUGELS_NO_NUMBA`` is unset or ``0``; otherwise the pure-numpy
implementations run. Both produce the same random streams up to the last
ulp of ``log1p``/``cos``.
"""
import os

from . import _numpy as numpy_impl

numba_impl = None
if os.environ.get("TEUGELS_NO_NUMBA", "0") in ("", "0"):
    try:
        from . import _numba as numba_impl
    except ImportError:  # pragma: no cover
        numba_impl = None

_impl = numba_impl if numba_impl is not None else numpy_impl
BACKEND = "numba" if numba_impl is not None else "numpy"

stream_keys = _impl.stream_keys
uniforms = _impl.uniforms
normals = _impl.normals
poisson_levels = _impl.poisson_levels
poly_eval = _impl.poly_eval
grid_accumulate = _impl.grid_accumulate
mix64 = numpy_impl.mix64

__all__ = [
    "BACKEND",
    "numpy_impl",
    "numba_impl",
    "stream_keys",
    "uniforms",
    "normals",
    "poisson_levels",
    "poly_eval",
    "grid_accumulate",
    "mix64",
]
