"""Kernel backend selection.

The compiled Cython module is used when it was built; otherwise the numpy
implementations in ``_pykernels`` are used. Set ``CTRLMAG_BACKEND=python``
to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("CTRLMAG_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

sample_bilinear = _impl.sample_bilinear
lk_solve = _impl.lk_solve
edt_sq = _impl.edt_sq
splat_bilinear = _impl.splat_bilinear

__all__ = ["BACKEND", "sample_bilinear", "lk_solve", "edt_sq", "splat_bilinear"]
