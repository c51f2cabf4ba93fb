"""Select the compiled kernels when available, else the numpy fallback.

Set ``CONECAP_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

if os.environ.get("CONECAP_PURE_PYTHON", "") not in ("", "0"):
    kernels = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = _fallback
        BACKEND = "python"

stencil_apply = kernels.stencil_apply
pcg_stencil = kernels.pcg_stencil
imcf_step = kernels.imcf_step
