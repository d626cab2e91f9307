"""Backend selection for the numeric hot loops.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported. Set ``ROBUSTPRICE_PURE_PYTHON=1`` to force the
fallback (useful for benchmarking and for checking the two agree).
"""
import os

if os.environ.get("ROBUSTPRICE_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        from . import _pykernels as _impl
        BACKEND = "python"

soft_threshold = _impl.soft_threshold
gaussian_kde = _impl.gaussian_kde
gaussian_kde_loo = _impl.gaussian_kde_loo

__all__ = ["BACKEND", "soft_threshold", "gaussian_kde", "gaussian_kde_loo"]
