"""Hot kernels, compiled when available.

The Cython extension ``_kernels`` is preferred; ``_fallback`` provides numpy
versions with identical semantics. Set ``PA_COORD_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _fallback

STATUS_OPTIMAL = _fallback.STATUS_OPTIMAL
STATUS_UNBOUNDED = _fallback.STATUS_UNBOUNDED
STATUS_ITERATION_LIMIT = _fallback.STATUS_ITERATION_LIMIT

_compiled = None
if not os.environ.get("PA_COORD_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

ACTIVE = "compiled" if _compiled is not None else "python"


def kernels(name=None):
    """Return the kernel module ``name`` (default: the active one)."""
    return BACKENDS[name or ACTIVE]
