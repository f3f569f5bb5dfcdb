"""Backend selection for the hot loops.

The compiled extension ``cdm._kernels`` is used when it imports; otherwise,
or when ``CDM_PURE_PYTHON`` is set to a non-empty value other than ``0``, the
numpy implementations in ``cdm._kernels_py`` are used. Both expose the same
four functions.
"""

import os

from cdm import _kernels_py

BACKENDS = {"python": _kernels_py}

try:
    from cdm import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    BACKENDS["compiled"] = _compiled

if _compiled is not None and os.environ.get("CDM_PURE_PYTHON", "0") in ("", "0"):
    BACKEND = "compiled"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]

pairwise_dist = _impl.pairwise_dist
psi_sums = _impl.psi_sums
weiszfeld = _impl.weiszfeld
smo = _impl.smo
