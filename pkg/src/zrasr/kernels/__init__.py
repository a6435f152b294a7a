"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

Set ``ZRASR_DISABLE_NUMBA=1`` to force the numpy path.  Both backends expose
the same functions and are interchangeable; ``BACKEND`` names the active one.
"""
import logging
import os

from . import _numpy

log = logging.getLogger(__name__)

_backend = _numpy
BACKEND = "numpy"
if os.environ.get("ZRASR_DISABLE_NUMBA", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _numba

        _backend = _numba
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        log.warning("numba unavailable, using numpy kernels")

edit_distance_matrix = _backend.edit_distance_matrix
row_logsumexp = _backend.row_logsumexp
greedy_collapse = _backend.greedy_collapse
ctc_collapse = _backend.ctc_collapse
forward_backward = _backend.forward_backward
viterbi = _backend.viterbi


def backends():
    """Map of backend name -> module, for tests and benchmarks."""
    out = {"numpy": _numpy}
    try:
        from . import _numba

        out["numba"] = _numba
    except ImportError:  # pragma: no cover
        pass
    return out
