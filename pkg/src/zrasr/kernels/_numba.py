"""numba-compiled kernels."""
import types

import numpy as np
from numba import njit

from . import _lattice

_logaddexp = njit(cache=True)(_lattice._logaddexp)


def _compiled(fn):
    # same source as the numpy backend, but resolving the helper to its jitted twin
    scope = dict(fn.__globals__, _logaddexp=_logaddexp)
    return njit(cache=True)(types.FunctionType(fn.__code__, scope, fn.__name__))


forward_backward = _compiled(_lattice.forward_backward)
viterbi = _compiled(_lattice.viterbi)


@njit(cache=True)
def edit_distance_matrix(ref, hyp):
    n = ref.shape[0]
    m = hyp.shape[0]
    d = np.empty((n + 1, m + 1), dtype=np.int64)
    for i in range(n + 1):
        d[i, 0] = i
    for j in range(m + 1):
        d[0, j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = d[i - 1, j - 1] + (0 if ref[i - 1] == hyp[j - 1] else 1)
            ins = d[i, j - 1] + 1
            dele = d[i - 1, j] + 1
            best = sub
            if ins < best:
                best = ins
            if dele < best:
                best = dele
            d[i, j] = best
    return d


@njit(cache=True)
def row_logsumexp(x):
    t, v = x.shape
    out = np.empty(t)
    for i in range(t):
        mx = -np.inf
        for j in range(v):
            if x[i, j] > mx:
                mx = x[i, j]
        if mx == -np.inf:
            out[i] = -np.inf
            continue
        s = 0.0
        for j in range(v):
            s += np.exp(x[i, j] - mx)
        out[i] = mx + np.log(s)
    return out


@njit(cache=True)
def greedy_collapse(x, blank):
    """Per-frame argmax (first index on ties), then CTC collapse."""
    t, v = x.shape
    out = np.empty(t, dtype=np.int64)
    k = 0
    prev = -1
    for i in range(t):
        arg = 0
        for j in range(1, v):
            if x[i, j] > x[i, arg]:
                arg = j
        if arg != prev and arg != blank:
            out[k] = arg
            k += 1
        prev = arg
    return out[:k]


@njit(cache=True)
def ctc_collapse(labels, blank):
    out = np.empty(labels.shape[0], dtype=np.int64)
    k = 0
    prev = -1
    for i in range(labels.shape[0]):
        lab = labels[i]
        if lab != prev and lab != blank:
            out[k] = lab
            k += 1
        prev = lab
    return out[:k]
