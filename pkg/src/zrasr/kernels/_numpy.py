"""Pure-numpy kernels, used when numba is unavailable or disabled."""
import numpy as np

from ._lattice import forward_backward, viterbi  # noqa: F401 (plain-Python loops)


def edit_distance_matrix(ref, hyp):
    n, m = len(ref), len(hyp)
    d = np.empty((n + 1, m + 1), dtype=np.int64)
    d[0] = np.arange(m + 1)
    steps = np.arange(m + 1)
    for i in range(1, n + 1):
        prev = d[i - 1]
        cand = np.empty(m + 1, dtype=np.int64)
        cand[0] = i
        cand[1:] = np.minimum(prev[:-1] + (hyp != ref[i - 1]), prev[1:] + 1)
        # row[j] = min_k (cand[k] + j - k) resolves the left-to-right insertion chain
        d[i] = np.minimum.accumulate(cand - steps) + steps
    return d


def row_logsumexp(x):
    mx = np.max(x, axis=1)
    safe = np.where(np.isfinite(mx), mx, 0.0)
    with np.errstate(divide="ignore"):
        return np.log(np.sum(np.exp(x - safe[:, None]), axis=1)) + safe


def ctc_collapse(labels, blank):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        return labels
    keep = np.ones(labels.shape[0], dtype=bool)
    keep[1:] = labels[1:] != labels[:-1]
    keep &= labels != blank
    return labels[keep]


def greedy_collapse(x, blank):
    return ctc_collapse(np.argmax(x, axis=1), blank)
