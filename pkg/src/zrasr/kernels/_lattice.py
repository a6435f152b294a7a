"""Graphone lattice forward-backward and Viterbi.

Written in the numba-compatible subset so the same source serves both
backends.  All words are packed into flat arrays: edges of word ``w`` are
``edge_start[w]:edge_start[w + 1]``, sorted by source node, where the nodes
of a ``n``-letter, ``m``-phoneme word are numbered ``i * (m + 1) + j``.
"""
import math

import numpy as np


def _logaddexp(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    if a > b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


def forward_backward(logp, edge_start, node_count, src, dst, gid):
    """Expected graphone counts and per-word log-likelihoods."""
    n_words = node_count.shape[0]
    counts = np.zeros(logp.shape[0])
    logz = np.empty(n_words)
    for w in range(n_words):
        e0 = edge_start[w]
        e1 = edge_start[w + 1]
        nn = node_count[w]
        alpha = np.full(nn, -np.inf)
        beta = np.full(nn, -np.inf)
        alpha[0] = 0.0
        beta[nn - 1] = 0.0
        for e in range(e0, e1):
            lp = logp[gid[e]]
            if lp == -np.inf or alpha[src[e]] == -np.inf:
                continue
            alpha[dst[e]] = _logaddexp(alpha[dst[e]], alpha[src[e]] + lp)
        for e in range(e1 - 1, e0 - 1, -1):
            lp = logp[gid[e]]
            if lp == -np.inf or beta[dst[e]] == -np.inf:
                continue
            beta[src[e]] = _logaddexp(beta[src[e]], lp + beta[dst[e]])
        z = alpha[nn - 1]
        logz[w] = z
        if z == -np.inf:
            continue
        for e in range(e0, e1):
            lp = logp[gid[e]]
            if lp == -np.inf:
                continue
            post = alpha[src[e]] + lp + beta[dst[e]] - z
            if post > -700.0:
                counts[gid[e]] += math.exp(post)
    return counts, logz


def viterbi(logp, edge_start, node_count, src, dst, gid):
    """Best graphone path per word; ties go to the smaller graphone id.

    Returns ``(path_gids, path_start, scores)``; the path of word ``w`` is
    ``path_gids[path_start[w]:path_start[w + 1]]`` (empty if unreachable).
    """
    n_words = node_count.shape[0]
    scores = np.empty(n_words)
    total_nodes = 0
    for w in range(n_words):
        total_nodes += node_count[w]
    path_gids = np.empty(total_nodes, dtype=np.int64)
    path_start = np.zeros(n_words + 1, dtype=np.int64)
    pos = 0
    for w in range(n_words):
        e0 = edge_start[w]
        e1 = edge_start[w + 1]
        nn = node_count[w]
        best = np.full(nn, -np.inf)
        back = np.full(nn, -1, dtype=np.int64)
        best[0] = 0.0
        for e in range(e0, e1):
            lp = logp[gid[e]]
            if lp == -np.inf or best[src[e]] == -np.inf:
                continue
            s = best[src[e]] + lp
            d = dst[e]
            if s > best[d] or (s == best[d] and back[d] >= 0 and gid[e] < gid[back[d]]):
                best[d] = s
                back[d] = e
        scores[w] = best[nn - 1]
        if best[nn - 1] == -np.inf:
            path_start[w + 1] = pos
            continue
        # walk back, then reverse in place
        start = pos
        node = nn - 1
        while node != 0:
            e = back[node]
            path_gids[pos] = gid[e]
            pos += 1
            node = src[e]
        i = start
        j = pos - 1
        while i < j:
            tmp = path_gids[i]
            path_gids[i] = path_gids[j]
            path_gids[j] = tmp
            i += 1
            j -= 1
        path_start[w + 1] = pos
    return path_gids[:pos], path_start, scores
