"""Lexicon-constrained CTC beam search with n-gram shallow fusion.

The search is time-synchronous Viterbi: each state keeps only its best path.
States are merged on (trie node, LM context, last label).  A word is emitted
when the word separator ``|`` is read at a trie node that completes it; the
state then returns to the root with the word appended to its LM context.
The separator read at the root is a silence and costs nothing extra.
Searches that end inside a word are dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .emissions import EmissionMatrix
from .errors import ZrasrError
from .lexicon import LexiconTrie
from .lm import EOS, SOS, NGramModel

LN10 = math.log(10.0)


@dataclass(frozen=True)
class DecodeParams:
    beam_size: int = 50
    lm_weight: float = 2.0
    word_score: float = 0.0
    beam_threshold: float = 25.0
    max_outputs: int = 1

    def __post_init__(self):
        if self.beam_size < 1:
            raise ZrasrError("beam_size must be >= 1")
        if self.lm_weight < 0:
            raise ZrasrError("lm_weight must be >= 0")
        if self.max_outputs < 1:
            raise ZrasrError("max_outputs must be >= 1")
        if not self.beam_threshold > 0:
            raise ZrasrError("beam_threshold must be > 0")


@dataclass(frozen=True)
class Hypothesis:
    words: tuple[str, ...]
    labels: tuple[int, ...]
    acoustic: float
    lm: float
    score: float

    @property
    def text(self) -> str:
        return " ".join(self.words)


def ctc_collapse(labels: Sequence[int], blank: int) -> list[int]:
    return kernels.ctc_collapse(np.asarray(labels, dtype=np.int64), blank).tolist()


def greedy_decode(e: EmissionMatrix) -> list[str]:
    """Best label per frame (lowest index on ties), collapsed; ``|`` kept."""
    ids = kernels.greedy_collapse(e.log_probs, e.inventory.blank)
    return [e.labels[i] for i in ids]


def beam_search(
    e: EmissionMatrix,
    trie: LexiconTrie,
    lm: NGramModel,
    params: DecodeParams | None = None,
) -> list[Hypothesis]:
    p = params or DecodeParams()
    if tuple(e.labels) != tuple(trie.inventory.labels):
        raise ZrasrError("emission labels do not match the lexicon inventory")
    if trie.is_empty:
        raise ZrasrError("cannot decode with an empty lexicon")

    blank = e.inventory.blank
    sep = e.inventory.word_sep
    words = trie.words
    children = [list(c.items()) for c in trie.children]
    completions = trie.completions
    ctx_len = lm.order - 1
    lm_w = p.lm_weight
    lm_cache: dict[tuple, float] = {}

    def lm_ln(ctx, word):
        key = (ctx, word)
        v = lm_cache.get(key)
        if v is None:
            v = lm.score(ctx, word) * LN10
            lm_cache[key] = v
        return v

    def push_ctx(ctx, word):
        if ctx_len <= 0:
            return ()
        return (ctx + (word,))[-ctx_len:]

    # state: key -> [score, acoustic, lm, word_ids, labels]
    start_ctx = (SOS,) if ctx_len > 0 else ()
    states = {(0, start_ctx, -1): [0.0, 0.0, 0.0, (), ()]}
    log_probs = e.log_probs

    for t in range(e.num_frames):
        row = log_probs[t].tolist()
        nxt: dict[tuple, list] = {}

        def offer(key, score, ac, lmv, wids, labs):
            cur = nxt.get(key)
            if cur is None or score > cur[0] or (score == cur[0] and wids < cur[3]):
                nxt[key] = [score, ac, lmv, wids, labs]

        for (node, ctx, last), (score, ac, lmv, wids, labs) in states.items():
            lp = row[blank]
            if lp > -math.inf:
                offer((node, ctx, blank), score + lp, ac + lp, lmv, wids, labs)
            if last >= 0 and last != blank:
                lp = row[last]
                if lp > -math.inf:
                    offer((node, ctx, last), score + lp, ac + lp, lmv, wids, labs)
            if last != sep:
                lp = row[sep]
                if lp > -math.inf:
                    if node == 0:
                        offer((0, ctx, sep), score + lp, ac + lp, lmv, wids, labs + (sep,))
                    else:
                        for wid in completions[node]:
                            w = words[wid]
                            wl = lm_ln(ctx, w)
                            offer(
                                (0, push_ctx(ctx, w), sep),
                                score + lp + lm_w * wl + p.word_score,
                                ac + lp,
                                lmv + wl,
                                wids + (wid,),
                                labs + (sep,),
                            )
            for lab, child in children[node]:
                if lab == last:
                    continue
                lp = row[lab]
                if lp > -math.inf:
                    offer((child, ctx, lab), score + lp, ac + lp, lmv, wids, labs + (lab,))

        if not nxt:
            return []
        best = max(v[0] for v in nxt.values())
        floor = best - p.beam_threshold
        kept = [(k, v) for k, v in nxt.items() if v[0] >= floor]
        kept.sort(key=lambda kv: (-kv[1][0], kv[1][3], kv[1][4]))
        states = dict(kept[: p.beam_size])

    finals: dict[tuple, Hypothesis] = {}
    for (node, ctx, _last), (score, ac, lmv, wids, labs) in states.items():
        if node != 0:
            continue
        wl = lm_ln(ctx, EOS)
        hyp = Hypothesis(
            words=tuple(words[i] for i in wids),
            labels=labs,
            acoustic=ac,
            lm=lmv + wl,
            score=score + lm_w * wl,
        )
        prev = finals.get(wids)
        if prev is None or hyp.score > prev.score:
            finals[wids] = hyp
    ranked = sorted(finals.items(), key=lambda kv: (-kv[1].score, kv[0]))
    return [h for _, h in ranked[: p.max_outputs]]


def combined_score(h: Hypothesis, params: DecodeParams) -> float:
    return h.acoustic + params.lm_weight * h.lm + params.word_score * len(h.words)


def decode_batch(items, trie, lm, params=None, jobs: int = 1):
    """Decode ``(utt_id, EmissionMatrix)`` pairs; results come back sorted by id."""
    items = sorted(items, key=lambda kv: kv[0])
    if jobs <= 1 or len(items) <= 1:
        return [(uid, beam_search(em, trie, lm, params)) for uid, em in items]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(beam_search, em, trie, lm, params) for _, em in items]
        return [(uid, fut.result()) for (uid, _), fut in zip(items, futures)]


def format_hypotheses(results) -> str:
    """TSV rows: utterance id, rank, combined score, words."""
    out = []
    for uid, hyps in results:
        if not hyps:
            out.append(f"{uid}\t1\t-inf\t\n")
        for rank, h in enumerate(hyps, start=1):
            out.append(f"{uid}\t{rank}\t{h.score:.6f}\t{h.text}\n")
    return "".join(out)
