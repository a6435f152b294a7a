"""Brute-force reference implementations used by the tests."""
from __future__ import annotations

import itertools
import math
import random

import numpy as np

from zrasr.decoder import DecodeParams
from zrasr.lexicon import Lexicon, build_trie
from zrasr.lm import EOS, SOS, train_lm
from zrasr.phonology import Phoneme, PhonemeInventory

LN10 = math.log(10.0)


def collapse(path, blank):
    out, prev = [], None
    for lab in path:
        if lab != prev and lab != blank:
            out.append(lab)
        prev = lab
    return out


def exhaustive_decode(e, lex: Lexicon, lm, params: DecodeParams) -> float:
    """Best combined score over every frame-level label path."""
    inv = e.inventory
    blank, sep = inv.blank, inv.word_sep
    prons: dict[tuple, list[str]] = {}
    for w, p in lex:
        prons.setdefault(tuple(inv.index(x) for x in p), []).append(w)
    lp = e.log_probs
    best = -math.inf
    for path in itertools.product(range(len(inv)), repeat=e.num_frames):
        segments, cur, ok = [], [], True
        for tok in collapse(path, blank):
            if tok != sep:
                cur.append(tok)
            elif cur:
                if tuple(cur) not in prons:
                    ok = False
                    break
                segments.append(prons[tuple(cur)])
                cur = []
        if not ok or cur:
            continue
        ac = float(sum(lp[t, lab] for t, lab in enumerate(path)))
        for words in itertools.product(*segments):
            ctx, lm_total = [SOS], 0.0
            for w in list(words) + [EOS]:
                lm_total += lm.score(ctx[-(lm.order - 1):] if lm.order > 1 else [], w) * LN10
                ctx.append(w)
            score = ac + params.lm_weight * lm_total + params.word_score * len(words)
            best = max(best, score)
    return best


def random_instance(seed: int):
    """Tiny decoding problem: T <= 6, V <= 4, at most 3 words."""
    rng = random.Random(seed)
    phones = ["a", "k"][: rng.choice([1, 2])]
    inv = PhonemeInventory.from_phonemes(phones)
    entries = []
    for i in range(rng.randint(1, 3)):
        pron = tuple(Phoneme.parse(rng.choice(phones)) for _ in range(rng.randint(1, 3)))
        entries.append((f"w{i}", pron))
    lex = Lexicon(tuple(entries))
    words = lex.words()
    corpus = [[rng.choice(words) for _ in range(rng.randint(1, 3))] for _ in range(5)]
    lm = train_lm(corpus, order=rng.choice([1, 2, 3]))
    t = rng.randint(1, 6)
    nrng = np.random.default_rng(seed)
    probs = nrng.dirichlet(np.ones(len(inv)) * 0.5, size=t)
    probs = np.clip(probs, 1e-12, None)
    logp = np.log(probs / probs.sum(axis=1, keepdims=True))
    from zrasr.emissions import EmissionMatrix

    e = EmissionMatrix(logp, inv)
    params = DecodeParams(
        beam_size=10**9,
        beam_threshold=math.inf,
        lm_weight=rng.choice([0.0, 0.5, 2.0]),
        word_score=rng.choice([-1.0, 0.0, 1.5]),
    )
    return e, lex, build_trie(lex, inv), lm, params


def brute_edit_distance(a, b) -> int:
    if not a:
        return len(b)
    if not b:
        return len(a)
    return min(
        brute_edit_distance(a[1:], b[1:]) + (a[0] != b[0]),
        brute_edit_distance(a[1:], b) + 1,
        brute_edit_distance(a, b[1:]) + 1,
    )


def segmentations(word: str, phones: tuple, max_l: int = 2, max_p: int = 2):
    """Every split of (word, phones) into graphones of at most max_l x max_p."""
    if not word and not phones:
        yield []
        return
    for a in range(max_l + 1):
        for b in range(max_p + 1):
            if (a == 0 and b == 0) or a > len(word) or b > len(phones):
                continue
            for rest in segmentations(word[a:], phones[b:], max_l, max_p):
                yield [(word[:a], phones[:b])] + rest


def g2p_exhaustive(model, word: str) -> dict[tuple, float]:
    """Best joint log-probability per pronunciation over all graphone sequences
    that spell ``word`` with no two letterless graphones in a row."""
    best: dict[tuple, float] = {}

    def walk(pos, prev_insert, gids):
        if pos == len(word):
            phones = tuple(p for g in gids for p in model.graphones[g].phones)
            if phones:
                s = model.sequence_logprob(gids)
                if s > best.get(phones, -math.inf):
                    best[phones] = s
        for gid, g in enumerate(model.graphones):
            if not g.letters:
                if not prev_insert:
                    walk(pos, True, gids + [gid])
            elif word.startswith(g.letters, pos):
                walk(pos + len(g.letters), False, gids + [gid])

    walk(0, False, [])
    return best
