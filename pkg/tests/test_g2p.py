from __future__ import annotations

import math
import random

import pytest

from oracles import g2p_exhaustive, segmentations
from zrasr.errors import FormatError, ZrasrError
from zrasr.g2p import (
    END,
    Graphone,
    dumps_model,
    em_align,
    extend_lexicon,
    load_model,
    loads_model,
    predict_pronunciations,
    save_model,
    train_g2p,
    viterbi_segmentation,
)
from zrasr.lexicon import Lexicon, parse_pron

# letter -> possible phonemes; several letters are ambiguous
AMBIGUOUS = {"a": ["a", "æ"], "c": ["k", "s"], "e": ["e", "ɛ"], "t": ["t"], "n": ["n"], "o": ["o", "ɔ"], "s": ["s", "z"]}


def identity_lexicon(words):
    return Lexicon(tuple((w, parse_pron(" ".join(w))) for w in words))


def random_words(rng, letters, n, lo=3, hi=8):
    out = []
    while len(out) < n:
        w = "".join(rng.choice(letters) for _ in range(rng.randint(lo, hi)))
        if w not in out:
            out.append(w)
    return out


@pytest.fixture(scope="module")
def ambiguous_model():
    rng = random.Random(11)
    words = random_words(rng, "acteons", 150)
    entries = [(w, parse_pron(" ".join(rng.choice(AMBIGUOUS[ch]) for ch in w))) for w in words]
    return train_g2p(Lexicon(tuple(entries)), order=3)


@pytest.fixture(scope="module")
def ab_model():
    rng = random.Random(2)
    return train_g2p(identity_lexicon(random_words(rng, "ab", 50, 3, 9)))


def test_graphone_bounds():
    Graphone("ab", ("a", "b"))
    Graphone("", ("a",))
    with pytest.raises(ZrasrError):
        Graphone("abc", ("a",))
    with pytest.raises(ZrasrError):
        Graphone("a", ("a", "b", "c"))
    with pytest.raises(ZrasrError):
        Graphone("", ())


def test_train_errors():
    with pytest.raises(ZrasrError):
        train_g2p(Lexicon())
    with pytest.raises(ZrasrError):
        train_g2p(identity_lexicon(["ab"]), order=0)
    with pytest.raises(ZrasrError):
        train_g2p(identity_lexicon(["ab"]), em_iters=0)


def test_identity_alignment_is_one_to_one_by_brute_force():
    rng = random.Random(2)
    lex = identity_lexicon(random_words(rng, "ab", 50, 3, 9))
    em = em_align(lex, 5)
    logp = {g: lp for g, lp in zip(em.inventory, em.logp)}
    four = [w for w in lex.words() if len(w) == 4]
    assert four
    for w in four:
        phones = tuple(w)
        scored = []
        for seg in segmentations(w, phones):
            gs = [Graphone(a, b) for a, b in seg]
            scored.append((sum(logp.get(g, -math.inf) for g in gs), gs))
        best_score, best = max(scored, key=lambda x: x[0])
        assert all(g.shape == (1, 1) for g in best)
        vit, vscore = viterbi_segmentation(em.inventory, em.logp, w, phones)
        assert vit == best and vscore == pytest.approx(best_score)
    assert all(all(g.shape == (1, 1) for g in s) for s in em.segmentations)


def test_em_loglik_non_decreasing(ambiguous_model):
    ll = ambiguous_model.em_loglik
    assert len(ll) == 6
    assert all(b >= a - 1e-6 for a, b in zip(ll, ll[1:]))


def test_single_entry():
    m = train_g2p(identity_lexicon(["cat"]))
    cands = predict_pronunciations(m, "cat")
    assert cands[0].pron == parse_pron("c a t") and cands[0].confidence == 1.0


def test_baab(ab_model):
    cands = predict_pronunciations(ab_model, "baab")
    assert cands[0].pron == parse_pron("b a a b") and cands[0].confidence > 0.9
    oracle = g2p_exhaustive(ab_model, "baab")
    top = max(oracle.items(), key=lambda kv: kv[1])
    assert top[0] == tuple("baab") and cands[0].logprob == pytest.approx(top[1], abs=1e-9)


@pytest.mark.parametrize("word", ["cat", "neon", "scot", "tac"])
def test_beam_matches_exhaustive_oracle(ambiguous_model, word):
    oracle = g2p_exhaustive(ambiguous_model, word)
    ranked = sorted(oracle.items(), key=lambda kv: (-kv[1], kv[0]))[:4]
    cands = predict_pronunciations(ambiguous_model, word, k=4, beam=10**6)
    assert [tuple(p.canonical for p in c.pron) for c in cands] == [r[0] for r in ranked]
    assert [c.logprob for c in cands] == pytest.approx([r[1] for r in ranked], abs=1e-9)


def test_candidate_contract(ambiguous_model):
    cands = predict_pronunciations(ambiguous_model, "ocean", k=4)
    assert len(cands) == 4
    assert len({c.pron for c in cands}) == 4
    assert sum(c.confidence for c in cands) == pytest.approx(1.0, abs=1e-6)
    assert [c.confidence for c in cands] == sorted((c.confidence for c in cands), reverse=True)
    assert all(0 < c.confidence <= 1 for c in cands)
    one = predict_pronunciations(ambiguous_model, "ocean", k=1)
    assert len(one) == 1 and one[0].confidence == 1.0 and one[0].pron == cands[0].pron
    assert predict_pronunciations(ambiguous_model, "xyz") == []
    with pytest.raises(ZrasrError):
        predict_pronunciations(ambiguous_model, "cat", k=0)


def test_ngram_contexts_normalized(ambiguous_model):
    m = ambiguous_model
    symbols = list(range(len(m.graphones))) + [END]
    for ctx in m.contexts():
        assert sum(m.prob(ctx, g) for g in symbols) == pytest.approx(1.0, abs=1e-6)


def test_identity_accuracy_non_decreasing_with_em():
    rng = random.Random(4)
    words = random_words(rng, "ptkaeiosmn", 250)
    lex = identity_lexicon(words[:200])

    def accuracy(m):
        hits = sum(
            bool(c) and c[0].pron == parse_pron(" ".join(w))
            for w in words[200:]
            for c in [predict_pronunciations(m, w, 1)]
        )
        return hits / 50

    assert accuracy(train_g2p(lex, em_iters=5)) >= accuracy(train_g2p(lex, em_iters=1))


def test_serialization_round_trip(tmp_path, ambiguous_model):
    path = tmp_path / "m.g2p"
    save_model(ambiguous_model, path)
    back = load_model(path)
    assert dumps_model(back) == dumps_model(ambiguous_model)
    assert back.graphones == ambiguous_model.graphones
    for w in ("cat", "ocean", "tosca"):
        assert predict_pronunciations(back, w) == predict_pronunciations(ambiguous_model, w)


def test_load_errors():
    text = dumps_model(train_g2p(identity_lexicon(["ab", "ba"])))
    with pytest.raises(FormatError, match=":1"):
        loads_model("G2P0\n" + text.split("\n", 1)[1])
    with pytest.raises(FormatError, match="x.g2p:2"):
        loads_model(text.replace("order\t", "ordre\t"), source="x.g2p")
    with pytest.raises(FormatError):
        loads_model("\n".join(text.split("\n")[:5]))


# --- lexicon extension ----------------------------------------------------------------


def rich_words(seed, n):
    """Words with at least two ambiguous letters, hence at least four readings."""
    rng = random.Random(seed)
    pool = random_words(rng, "acteons", 10 * n, 5, 8)
    return [w for w in pool if sum(len(AMBIGUOUS[ch]) > 1 for ch in w) >= 2][:n]


def foreign_lexicon(words):
    """Pronunciations no G2P candidate can reproduce."""
    return Lexicon(tuple((w, parse_pron("ʔ")) for w in words))


def test_extension_arithmetic(ambiguous_model):
    long_words = rich_words(7, 20)
    short = ["cat", "ton", "sea"]
    lex = foreign_lexicon(short + long_words)
    out = extend_lexicon(lex, ambiguous_model, k=4, min_chars=5, top_frac=0.10)
    assert len(out) - len(lex) == 8
    assert set(lex.entries) <= set(out.entries)
    full = extend_lexicon(lex, ambiguous_model, k=4, min_chars=5, top_frac=1.0)
    assert len(full) == len(lex) + 20 * 4


def test_extension_short_words_untouched(ambiguous_model):
    lex = foreign_lexicon(["cat", "ton", "sea", "neo"])
    assert extend_lexicon(lex, ambiguous_model) == lex


def test_extension_length_rule(ambiguous_model):
    lex = foreign_lexicon(["canoe", "ocean", "ascent"])
    both = extend_lexicon(lex, ambiguous_model, top_frac=1.0)
    strict = extend_lexicon(lex, ambiguous_model, top_frac=1.0, strict_length=True)
    assert {w for w, _ in both.entries[3:]} == {"canoe", "ocean", "ascent"}
    assert {w for w, _ in strict.entries[3:]} == {"ascent"}


def test_extension_drops_existing_prons(ambiguous_model):
    top = predict_pronunciations(ambiguous_model, "ocean", k=4)
    lex = Lexicon((("ocean", top[0].pron),))
    out = extend_lexicon(lex, ambiguous_model, top_frac=1.0)
    assert len(out) == 4
    assert out.prons("ocean")[1:] == [c.pron for c in top[1:]]


def test_extension_selection_order_and_per_word(ambiguous_model):
    words = rich_words(8, 10)
    lex = foreign_lexicon(words)
    pool = []
    for wi, w in enumerate(words):
        for r, c in enumerate(predict_pronunciations(ambiguous_model, w, 4)):
            pool.append((-c.confidence, wi, r, w, c.pron))
    expect = sorted(pool)[: math.ceil(0.25 * len(pool))]
    out = extend_lexicon(lex, ambiguous_model, top_frac=0.25)
    assert set(out.entries[len(lex):]) == {(w, p) for *_, w, p in expect}
    per = extend_lexicon(lex, ambiguous_model, top_frac=0.25, per_word=True)
    added = per.entries[len(lex):]
    assert all(sum(1 for w, _ in added if w == x) == 1 for x in words)
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ZrasrError):
            extend_lexicon(lex, ambiguous_model, top_frac=bad)
