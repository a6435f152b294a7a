from __future__ import annotations

import math

import numpy as np
import pytest

from oracles import exhaustive_decode, random_instance
from zrasr.decoder import (
    DecodeParams,
    beam_search,
    combined_score,
    ctc_collapse,
    decode_batch,
    format_hypotheses,
    greedy_decode,
)
from zrasr.emissions import EmissionMatrix, synthesize_emissions
from zrasr.errors import ZrasrError
from zrasr.lexicon import Lexicon, build_trie, parse_pron
from zrasr.lm import train_lm
from zrasr.phonology import PhonemeInventory

INV = PhonemeInventory.from_phonemes(["a", "k", "m", "s", "t"])
LEX = Lexicon((("cat", parse_pron("k a t")), ("sat", parse_pron("s a t")), ("mat", parse_pron("m a t"))))
TRIE = build_trie(LEX, INV)


def seq(text):
    out = []
    for w in text.split():
        out += list(dict(LEX.entries)[w]) + ["|"]
    return out


def test_ctc_collapse_examples():
    b = 0
    assert ctc_collapse([2, 2, b, 3], b) == [2, 3]
    assert ctc_collapse([2, b, 2], b) == [2, 2]
    assert ctc_collapse([b, b], b) == []


def test_greedy_examples():
    e = synthesize_emissions(parse_pron("k a t"), INV)
    assert greedy_decode(e) == ["k", "a", "t"]
    blank = np.full((4, len(INV)), -np.inf)
    blank[:, 0] = 0.0
    assert greedy_decode(EmissionMatrix(blank, INV)) == []
    uniform = np.full((5, len(INV)), -math.log(len(INV)))
    assert len(greedy_decode(EmissionMatrix(uniform, INV))) <= 1


def test_cat_sat_end_to_end():
    lm = train_lm(["cat sat"], order=2)
    e = synthesize_emissions(seq("cat sat"), INV)
    top = beam_search(e, TRIE, lm)[0]
    assert top.words == ("cat", "sat")
    assert top.acoustic == 0.0


def test_forced_alignment_score():
    lex = Lexicon((("cat", parse_pron("k a t")),))
    trie = build_trie(lex, INV)
    lm = train_lm(["cat"], order=2)
    e = synthesize_emissions(seq("cat"), INV, noise=0.2, swap=False)
    top = beam_search(e, trie, lm, DecodeParams(lm_weight=0.0))[0]
    assert top.words == ("cat",)
    assert top.acoustic == pytest.approx(float(e.log_probs.max(axis=1).sum()), abs=1e-9)


def test_score_components_and_trie_consistency():
    lm = train_lm(["cat sat", "mat sat cat", "sat"], order=3)
    params = DecodeParams(word_score=0.7, max_outputs=5)
    e = synthesize_emissions(seq("mat sat cat"), INV, noise=0.3, seed=4)
    hyps = beam_search(e, TRIE, lm, params)
    assert hyps
    assert [h.score for h in hyps] == sorted((h.score for h in hyps), reverse=True)
    for h in hyps:
        assert h.score == pytest.approx(combined_score(h, params), abs=1e-9)
        words, cur = [], []
        for lab in h.labels:
            if lab == INV.word_sep:
                if cur:
                    node = TRIE.walk(cur + [lab])
                    assert node >= 0
                    words.append([TRIE.words[i] for i in TRIE.completions[node]])
                cur = []
            else:
                cur.append(lab)
        assert not cur
        assert all(w in opts for w, opts in zip(h.words, words)) and len(words) == len(h.words)


def test_errors():
    lm = train_lm(["cat"], order=2)
    other = PhonemeInventory.from_phonemes(["a", "k", "t"])
    e = synthesize_emissions(parse_pron("k a t"), other)
    with pytest.raises(ZrasrError, match="do not match"):
        beam_search(e, TRIE, lm)
    e = synthesize_emissions(parse_pron("k a t"), INV)
    with pytest.raises(ZrasrError, match="empty lexicon"):
        beam_search(e, build_trie(Lexicon(), INV), lm)
    with pytest.raises(ZrasrError):
        DecodeParams(beam_size=0)
    with pytest.raises(ZrasrError):
        DecodeParams(lm_weight=-1)


def test_mid_word_endings_are_dropped():
    lm = train_lm(["cat"], order=2)
    e = synthesize_emissions(parse_pron("k a"), INV)
    assert beam_search(e, TRIE, lm) == []


@pytest.mark.parametrize("seed", range(25))
def test_matches_exhaustive_search(seed):
    e, lex, trie, lm, params = random_instance(seed)
    hyps = beam_search(e, trie, lm, params)
    assert hyps[0].score == pytest.approx(exhaustive_decode(e, lex, lm, params), abs=1e-6)


def test_larger_beams_never_worse():
    lm = train_lm(["cat sat", "mat sat cat", "sat mat", "cat cat sat"], order=3)
    for seed in range(5):
        e = synthesize_emissions(seq("mat sat cat sat"), INV, noise=0.4, seed=seed)
        scores = []
        for beam in (1, 5, 50, 500):
            hyps = beam_search(e, TRIE, lm, DecodeParams(beam_size=beam, beam_threshold=math.inf))
            scores.append(hyps[0].score if hyps else -math.inf)
        assert scores == sorted(scores), (seed, scores)


def test_deterministic_and_batch_order():
    lm = train_lm(["cat sat", "mat sat cat"], order=2)
    items = [(f"u{i}", synthesize_emissions(seq("cat sat"), INV, noise=0.3, seed=i)) for i in (3, 1, 2)]
    one = decode_batch(items, TRIE, lm, jobs=1)
    assert [uid for uid, _ in one] == ["u1", "u2", "u3"]
    assert decode_batch(items, TRIE, lm, jobs=1) == one
    assert format_hypotheses(decode_batch(items, TRIE, lm, jobs=2)) == format_hypotheses(one)


def test_format_hypotheses():
    lm = train_lm(["cat"], order=2)
    e = synthesize_emissions(seq("cat"), INV)
    text = format_hypotheses([("u1", beam_search(e, TRIE, lm)), ("u2", [])])
    lines = text.splitlines()
    assert lines[0].split("\t")[:2] == ["u1", "1"] and lines[0].endswith("\tcat")
    assert lines[1] == "u2\t1\t-inf\t"
