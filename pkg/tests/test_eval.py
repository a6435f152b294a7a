from __future__ import annotations

import math
import random

import pytest

from oracles import brute_edit_distance
from zrasr.errors import FormatError, ZrasrError
from zrasr.eval import (
    align,
    corpus_wer,
    edit_distance,
    format_report,
    parse_transcripts,
    transcripts_from_hypotheses,
)


def test_hand_examples():
    assert align("abc", "abc").wer == 0
    r = align("abc", "axc")
    assert (r.substitutions, r.deletions, r.insertions, r.hits) == (1, 0, 0, 2)
    assert r.wer == pytest.approx(1 / 3)
    r = align(["a"], ["a", "b"])
    assert r.insertions == 1 and r.wer == 1.0


def test_tie_preference():
    # one edit either way; a substitution is preferred
    r = align(["a", "b"], ["b", "a"])
    assert (r.substitutions, r.insertions, r.deletions) == (2, 0, 0)
    r = align(["a"], ["b", "c"])
    assert (r.substitutions, r.insertions, r.deletions) == (1, 1, 0)


def test_empty_sequences():
    assert align([], []).wer == 0
    assert align([], ["a"]).wer == math.inf
    assert align(["a", "b"], []).deletions == 2


def test_corpus_examples():
    refs = {"u1": "a b c".split(), "u2": "d e f".split()}
    assert corpus_wer(refs, dict(refs)).wer == 0
    rep = corpus_wer(refs, {"u1": "a b c".split(), "u2": []})
    assert rep.wer == pytest.approx(0.5)
    assert rep.per_utterance["u2"].deletions == 3
    with pytest.raises(ZrasrError, match="u2"):
        corpus_wer(refs, {"u1": []})
    with pytest.raises(ZrasrError, match="u9"):
        corpus_wer(refs, {**refs, "u9": []})


def test_pooled_counts_are_sums():
    rng = random.Random(5)
    refs = {f"u{i}": [rng.choice("abc") for _ in range(rng.randint(0, 6))] for i in range(20)}
    hyps = {k: [rng.choice("abcd") for _ in range(rng.randint(0, 6))] for k in refs}
    rep = corpus_wer(refs, hyps)
    for attr in ("substitutions", "deletions", "insertions", "hits"):
        assert getattr(rep, attr) == sum(getattr(a, attr) for a in rep.per_utterance.values())


def test_dp_matches_brute_force():
    rng = random.Random(0)
    for _ in range(200):
        a = [rng.choice("abc") for _ in range(rng.randint(0, 6))]
        b = [rng.choice("abc") for _ in range(rng.randint(0, 6))]
        r = align(a, b)
        assert r.errors == brute_edit_distance(a, b) == edit_distance(a, b)
        assert r.ref_len == len(a) and r.hyp_len == len(b)


def test_metric_axioms():
    rng = random.Random(1)
    for _ in range(100):
        x, y, z = ([rng.choice("ab") for _ in range(rng.randint(0, 5))] for _ in range(3))
        assert edit_distance(x, x) == 0
        assert edit_distance(x, y) == edit_distance(y, x)
        assert edit_distance(x, z) <= edit_distance(x, y) + edit_distance(y, z)


def test_transcript_files():
    refs = parse_transcripts(["u1\ta b", "u2\t", "", "u3"])
    assert refs == {"u1": ["a", "b"], "u2": [], "u3": []}
    with pytest.raises(FormatError, match=":2"):
        parse_transcripts(["u1\ta", "u1\tb"])
    hyps = transcripts_from_hypotheses(["u1\t1\t-3.0\ta b", "u1\t2\t-4.0\ta", "u2\t1\t-inf\t"])
    assert hyps == {"u1": ["a", "b"], "u2": []}


def test_report_text():
    rep = corpus_wer({"u1": ["a", "b"]}, {"u1": ["a"]})
    text = format_report(rep, per_utterance=True)
    assert "u1\t0\t1\t0\t1\t2\t50.00" in text
    assert text.strip().endswith("WER 50.00% [S=0 D=1 I=0 H=1 N=2]")
