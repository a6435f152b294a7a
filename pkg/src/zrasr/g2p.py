"""Joint-sequence (graphone) grapheme-to-phoneme model and lexicon extension.

Training has two stages.  EM over all segmentations of each training pair
into graphones (up to 2 letters x 2 phonemes) fits a unigram graphone
distribution; the initial distribution favours 1:1 graphones so that EM
settles on letter-by-letter alignments where the data allows.  Each pair is
then segmented by Viterbi and an n-gram model over the graphone sequences is
estimated with add-delta smoothing that backs off to the next lower order.

Prediction is a beam search over graphone sequences that spell the word
exactly.  At most one letterless graphone may appear between two letters.
"""
from __future__ import annotations

import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import FormatError, ZrasrError
from .lexicon import Lexicon, Pron, process_pron
from .phonology import Phoneme

MAX_LETTERS = 2
MAX_PHONES = 2
MAGIC = "G2P1"
BOS = -1
END = -2

# initial mass per graphone shape (letters, phonemes); 1:1 dominates
_SHAPE_PRIOR = {
    (1, 1): 1.0,
    (1, 0): 0.1,
    (0, 1): 0.1,
    (2, 1): 0.1,
    (1, 2): 0.1,
    (2, 2): 0.01,
    (2, 0): 0.01,
    (0, 2): 0.01,
}


@dataclass(frozen=True, order=True)
class Graphone:
    letters: str
    phones: tuple[str, ...]

    def __post_init__(self):
        if len(self.letters) > MAX_LETTERS or len(self.phones) > MAX_PHONES:
            raise ZrasrError(f"graphone {self} exceeds {MAX_LETTERS}x{MAX_PHONES}")
        if not self.letters and not self.phones:
            raise ZrasrError("graphone cannot be empty on both sides")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.letters), len(self.phones)

    def __str__(self):
        return f"{self.letters or '_'}:{' '.join(self.phones) or '_'}"


@dataclass(frozen=True)
class PronCandidate:
    word: str
    pron: Pron
    confidence: float
    logprob: float


def _pairs(lex: Lexicon) -> list[tuple[str, tuple[str, ...]]]:
    return [(w, tuple(p.canonical for p in pron)) for w, pron in lex]


def _lattice(pairs, index: dict[Graphone, int] | None):
    """Pack every pair's segmentation lattice into flat edge arrays.

    With ``index=None`` the graphone inventory is collected instead.
    """
    collect = index is None
    found: set[Graphone] = set()
    src, dst, gid = [], [], []
    edge_start = [0]
    node_count = []
    for word, phones in pairs:
        n, m = len(word), len(phones)
        width = m + 1
        for i in range(n + 1):
            for j in range(m + 1):
                s = i * width + j
                for a in range(MAX_LETTERS + 1):
                    if i + a > n:
                        break
                    for b in range(MAX_PHONES + 1):
                        if j + b > m:
                            break
                        if a == 0 and b == 0:
                            continue
                        g = Graphone(word[i : i + a], phones[j : j + b])
                        if collect:
                            found.add(g)
                            continue
                        src.append(s)
                        dst.append((i + a) * width + j + b)
                        gid.append(index[g])
        edge_start.append(len(src))
        node_count.append((n + 1) * width)
    if collect:
        return sorted(found)
    return (
        np.asarray(edge_start, dtype=np.int64),
        np.asarray(node_count, dtype=np.int64),
        np.asarray(src, dtype=np.int64),
        np.asarray(dst, dtype=np.int64),
        np.asarray(gid, dtype=np.int64),
    )


def _initial_logp(inventory: Sequence[Graphone]) -> np.ndarray:
    per_shape = Counter(g.shape for g in inventory)
    w = np.array([_SHAPE_PRIOR[g.shape] / per_shape[g.shape] for g in inventory])
    return np.log(w / w.sum())


@dataclass
class G2PModel:
    order: int
    graphones: list[Graphone]
    ngram_counts: dict[tuple[int, ...], int]
    delta: float = 0.01
    em_loglik: list[float] = field(default_factory=list)
    _ctx_total: dict = field(default_factory=dict, repr=False, compare=False)
    _unigram_total: int = field(default=0, repr=False, compare=False)
    _by_letters: dict = field(default_factory=dict, repr=False, compare=False)
    _inserts: list = field(default_factory=list, repr=False, compare=False)
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.order < 1:
            raise ZrasrError(f"G2P order must be >= 1, got {self.order}")
        totals: Counter = Counter()
        for g, c in self.ngram_counts.items():
            if len(g) == 1:
                self._unigram_total += c
            else:
                totals[g[:-1]] += c
        self._ctx_total = dict(totals)
        for i, gr in enumerate(self.graphones):
            if gr.letters:
                self._by_letters.setdefault(gr.letters, []).append(i)
            else:
                self._inserts.append(i)

    @property
    def vocab_size(self) -> int:
        return len(self.graphones) + 1  # + END

    def prob(self, history: Sequence[int], g: int) -> float:
        """P(g | history), add-delta smoothed, backing off to shorter histories."""
        h = tuple(history)[-(self.order - 1) :] if self.order > 1 else ()
        key = (h, g)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        mass = self.delta * self.vocab_size
        if not h:
            p = (self.ngram_counts.get((g,), 0) + self.delta) / (self._unigram_total + mass)
        else:
            lower = self.prob(h[1:], g)
            total = self._ctx_total.get(h, 0)
            p = lower if total == 0 else (self.ngram_counts.get(h + (g,), 0) + mass * lower) / (total + mass)
        self._memo[key] = p
        return p

    def logprob(self, history: Sequence[int], g: int) -> float:
        return math.log(self.prob(history, g))

    def sequence_logprob(self, gids: Sequence[int]) -> float:
        """Joint log-probability of a full graphone sequence, end symbol included."""
        hist = [BOS]
        total = 0.0
        for g in list(gids) + [END]:
            total += self.logprob(hist, g)
            hist.append(g)
        return total

    def graphone_ids(self, letters: str) -> list[int]:
        return self._by_letters.get(letters, [])

    @property
    def insertion_ids(self) -> list[int]:
        return self._inserts

    def contexts(self) -> list[tuple[int, ...]]:
        return [()] + list(self._ctx_total)


@dataclass(frozen=True)
class EMAlignment:
    """Unigram graphone distribution fitted by EM, plus training segmentations."""

    inventory: list[Graphone]
    logp: np.ndarray
    loglik: list[float]
    segmentations: list[list[Graphone]]


def em_align(lex: Lexicon, em_iters: int = 5) -> EMAlignment:
    if len(lex) == 0:
        raise ZrasrError("cannot train G2P on an empty lexicon")
    if em_iters < 1:
        raise ZrasrError("em_iters must be >= 1")
    pairs = _pairs(lex)
    inventory = _lattice(pairs, None)
    index = {g: i for i, g in enumerate(inventory)}
    arrays = _lattice(pairs, index)

    logp = _initial_logp(inventory)
    history = []
    for _ in range(em_iters):
        counts, logz = kernels.forward_backward(logp, *arrays)
        history.append(float(logz.sum()))
        with np.errstate(divide="ignore"):
            logp = np.log(counts / counts.sum())
    _, logz = kernels.forward_backward(logp, *arrays)
    history.append(float(logz.sum()))

    path, path_start, scores = kernels.viterbi(logp, *arrays)
    seqs = [
        [inventory[g] for g in path[path_start[w] : path_start[w + 1]]]
        for w in range(len(pairs))
        if np.isfinite(scores[w])
    ]
    return EMAlignment(inventory, logp, history, seqs)


def train_g2p(lex: Lexicon, order: int = 5, em_iters: int = 5, delta: float = 0.01) -> G2PModel:
    if order < 1:
        raise ZrasrError(f"G2P order must be >= 1, got {order}")
    em = em_align(lex, em_iters)
    used = sorted({g for s in em.segmentations for g in s})
    uid = {g: i for i, g in enumerate(used)}
    ngrams: Counter = Counter()
    for s in em.segmentations:
        toks = [BOS] + [uid[g] for g in s] + [END]
        for end in range(1, len(toks)):
            for k in range(1, order + 1):
                start = end - k + 1
                if start < 0:
                    break
                ngrams[tuple(toks[start : end + 1])] += 1
    return G2PModel(order, used, dict(sorted(ngrams.items())), delta, em.loglik)


def viterbi_segmentation(model_inventory: Sequence[Graphone], logp: np.ndarray, word: str, phones: Sequence[str]):
    """Best segmentation of one pair under a unigram graphone distribution."""
    index = {g: i for i, g in enumerate(model_inventory)}
    pairs = [(word, tuple(phones))]
    try:
        arrays = _lattice(pairs, index)
    except KeyError:
        return None
    path, start, scores = kernels.viterbi(np.asarray(logp, dtype=np.float64), *arrays)
    if not np.isfinite(scores[0]):
        return None
    return [model_inventory[g] for g in path[start[0] : start[1]]], float(scores[0])


def predict_pronunciations(model: G2PModel, word: str, k: int = 4, beam: int = 64) -> list[PronCandidate]:
    if k < 1:
        raise ZrasrError("k must be >= 1")
    n = len(word)
    hist_len = model.order - 1
    start = (BOS,) if hist_len > 0 else ()

    def push(h, g):
        return (h + (g,))[-hist_len:] if hist_len > 0 else ()

    layers: list[dict] = [dict() for _ in range(n + 1)]
    layers[0][(start, (), False)] = 0.0

    def add(layer, key, s):
        if s > layer.get(key, -math.inf):
            layer[key] = s

    for i in range(n + 1):
        layer = layers[i]
        for (h, ph, ins), s in list(layer.items()):
            if ins:
                continue
            for g in model.insertion_ids:
                add(layer, (push(h, g), ph + model.graphones[g].phones, True), s + model.logprob(h, g))
        ranked = sorted(layer.items(), key=lambda kv: (-kv[1], kv[0]))[:beam]
        layers[i] = dict(ranked)
        if i == n:
            break
        for (h, ph, _), s in ranked:
            for a in range(1, MAX_LETTERS + 1):
                if i + a > n:
                    break
                for g in model.graphone_ids(word[i : i + a]):
                    add(layers[i + a], (push(h, g), ph + model.graphones[g].phones, False), s + model.logprob(h, g))

    best: dict[tuple[str, ...], float] = {}
    for (h, ph, _), s in layers[n].items():
        if not ph:
            continue
        total = s + model.logprob(h, END)
        if total > best.get(ph, -math.inf):
            best[ph] = total
    top = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    if not top:
        return []
    mx = top[0][1]
    weights = [math.exp(s - mx) for _, s in top]
    z = sum(weights)
    return [
        PronCandidate(word, tuple(Phoneme.parse(x) for x in ph), w / z, s)
        for (ph, s), w in zip(top, weights)
    ]


def extend_lexicon(
    lex: Lexicon,
    model: G2PModel,
    k: int = 4,
    min_chars: int = 5,
    top_frac: float = 0.10,
    per_word: bool = False,
    strict_length: bool = False,
    split: bool = True,
) -> Lexicon:
    """Add the most confident new G2P pronunciations to ``lex``.

    Words shorter than ``min_chars`` (or not longer, with ``strict_length``)
    get no candidates.  Candidates equal to an existing pronunciation of their
    word, compared after the phoneme pipeline, are dropped.  Of the rest the
    top ``ceil(top_frac * pool)`` by confidence are kept, over the whole pool
    or, with ``per_word``, within each word's own candidates.
    """
    if not 0.0 < top_frac <= 1.0:
        raise ZrasrError(f"top_frac must be in (0, 1], got {top_frac}")
    pool = []
    for wi, word in enumerate(lex.words()):
        if len(word) < min_chars or (strict_length and len(word) == min_chars):
            continue
        existing = {process_pron(p, split) for p in lex.prons(word)}
        for rank, cand in enumerate(predict_pronunciations(model, word, k)):
            pron = process_pron(cand.pron, split)
            if pron in existing:
                continue
            existing.add(pron)
            pool.append((cand.confidence, wi, rank, word, pron))

    def quota(size):
        return min(size, math.ceil(top_frac * size - 1e-9))

    order = lambda c: (-c[0], c[1], c[2])  # noqa: E731
    if per_word:
        groups: dict[int, list] = {}
        for c in pool:
            groups.setdefault(c[1], []).append(c)
        keep = [c for g in groups.values() for c in sorted(g, key=order)[: quota(len(g))]]
    else:
        keep = sorted(pool, key=order)[: quota(len(pool))]
    keep.sort(key=lambda c: (c[1], c[2]))
    return lex.extended((word, pron) for _, _, _, word, pron in keep)


# --- serialization ---------------------------------------------------------------


def _sym(i: int) -> str:
    return "<s>" if i == BOS else "</s>" if i == END else str(i)


def _unsym(s: str) -> int:
    return BOS if s == "<s>" else END if s == "</s>" else int(s)


def dumps_model(model: G2PModel) -> str:
    out = [MAGIC, f"order\t{model.order}", f"delta\t{model.delta!r}", f"graphones\t{len(model.graphones)}"]
    for i, g in enumerate(model.graphones):
        out.append(f"{i}\t{g.letters}\t{' '.join(g.phones)}")
    out.append(f"ngrams\t{len(model.ngram_counts)}")
    for key, c in model.ngram_counts.items():
        out.append(f"{' '.join(_sym(x) for x in key)}\t{c}")
    out.append(f"em_loglik\t{' '.join(repr(x) for x in model.em_loglik)}")
    return "\n".join(out) + "\n"


def save_model(model: G2PModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(model))


def loads_model(text: str, source: str = "<string>") -> G2PModel:
    lines = text.split("\n")
    if not lines or lines[0] != MAGIC:
        raise FormatError(f"missing {MAGIC} header", source, 1)
    pos = 1

    def field_line(name):
        nonlocal pos
        if pos >= len(lines):
            raise FormatError(f"truncated before {name!r}", source, pos + 1)
        key, _, val = lines[pos].partition("\t")
        if key != name:
            raise FormatError(f"expected {name!r}, got {key!r}", source, pos + 1)
        pos += 1
        return val

    try:
        order = int(field_line("order"))
        delta = float(field_line("delta"))
        n_g = int(field_line("graphones"))
        graphones = []
        for i in range(n_g):
            idx, letters, phones = lines[pos].split("\t")
            if int(idx) != i:
                raise FormatError(f"graphone ids out of order at {idx}", source, pos + 1)
            graphones.append(Graphone(letters, tuple(phones.split())))
            pos += 1
        n_ng = int(field_line("ngrams"))
        counts = {}
        for _ in range(n_ng):
            key, c = lines[pos].split("\t")
            counts[tuple(_unsym(x) for x in key.split())] = int(c)
            pos += 1
        ll = field_line("em_loglik")
    except (ValueError, IndexError) as exc:
        raise FormatError(f"malformed model: {exc}", source, pos + 1) from None
    em = [float(x) for x in ll.split()]
    return G2PModel(order, graphones, counts, delta, em)


def load_model(path: str | os.PathLike) -> G2PModel:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read(), source=str(path))
