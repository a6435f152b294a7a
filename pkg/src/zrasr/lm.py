"""Backoff n-gram language model with interpolated Kneser-Ney estimation.

Probabilities are stored in log10, as in ARPA files.  Each stored n-gram keeps
its interpolated probability and each context keeps its interpolation weight
as the backoff weight, so backoff scoring reproduces the interpolated model
exactly.  Lower orders use continuation counts, except for n-grams starting
with ``<s>``, which keep raw counts (they cannot be extended to the left).
"""
from __future__ import annotations

import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import FormatError, ZrasrError

SOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
SOS_LOGPROB = -99.0

Counts = list[Counter]


def _tokens(sentence) -> list[str]:
    return sentence.split() if isinstance(sentence, str) else list(sentence)


def count_ngrams(corpus: Iterable[Sequence[str] | str], n: int) -> Counts:
    """Raw counts for orders 1..n; ``counts[k - 1]`` maps k-tuples to counts.

    Each sentence is wrapped as ``<s> ... </s>``; ``<s>`` is only ever a
    context, never a predicted token.
    """
    if n < 1:
        raise ZrasrError(f"n-gram order must be >= 1, got {n}")
    counts: Counts = [Counter() for _ in range(n)]
    for sent in corpus:
        toks = [SOS] + _tokens(sent) + [EOS]
        for end in range(1, len(toks)):
            for k in range(1, n + 1):
                start = end - k + 1
                if start < 0:
                    break
                counts[k - 1][tuple(toks[start : end + 1])] += 1
    return counts


@dataclass
class NGramModel:
    order: int
    probs: list[dict[tuple[str, ...], float]]
    bows: dict[tuple[str, ...], float]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def vocab(self) -> list[str]:
        return [g[0] for g in self.probs[0]]

    def predictable(self) -> list[str]:
        """Tokens that can follow a context: everything except ``<s>``."""
        return [w for w in self.vocab if w != SOS]

    def __contains__(self, word: str) -> bool:
        return (word,) in self.probs[0]

    def score(self, context: Sequence[str], word: str) -> float:
        """log10 P(word | context) with longest-match backoff."""
        key = (tuple(context), word)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        unigrams = self.probs[0]
        if (word,) not in unigrams:
            word = UNK
        ctx = tuple(w if (w,) in unigrams else UNK for w in context)
        ctx = ctx[len(ctx) - self.order + 1 :] if self.order > 1 else ()
        total = 0.0
        while True:
            lp = self.probs[len(ctx)].get(ctx + (word,))
            if lp is not None:
                total += lp
                break
            if not ctx:
                raise ZrasrError(f"vocabulary lacks {word!r}")
            total += self.bows.get(ctx, 0.0)
            ctx = ctx[1:]
        self._cache[key] = total
        return total

    def sentence_logprob(self, sentence: Sequence[str] | str, eos: bool = True) -> float:
        toks = _tokens(sentence) + ([EOS] if eos else [])
        ctx = [SOS]
        total = 0.0
        for w in toks:
            total += self.score(ctx, w)
            ctx.append(w)
        return total

    def contexts(self) -> list[tuple[str, ...]]:
        """Every context that has at least one stored continuation."""
        seen: dict[tuple[str, ...], None] = {(): None}
        for table in self.probs[1:]:
            for g in table:
                seen.setdefault(g[:-1], None)
        return list(seen)

    def num_ngrams(self) -> list[int]:
        return [len(t) for t in self.probs]


def estimate(counts: Counts, n: int | None = None, discount: float = 0.75) -> NGramModel:
    if not 0.0 < discount < 1.0:
        raise ZrasrError(f"discount must be in (0, 1), got {discount}")
    n = len(counts) if n is None else n
    if n < 1 or n > len(counts):
        raise ZrasrError(f"order {n} not available from counts of order {len(counts)}")
    raw = counts[:n]

    # adjusted counts per order
    adj: list[dict[tuple[str, ...], float]] = []
    for k in range(1, n + 1):
        if k == n:
            adj.append(dict(raw[k - 1]))
            continue
        cont: Counter = Counter()
        for g in raw[k]:
            cont[g[1:]] += 1
        table = {}
        for g, c in raw[k - 1].items():
            table[g] = float(c) if g[0] == SOS else float(cont.get(g, 0))
        adj.append(table)

    vocab = sorted({g[0] for g in raw[0]} - {SOS} | {EOS, UNK}) if raw else [EOS, UNK]
    probs: list[dict[tuple[str, ...], float]] = []
    lin: list[dict[tuple[str, ...], float]] = []
    gammas: list[dict[tuple[str, ...], float]] = []

    for k in range(1, n + 1):
        totals: Counter = Counter()
        types: Counter = Counter()
        for g, a in adj[k - 1].items():
            if a > 0:
                totals[g[:-1]] += a
                types[g[:-1]] += 1
        gamma = {h: discount * types[h] / totals[h] for h in totals}
        table = {}
        if k == 1:
            total = totals.get((), 0.0)
            g0 = gamma.get((), 1.0) if total > 0 else 1.0
            gamma[()] = g0
            for w in vocab:
                a = adj[0].get((w,), 0.0)
                p = (max(a - discount, 0.0) / total if total > 0 else 0.0) + g0 / len(vocab)
                table[(w,)] = p
        else:
            lower = lin[k - 2]
            for g, a in adj[k - 1].items():
                if a <= 0:
                    continue
                h = g[:-1]
                table[g] = (a - discount) / totals[h] + gamma[h] * lower[g[1:]]
        lin.append(table)
        gammas.append(gamma)
        probs.append({g: math.log10(p) for g, p in table.items()})

    probs[0][(SOS,)] = SOS_LOGPROB
    bows = {}
    for k in range(2, n + 1):
        for h, gm in gammas[k - 1].items():
            bows[h] = math.log10(gm)
    # sort for deterministic iteration and ARPA output
    probs = [dict(sorted(t.items())) for t in probs]
    return NGramModel(n, probs, dict(sorted(bows.items())))


def train_lm(corpus: Iterable[Sequence[str] | str], order: int = 5, discount: float = 0.75) -> NGramModel:
    return estimate(count_ngrams(corpus, order), order, discount)


def write_arpa(model: NGramModel, path: str | os.PathLike | None = None) -> str:
    lines = ["", "\\data\\"]
    for k, table in enumerate(model.probs, start=1):
        lines.append(f"ngram {k}={len(table)}")
    for k, table in enumerate(model.probs, start=1):
        lines.append("")
        lines.append(f"\\{k}-grams:")
        for g, lp in table.items():
            row = f"{lp:.6f}\t{' '.join(g)}"
            if k < model.order and g in model.bows:
                row += f"\t{model.bows[g]:.6f}"
            lines.append(row)
    lines += ["", "\\end\\", ""]
    text = "\n".join(lines)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def parse_arpa(lines: Iterable[str], source: str = "<string>") -> NGramModel:
    declared: dict[int, int] = {}
    probs: list[dict[tuple[str, ...], float]] = []
    bows: dict[tuple[str, ...], float] = {}
    section = None  # None | "data" | int order | "end"
    header_line: dict[int, int] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "\\data\\":
            section = "data"
            continue
        if line == "\\end\\":
            section = "end"
            continue
        if line.startswith("\\") and line.endswith("-grams:"):
            try:
                k = int(line[1 : -len("-grams:")])
            except ValueError:
                raise FormatError(f"bad section header {line!r}", source, lineno) from None
            if k != len(probs) + 1 or k not in declared:
                raise FormatError(f"unexpected section {line!r}", source, lineno)
            probs.append({})
            header_line[k] = lineno
            section = k
            continue
        if section == "data":
            if not line.startswith("ngram ") or "=" not in line:
                raise FormatError(f"bad \\data\\ line {line!r}", source, lineno)
            k, _, c = line[6:].partition("=")
            try:
                declared[int(k)] = int(c)
            except ValueError:
                raise FormatError(f"bad \\data\\ line {line!r}", source, lineno) from None
            continue
        if isinstance(section, int):
            parts = line.split()
            k = section
            if len(parts) not in (k + 1, k + 2):
                raise FormatError(f"expected {k}-gram entry, got {line!r}", source, lineno)
            try:
                lp = float(parts[0])
                bow = float(parts[k + 1]) if len(parts) == k + 2 else None
            except ValueError:
                raise FormatError(f"bad number in {line!r}", source, lineno) from None
            g = tuple(parts[1 : k + 1])
            probs[k - 1][g] = lp
            if bow is not None:
                bows[g] = bow
            continue
        if section is None:
            continue  # header text before \data\ is allowed
        raise FormatError(f"unexpected line {line!r}", source, lineno)
    if section != "end":
        raise FormatError("missing \\end\\ marker", source)
    if not probs:
        raise FormatError("no n-gram sections", source)
    for k, c in declared.items():
        if k > len(probs):
            raise FormatError(f"declared {c} {k}-grams but section is missing", source)
        if len(probs[k - 1]) != c:
            raise FormatError(
                f"declared {c} {k}-grams, found {len(probs[k - 1])}", source, header_line[k]
            )
    if (UNK,) not in probs[0]:
        probs[0][(UNK,)] = SOS_LOGPROB
    return NGramModel(len(probs), probs, bows)


def read_arpa(path: str | os.PathLike) -> NGramModel:
    with open(path, encoding="utf-8") as fh:
        return parse_arpa(fh, source=str(path))
