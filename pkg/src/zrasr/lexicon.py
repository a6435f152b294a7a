"""Pronunciation lexicon: file I/O, phoneme pipeline, OOV remapping and the
prefix trie used by the constrained decoder.

File format: ``word<TAB>space separated phonemes``, UTF-8, ``#`` comments.
The word boundary symbol is not written in the file; the trie appends it.
"""
from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import FormatError, ZrasrError
from .phonology import (
    RESERVED,
    WORD_SEP,
    FeatureTable,
    Phoneme,
    PhonemeInventory,
    get_table,
    map_oov,
    phoneme_distance,
    split_polyphthongs,
    strip_stress,
    tokenize_ipa,
)
from .textnorm import Alphabet, normalize_text

Pron = tuple[Phoneme, ...]


@dataclass(frozen=True)
class Lexicon:
    """Ordered multimap word -> pronunciations; duplicate pairs are dropped."""

    entries: tuple[tuple[str, Pron], ...] = ()

    def __post_init__(self):
        seen = set()
        kept = []
        for word, pron in self.entries:
            pron = tuple(pron)
            if not word or any(ch.isspace() for ch in word):
                raise ZrasrError(f"invalid lexicon word {word!r}")
            if not pron:
                raise ZrasrError(f"empty pronunciation for {word!r}")
            if (word, pron) in seen:
                continue
            seen.add((word, pron))
            kept.append((word, pron))
        object.__setattr__(self, "entries", tuple(kept))

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[str, Pron]]:
        return iter(self.entries)

    @functools.cached_property
    def _pairs(self) -> frozenset:
        return frozenset(self.entries)

    def __contains__(self, item) -> bool:
        word, pron = item
        return (word, tuple(pron)) in self._pairs

    def words(self) -> list[str]:
        return list(dict.fromkeys(w for w, _ in self.entries))

    def prons(self, word: str) -> list[Pron]:
        return [p for w, p in self.entries if w == word]

    def phonemes(self) -> list[Phoneme]:
        """Distinct phonemes in first-seen order."""
        return list(dict.fromkeys(p for _, pron in self.entries for p in pron))

    def extended(self, entries: Iterable[tuple[str, Sequence[Phoneme]]]) -> Lexicon:
        return Lexicon(self.entries + tuple((w, tuple(p)) for w, p in entries))

    def dumps(self) -> str:
        return "".join(f"{w}\t{' '.join(p.canonical for p in pron)}\n" for w, pron in self.entries)

    def write(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())


def parse_pron(text: str) -> Pron:
    out: list[Phoneme] = []
    for tok in text.split():
        if tok in RESERVED:
            raise ZrasrError(f"reserved symbol {tok!r} in pronunciation")
        out.extend(tokenize_ipa(tok))
    return tuple(out)


def parse_lexicon(lines: Iterable[str], alphabet: Alphabet | None = None, source="<string>") -> Lexicon:
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            raise FormatError("expected word<TAB>pronunciation", source, lineno)
        word, _, pron_text = line.partition("\t")
        rows.append((lineno, word, pron_text))
    if alphabet is None:
        letters = {ch for _, w, _ in rows for ch in w.lower() if ch.isalpha()}
        alphabet = Alphabet.from_letters(letters) if letters else Alphabet.english()
    entries = []
    for lineno, word, pron_text in rows:
        norm = normalize_text(word, alphabet)
        if not norm or " " in norm:
            raise FormatError(f"word {word!r} does not normalize to a single token", source, lineno)
        try:
            pron = parse_pron(pron_text)
        except ZrasrError as exc:
            raise FormatError(str(exc), source, lineno) from None
        if not pron:
            raise FormatError(f"empty pronunciation for {word!r}", source, lineno)
        entries.append((norm, pron))
    return Lexicon(tuple(entries))


def load_lexicon(path: str | os.PathLike, alphabet: Alphabet | None = None) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh, alphabet, source=str(path))


def process_pron(pron: Sequence[Phoneme], split: bool = True) -> Pron:
    ps = strip_stress(pron)
    if split:
        ps = split_polyphthongs(ps)
    return tuple(ps)


def apply_phoneme_pipeline(lex: Lexicon, split: bool = True) -> Lexicon:
    """Strip stress and (unless ``split`` is false) split polyphthongs."""
    return Lexicon(tuple((w, process_pron(p, split)) for w, p in lex))


@dataclass(frozen=True)
class OovMapping:
    original: Phoneme
    mapped: Phoneme
    distance: float


def oov_mappings(
    lex: Lexicon, inv: PhonemeInventory, table: FeatureTable | None = None
) -> dict[Phoneme, OovMapping]:
    """Nearest-inventory replacement for every lexicon phoneme not in ``inv``."""
    table = table or get_table()
    out: dict[Phoneme, OovMapping] = {}
    for word, pron in lex:
        for p in pron:
            if p in inv or p in out:
                continue
            try:
                q = map_oov(p, inv, table)
            except ZrasrError as exc:
                raise ZrasrError(f"cannot map phoneme {p.canonical!r} of word {word!r}: {exc}") from None
            out[p] = OovMapping(p, q, phoneme_distance(p, q, table))
    return out


def remap_oov(lex: Lexicon, inv: PhonemeInventory, table: FeatureTable | None = None) -> Lexicon:
    mapping = oov_mappings(lex, inv, table)
    if not mapping:
        return lex
    return Lexicon(
        tuple((w, tuple(mapping[p].mapped if p in mapping else p for p in pron)) for w, pron in lex)
    )


def format_oov_report(mapping: dict[Phoneme, OovMapping]) -> str:
    lines = ["original\tmapped\tdistance\n"]
    for m in mapping.values():
        lines.append(f"{m.original.canonical}\t{m.mapped.canonical}\t{m.distance:.2f}\n")
    return "".join(lines)


@dataclass
class LexiconTrie:
    """Prefix tree over inventory label indices.

    Node 0 is the root.  ``completions[n]`` lists the word ids whose
    pronunciation ends at node ``n``; those words are emitted when the
    decoder consumes the word separator at ``n``.
    """

    inventory: PhonemeInventory
    words: tuple[str, ...]
    children: list[dict[int, int]] = field(default_factory=lambda: [{}])
    completions: list[tuple[int, ...]] = field(default_factory=lambda: [()])

    ROOT = 0

    def __len__(self):
        return len(self.children)

    def child(self, node: int, label: int) -> int:
        return self.children[node].get(label, -1)

    def walk(self, labels: Sequence[int]) -> int:
        """Follow ``labels`` from the root; a trailing separator only checks
        that the node completes a word.  Returns -1 when the path leaves the trie.
        """
        sep = self.inventory.word_sep
        node = self.ROOT
        for i, lab in enumerate(labels):
            if lab == sep and i == len(labels) - 1:
                return node if self.completions[node] else -1
            node = self.child(node, lab)
            if node < 0:
                return -1
        return node

    @property
    def is_empty(self) -> bool:
        return len(self.children) == 1


def build_trie(lex: Lexicon, inv: PhonemeInventory) -> LexiconTrie:
    words = tuple(lex.words())
    word_id = {w: i for i, w in enumerate(words)}
    trie = LexiconTrie(inv, words)
    sep = inv.word_sep
    for word, pron in lex:
        node = trie.ROOT
        for p in pron:
            if p not in inv:
                raise ZrasrError(f"phoneme {p.canonical!r} of word {word!r} is not in the inventory")
            lab = inv.index(p)
            if lab == sep or lab == inv.blank:
                raise ZrasrError(f"reserved label in pronunciation of {word!r}")
            nxt = trie.children[node].get(lab)
            if nxt is None:
                nxt = len(trie.children)
                trie.children[node][lab] = nxt
                trie.children.append({})
                trie.completions.append(())
            node = nxt
        wid = word_id[word]
        if wid not in trie.completions[node]:
            trie.completions[node] = tuple(sorted(trie.completions[node] + (wid,)))
    return trie


__all__ = [
    "WORD_SEP",
    "Lexicon",
    "LexiconTrie",
    "OovMapping",
    "apply_phoneme_pipeline",
    "build_trie",
    "format_oov_report",
    "load_lexicon",
    "oov_mappings",
    "parse_lexicon",
    "parse_pron",
    "process_pron",
    "remap_oov",
]
