"""Ablation harness on synthetic languages.

Each synthetic language has CV-syllable words whose nuclei are monophthongs
or diphthongs (a diphthong is spelled with its two vowel letters).  The
acoustic model's inventory holds the monophthongs and all but a few of the
consonants; the missing consonants are heard as their nearest inventory
phoneme, which is exactly where OOV mapping sends them.

The lexicon handed to the system is a corrupted copy of the true one: with
probability ``noise`` a word has one phoneme replaced.  Test utterances are
drawn from the same bigram word chain as the LM corpus and turned into
emission matrices whose labels are also swapped with probability ``noise``.

Three systems are compared, as in the reference ablation:

* Proposed: diphthongs split, lexicon extended by G2P.
* w/o Splitting: extended lexicon, but diphthongs kept whole.  The matching
  acoustic model has no diphthong labels and hears one component vowel at
  random; the lexicon maps the diphthong to its nearest (first) component.
* w/o Extending: neither splitting nor extension.

Absolute WERs say nothing about real languages; only the ordering of the
columns is meaningful.
"""
from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .decoder import DecodeParams, decode_batch
from .emissions import synthesize_emissions
from .errors import ZrasrError
from .eval import AlignmentReport, corpus_wer
from .g2p import extend_lexicon, train_g2p
from .lexicon import Lexicon, apply_phoneme_pipeline, build_trie, remap_oov
from .lm import NGramModel, train_lm
from .phonology import WORD_SEP, Phoneme, PhonemeInventory, get_table, map_oov, split_polyphthongs

# (IPA, spelling letter)
VOWELS = [
    ("a", "a"), ("e", "e"), ("i", "i"), ("o", "o"), ("u", "u"),
    ("y", "y"), ("ɛ", "ä"), ("ø", "ö"), ("ɯ", "ü"), ("ɔ", "å"),
]
CONSONANTS = [
    ("p", "p"), ("t", "t"), ("k", "k"), ("b", "b"), ("d", "d"), ("ɡ", "g"),
    ("m", "m"), ("n", "n"), ("s", "s"), ("z", "z"), ("f", "f"), ("v", "v"),
    ("l", "l"), ("r", "r"), ("ʃ", "c"), ("ʒ", "j"), ("x", "x"), ("h", "h"),
    ("w", "w"), ("ŋ", "q"), ("ɲ", "ñ"),
]

COLUMNS = ("Proposed", "w/o Splitting", "w/o Extending")


@dataclass(frozen=True)
class AblationConfig:
    vowel_splitting: bool = True
    lexicon_extension: bool = True
    inventory_size: int = 20
    diphthong_fraction: float = 0.2
    lexicon_size: int = 200
    corpus_size: int = 500
    test_size: int = 20
    noise: float = 0.0
    seed: int = 0
    languages: int = 1
    missing_consonants: int = 2
    frames_per_phone: int = 1
    lm_order: int = 5
    g2p_order: int = 5
    em_iters: int = 5
    k: int = 4
    min_chars: int = 5
    top_frac: float = 0.10
    decode: DecodeParams = field(default_factory=DecodeParams)

    @property
    def n_diphthongs(self) -> int:
        return int(round(self.diphthong_fraction * self.inventory_size))

    @property
    def n_vowels(self) -> int:
        return max(2, (self.inventory_size - self.n_diphthongs) // 3)

    @property
    def n_consonants(self) -> int:
        return self.inventory_size - self.n_diphthongs - self.n_vowels

    def validate(self) -> None:
        if not 0.0 <= self.diphthong_fraction < 1.0:
            raise ZrasrError("diphthong_fraction must be in [0, 1)")
        if not 0.0 <= self.noise < 1.0:
            raise ZrasrError("noise must be in [0, 1)")
        nv, nc, nd = self.n_vowels, self.n_consonants, self.n_diphthongs
        if nv > len(VOWELS) or nc > len(CONSONANTS):
            raise ZrasrError(f"inventory_size {self.inventory_size} exceeds the built-in phoneme pool")
        if nc < 2:
            raise ZrasrError("inventory leaves fewer than 2 consonants")
        if nd > nv * (nv - 1):
            raise ZrasrError(f"{nd} diphthongs cannot be formed from {nv} vowels")
        if not 0 <= self.missing_consonants < nc:
            raise ZrasrError("missing_consonants must leave at least one consonant in the model")
        for name in ("lexicon_size", "corpus_size", "test_size", "languages", "frames_per_phone"):
            if getattr(self, name) < 1:
                raise ZrasrError(f"{name} must be >= 1")


@dataclass
class SyntheticLanguage:
    seed: int
    consonants: list[Phoneme]
    nuclei: list[Phoneme]
    spelling: dict[Phoneme, str]
    model_inventory: PhonemeInventory
    heard: dict[Phoneme, Phoneme]  # OOV consonant -> what the model hears
    lexicon: Lexicon  # true pronunciations
    given: Lexicon  # corrupted copy handed to the system
    train_corpus: list[list[str]]
    test_corpus: list[list[str]]


def _word_view(pron: Sequence[Phoneme], heard: dict[Phoneme, Phoneme]) -> tuple[Phoneme, ...]:
    return tuple(heard.get(p, p) for p in split_polyphthongs(pron))


def build_language(cfg: AblationConfig, seed: int) -> SyntheticLanguage:
    cfg.validate()
    rng = random.Random(seed)
    vowels = rng.sample(VOWELS, cfg.n_vowels)
    cons = rng.sample(CONSONANTS, cfg.n_consonants)
    pairs = [(a, b) for a in vowels for b in vowels if a != b]
    diph = rng.sample(pairs, cfg.n_diphthongs)

    spelling = {Phoneme.parse(ipa): letter for ipa, letter in vowels + cons}
    for (a, la), (b, lb) in diph:
        spelling[Phoneme.parse(a + b)] = la + lb
    consonants = [Phoneme.parse(ipa) for ipa, _ in cons]
    nuclei = [Phoneme.parse(ipa) for ipa, _ in vowels] + [Phoneme.parse(a + b) for (a, _), (b, _) in diph]

    missing = set(rng.sample(consonants, cfg.missing_consonants))
    model_phones = sorted([Phoneme.parse(ipa) for ipa, _ in vowels] + [c for c in consonants if c not in missing])
    inv = PhonemeInventory.from_phonemes(model_phones)
    table = get_table()
    heard = {c: map_oov(c, inv, table) for c in sorted(missing)}

    entries = []
    spellings, views = set(), set()
    attempts = 0
    while len(entries) < cfg.lexicon_size:
        attempts += 1
        if attempts > 1000 * cfg.lexicon_size:
            raise ZrasrError("could not draw enough distinct words; enlarge the inventory")
        pron = []
        for _ in range(rng.randint(2, 4)):
            pron += [rng.choice(consonants), rng.choice(nuclei)]
        word = "".join(spelling[p] for p in pron)
        view = _word_view(pron, heard)
        if word in spellings or view in views:
            continue
        spellings.add(word)
        views.add(view)
        entries.append((word, tuple(pron)))
    lexicon = Lexicon(tuple(entries))

    corrupted = []
    for word, pron in entries:
        pron = list(pron)
        if rng.random() < cfg.noise:
            pos = rng.randrange(len(pron))
            pool = consonants if pron[pos] in consonants else nuclei
            pron[pos] = rng.choice([p for p in pool if p != pron[pos]])
        corrupted.append((word, tuple(pron)))
    given = Lexicon(tuple(corrupted))

    words = [w for w, _ in entries]
    successors = {w: rng.sample(words, 5) for w in words}
    starts = rng.sample(words, 20)

    def sentence():
        out = [rng.choice(starts)]
        for _ in range(rng.randint(2, 6)):
            out.append(rng.choice(successors[out[-1]]))
        return out

    train = [sentence() for _ in range(cfg.corpus_size)]
    test = [sentence() for _ in range(cfg.test_size)]
    return SyntheticLanguage(seed, consonants, nuclei, spelling, inv, heard, lexicon, given, train, test)


def _utterance_labels(lang: SyntheticLanguage, words: Sequence[str], split: bool, rng) -> list[Phoneme | str]:
    """What the acoustic model emits for ``words`` before channel noise."""
    true = dict(lang.lexicon.entries)
    out: list[Phoneme | str] = []
    for w in words:
        for p in true[w]:
            p = lang.heard.get(p, p)
            if not p.is_polyphthong:
                out.append(p)
            elif split:
                out.extend(split_polyphthongs([p]))
            else:
                parts = split_polyphthongs([p])
                out.append(parts[int(rng.integers(len(parts)))])
        out.append(WORD_SEP)
    return out


def _corrupt_labels(labels, inv: PhonemeInventory, noise: float, rng):
    phones = list(inv.phonemes)
    out = []
    for lab in labels:
        u = rng.random()
        if lab != WORD_SEP and u < noise:
            others = [p for p in phones if p != lab]
            lab = others[int(rng.integers(len(others)))]
        out.append(lab)
    return out


def system_lexicon(lang: SyntheticLanguage, cfg: AblationConfig) -> Lexicon:
    lex = apply_phoneme_pipeline(lang.given, split=cfg.vowel_splitting)
    if cfg.lexicon_extension:
        model = train_g2p(lex, order=cfg.g2p_order, em_iters=cfg.em_iters)
        lex = extend_lexicon(
            lex, model, k=cfg.k, min_chars=cfg.min_chars, top_frac=cfg.top_frac, split=cfg.vowel_splitting
        )
    return remap_oov(lex, lang.model_inventory)


def run_condition(
    cfg: AblationConfig,
    lang: SyntheticLanguage | None = None,
    lm: NGramModel | None = None,
    jobs: int = 1,
) -> AlignmentReport:
    """Decode one language's test set under the config's toggles."""
    lang = lang or build_language(cfg, cfg.seed)
    lm = lm or train_lm(lang.train_corpus, order=cfg.lm_order)
    inv = lang.model_inventory
    trie = build_trie(system_lexicon(lang, cfg), inv)
    items = []
    refs = {}
    for u, words in enumerate(lang.test_corpus):
        uid = f"utt{u:04d}"
        refs[uid] = list(words)
        pick = np.random.default_rng([lang.seed, u, 1])
        swap = np.random.default_rng([lang.seed, u, 2])
        labels = _utterance_labels(lang, words, cfg.vowel_splitting, pick)
        labels = _corrupt_labels(labels, inv, cfg.noise, swap)
        em = synthesize_emissions(labels, inv, cfg.frames_per_phone, cfg.noise, swap=False)
        items.append((uid, em))
    results = decode_batch(items, trie, lm, cfg.decode, jobs=jobs)
    hyps = {uid: list(h[0].words) if h else [] for uid, h in results}
    return corpus_wer(refs, hyps)


@dataclass(frozen=True)
class AblationReport:
    rows: tuple[tuple[str, tuple[float, ...]], ...]
    columns: tuple[str, ...] = COLUMNS

    @property
    def average(self) -> tuple[float, ...]:
        n = len(self.rows)
        return tuple(sum(r[1][c] for r in self.rows) / n for c in range(len(self.columns)))

    def _table(self) -> list[list[str]]:
        body = [[name] + [f"{v:.2f}" for v in vals] for name, vals in self.rows]
        return [["Language", *self.columns], *body, ["Avg.", *(f"{v:.2f}" for v in self.average)]]

    def to_tsv(self) -> str:
        return "".join("\t".join(r) + "\n" for r in self._table())

    def to_text(self) -> str:
        table = self._table()
        widths = [max(len(r[c]) for r in table) for c in range(len(table[0]))]
        rule = "-+-".join("-" * w for w in widths)

        def fmt(r):
            return " | ".join(r[0].ljust(widths[0]) if i == 0 else x.rjust(widths[i]) for i, x in enumerate(r))

        lines = [fmt(table[0]), rule, *(fmt(r) for r in table[1:-1]), rule, fmt(table[-1])]
        return "\n".join(lines) + "\n"


def ablation_settings(cfg: AblationConfig) -> list[AblationConfig]:
    """Toggle settings for the three report columns, in column order."""
    return [
        dataclasses.replace(cfg, vowel_splitting=True, lexicon_extension=True),
        dataclasses.replace(cfg, vowel_splitting=False, lexicon_extension=True),
        dataclasses.replace(cfg, vowel_splitting=False, lexicon_extension=False),
    ]


def run_ablation(cfg: AblationConfig, jobs: int = 1) -> AblationReport:
    cfg.validate()
    rows = []
    for lang_seed in range(cfg.seed, cfg.seed + cfg.languages):
        lang = build_language(cfg, lang_seed)
        lm = train_lm(lang.train_corpus, order=cfg.lm_order)
        wers = tuple(100.0 * run_condition(c, lang, lm, jobs).wer for c in ablation_settings(cfg))
        rows.append((f"lang{lang_seed}", wers))
    return AblationReport(tuple(rows))
