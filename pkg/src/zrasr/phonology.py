"""IPA segments, polyphthong splitting, articulatory features and OOV mapping.

A :class:`Phoneme` is a base (one or more IPA letters, possibly joined by tie
bars) followed by its diacritics.  Runs of adjacent vowel letters are read as a
single polyphthong token and :func:`split_polyphthongs` breaks them back into
monophthongs.  Distances between phonemes come from a feature table shipped as
``data/features.tsv``; the path can be overridden with ``ZRASR_FEATURE_TABLE``.
"""
from __future__ import annotations

import functools
import logging
import os
import unicodedata
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import FormatError, UnknownPhonemeError, ZrasrError

log = logging.getLogger(__name__)

BLANK = "<b>"
WORD_SEP = "|"
RESERVED = (BLANK, WORD_SEP)

STRESS_MARKS = frozenset("ˈˌ")
TIE_BARS = frozenset("͜͡")
LENGTH = "ː"
NASALIZED = "̃"
VOICELESS = frozenset("̥̊")
VOICED = "̬"

VOWELS = frozenset("iyɨʉɯuɪʏᵻʊᵿeøɘɵɤoəɚɛœɜɝɞʌɔæɐaɶɑɒ")

_EXTRA_BASES = frozenset("æçðøħŋœβθχᵻᵿⱱ")
_MODIFIER_DIACRITICS = frozenset("ːˑʰʱʲʷˠˤʼ˞ⁿˡˀ")
# syllable boundaries and linking marks: dropped, but they end a vowel run
_BREAKS = frozenset(".‿")


def is_ipa_base(ch: str) -> bool:
    if "a" <= ch <= "z":
        return True
    return 0x0250 <= ord(ch) <= 0x02AF or ch in _EXTRA_BASES


def _is_known_diacritic(ch: str) -> bool:
    if ch in _MODIFIER_DIACRITICS:
        return True
    return 0x0300 <= ord(ch) <= 0x036F and ch not in TIE_BARS


def _is_other_mark(ch: str) -> bool:
    if unicodedata.category(ch) in ("Mn", "Mc", "Me"):
        return True
    return 0x02B0 <= ord(ch) <= 0x02FF or 0x1D2C <= ord(ch) <= 0x1DBF


@functools.lru_cache(maxsize=None)
def _warn_unknown_mark(ch: str) -> None:
    log.warning("ignoring unknown diacritic U+%04X %r", ord(ch), ch)


@dataclass(frozen=True, eq=False)
class Phoneme:
    base: str
    diacritics: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.base:
            raise ZrasrError("phoneme base must be non-empty")
        for ch in self.base:
            if ch.isspace() or ch in STRESS_MARKS or ch in "|<>":
                raise ZrasrError(f"invalid character {ch!r} in phoneme base {self.base!r}")
        if not isinstance(self.diacritics, tuple):
            object.__setattr__(self, "diacritics", tuple(self.diacritics))

    @classmethod
    def parse(cls, text: str) -> Phoneme:
        """Parse exactly one segment, e.g. ``"t͡ʃ"`` or ``"aʊ"``."""
        toks = tokenize_ipa(text)
        if len(toks) != 1:
            raise ZrasrError(f"{text!r} is {len(toks)} segments, expected one")
        return toks[0]

    @property
    def canonical(self) -> str:
        return unicodedata.normalize("NFC", self.base + "".join(self.diacritics))

    @property
    def vowel_count(self) -> int:
        return sum(ch in VOWELS for ch in self.base)

    @property
    def is_polyphthong(self) -> bool:
        return self.vowel_count >= 2

    def __eq__(self, other):
        if isinstance(other, Phoneme):
            return self.canonical == other.canonical
        return NotImplemented

    def __hash__(self):
        return hash(self.canonical)

    def __lt__(self, other: Phoneme) -> bool:
        return self.canonical < other.canonical

    def __str__(self):
        return self.canonical

    def __repr__(self):
        return f"Phoneme({self.canonical!r})"


def tokenize_ipa(s: str) -> list[Phoneme]:
    """Split a continuous IPA string into maximal segments.

    Stress marks are dropped.  Whitespace, stress and syllable breaks end the
    current segment, so ``"a ʊ"`` stays two tokens while ``"aʊ"`` is one.
    """
    s = unicodedata.normalize("NFC", s)
    out: list[Phoneme] = []
    base: list[str] = []
    marks: list[str] = []
    tie_pending = False
    offset = 0

    def flush():
        nonlocal base, marks
        if base:
            out.append(Phoneme("".join(base), tuple(marks)))
        base, marks = [], []

    for ch in s:
        here = offset
        offset += len(ch.encode("utf-8"))
        chars = [ch]
        if not is_ipa_base(ch) and unicodedata.decomposition(ch) and not _is_other_mark(ch):
            parts = unicodedata.normalize("NFD", ch)
            if is_ipa_base(parts[0]):
                chars = list(parts)
        for c in chars:
            if c in STRESS_MARKS or c in _BREAKS or c.isspace():
                if tie_pending:
                    raise ZrasrError(f"dangling tie bar before byte offset {here} in {s!r}")
                flush()
            elif c in TIE_BARS:
                if not base:
                    raise ZrasrError(f"tie bar U+{ord(c):04X} with no preceding letter at byte offset {here}")
                base.append(c)
                tie_pending = True
            elif is_ipa_base(c):
                if tie_pending:
                    base.append(c)
                    tie_pending = False
                elif base and not marks and c in VOWELS and base[-1] in VOWELS and not any(
                    b in TIE_BARS for b in base
                ):
                    base.append(c)
                else:
                    flush()
                    base.append(c)
            elif _is_known_diacritic(c):
                if not base:
                    raise ZrasrError(
                        f"diacritic U+{ord(c):04X} with no preceding letter at byte offset {here}"
                    )
                marks.append(c)
            elif _is_other_mark(c):
                _warn_unknown_mark(c)
            else:
                raise ZrasrError(f"character U+{ord(c):04X} {c!r} at byte offset {here} is not IPA")
    if tie_pending:
        raise ZrasrError(f"dangling tie bar at end of {s!r}")
    flush()
    return out


def render(ps: Iterable[Phoneme]) -> str:
    return " ".join(p.canonical for p in ps)


def strip_stress(ps: Iterable[Phoneme]) -> list[Phoneme]:
    out = []
    for p in ps:
        if any(d in STRESS_MARKS for d in p.diacritics):
            p = Phoneme(p.base, tuple(d for d in p.diacritics if d not in STRESS_MARKS))
        out.append(p)
    return out


def split_polyphthongs(ps: Iterable[Phoneme]) -> list[Phoneme]:
    """Replace every diphthong/triphthong by its component vowels.

    Diacritics written after the polyphthong stay with its last vowel.
    """
    out: list[Phoneme] = []
    for p in ps:
        if not p.is_polyphthong:
            out.append(p)
            continue
        letters = [c for c in p.base if c not in TIE_BARS]
        for c in letters[:-1]:
            out.append(Phoneme(c))
        out.append(Phoneme(letters[-1], p.diacritics))
    return out


# --- features -----------------------------------------------------------------

TERNARY = ("syllabic", "consonantal", "sonorant", "voiced", "nasal", "long")
CATEGORICAL = ("place", "manner", "height", "backness", "rounding")


@dataclass(frozen=True)
class FeatureVector:
    """Ternary features hold '+', '-' or None; categorical ones a name or None."""

    syllabic: str | None = None
    consonantal: str | None = None
    sonorant: str | None = None
    voiced: str | None = None
    nasal: str | None = None
    long: str | None = None
    place: str | None = None
    manner: str | None = None
    height: str | None = None
    backness: str | None = None
    rounding: str | None = None

    def values(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))


FEATURE_NAMES = tuple(f.name for f in fields(FeatureVector))


def _feature_value(name, raw, path, lineno):
    raw = raw.strip()
    if raw in ("0", ""):
        return None
    if name in TERNARY and raw not in ("+", "-"):
        raise FormatError(f"feature {name!r} must be +, - or 0, got {raw!r}", path, lineno)
    return raw


@dataclass(frozen=True)
class FeatureTable:
    vectors: Mapping[str, FeatureVector]
    source: str = "<memory>"

    @classmethod
    def load(cls, path: str | os.PathLike) -> FeatureTable:
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise FormatError("empty feature table", path)
        header = lines[0].split("\t")
        missing = [n for n in FEATURE_NAMES if n not in header]
        if header[0] != "symbol" or missing:
            raise FormatError(f"bad header, missing columns {missing}", path, 1)
        cols = {name: header.index(name) for name in FEATURE_NAMES}
        vectors: dict[str, FeatureVector] = {}
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip() or line.startswith("#"):
                continue
            row = line.split("\t")
            if len(row) != len(header):
                raise FormatError(f"expected {len(header)} columns, got {len(row)}", path, lineno)
            sym = unicodedata.normalize("NFC", row[0].strip())
            if sym in vectors:
                raise FormatError(f"duplicate symbol {sym!r}", path, lineno)
            vectors[sym] = FeatureVector(
                **{n: _feature_value(n, row[i], path, lineno) for n, i in cols.items()}
            )
        return cls(vectors, str(path))

    def __contains__(self, symbol) -> bool:
        return str(symbol) in self.vectors

    def __len__(self):
        return len(self.vectors)

    def symbols(self) -> list[str]:
        return list(self.vectors)

    def vector(self, p: Phoneme | str) -> FeatureVector:
        if isinstance(p, str):
            if p in RESERVED:
                raise UnknownPhonemeError(f"unknown phoneme {p!r}: reserved symbols have no features")
            p = Phoneme.parse(p)
        base = unicodedata.normalize("NFC", p.base)
        fv = self.vectors.get(base)
        if fv is None and p.is_polyphthong:
            # an untabulated glide takes the features of its first component
            return self.vector(split_polyphthongs([p])[0])
        if fv is None:
            raise UnknownPhonemeError(f"unknown phoneme {p.canonical!r}")
        changes = {}
        for d in p.diacritics:
            if d == LENGTH:
                changes["long"] = "+"
            elif d == NASALIZED:
                changes["nasal"] = "+"
            elif d in VOICELESS:
                changes["voiced"] = "-"
            elif d == VOICED:
                changes["voiced"] = "+"
        if changes:
            fv = FeatureVector(**{**fv.__dict__, **changes})
        return fv


def default_table_path() -> Path:
    env = os.environ.get("ZRASR_FEATURE_TABLE")
    if env:
        return Path(env)
    return Path(str(resources.files("zrasr") / "data" / "features.tsv"))


@functools.lru_cache(maxsize=8)
def _load_cached(path: str) -> FeatureTable:
    return FeatureTable.load(path)


def get_table(path: str | os.PathLike | None = None) -> FeatureTable:
    return _load_cached(str(path if path is not None else default_table_path()))


def feature_vector(p: Phoneme | str, table: FeatureTable | None = None) -> FeatureVector:
    return (table or get_table()).vector(p)


def _feature_distance(u: FeatureVector, v: FeatureVector, weights: Mapping[str, float] | None) -> float:
    total = 0.0
    for name, a, b in zip(FEATURE_NAMES, u.values(), v.values()):
        if a == b:
            continue
        cost = 0.5 if a is None or b is None else 1.0
        total += cost * (weights.get(name, 1.0) if weights else 1.0)
    return total


def phoneme_distance(
    a: Phoneme | str,
    b: Phoneme | str,
    table: FeatureTable | None = None,
    weights: Mapping[str, float] | None = None,
) -> float:
    """Weighted feature mismatch: 1 per differing value, 0.5 against unspecified."""
    table = table or get_table()
    return _feature_distance(table.vector(a), table.vector(b), weights)


@dataclass(frozen=True)
class PhonemeInventory:
    """Closed label set; label order defines emission-matrix columns."""

    labels: tuple[str, ...]
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(unicodedata.normalize("NFC", x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            dupes = sorted({x for x in labels if labels.count(x) > 1})
            raise ZrasrError(f"duplicate inventory labels: {dupes}")
        for r in RESERVED:
            if r not in labels:
                raise ZrasrError(f"inventory lacks reserved label {r!r}")
        for lab in labels:
            if lab not in RESERVED:
                Phoneme.parse(lab)
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(labels)})

    @classmethod
    def from_phonemes(cls, phonemes: Iterable[Phoneme | str]) -> PhonemeInventory:
        seen: dict[str, None] = {}
        for p in phonemes:
            seen.setdefault(str(p), None)
        return cls((BLANK, WORD_SEP, *seen))

    @property
    def blank(self) -> int:
        return self._index[BLANK]

    @property
    def word_sep(self) -> int:
        return self._index[WORD_SEP]

    @functools.cached_property
    def phonemes(self) -> tuple[Phoneme, ...]:
        return tuple(Phoneme.parse(x) for x in self.labels if x not in RESERVED)

    def index(self, label: Phoneme | str) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise ZrasrError(f"label {str(label)!r} not in inventory") from None

    def __contains__(self, label) -> bool:
        return str(label) in self._index

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)


def map_oov(
    p: Phoneme,
    inv: PhonemeInventory | Sequence[Phoneme],
    table: FeatureTable | None = None,
    weights: Mapping[str, float] | None = None,
) -> Phoneme:
    """Return ``p`` if the inventory has it, else the nearest inventory phoneme.

    Ties go to the candidate whose canonical form sorts first by codepoint.
    Inventory labels without a feature-table entry are never chosen.
    """
    if isinstance(inv, PhonemeInventory):
        cands = inv.phonemes
    else:
        cands = tuple(c if isinstance(c, Phoneme) else Phoneme.parse(c) for c in inv)
    if p in cands:
        return p
    if not cands:
        raise ZrasrError("cannot map into an empty inventory")
    table = table or get_table()
    target = table.vector(p)
    best = None
    for c in cands:
        try:
            d = _feature_distance(target, table.vector(c), weights)
        except UnknownPhonemeError:
            continue
        key = (d, c.canonical)
        if best is None or key < best[0]:
            best = (key, c)
    if best is None:
        raise UnknownPhonemeError(f"no inventory phoneme has features to compare with {p.canonical!r}")
    return best[1]
