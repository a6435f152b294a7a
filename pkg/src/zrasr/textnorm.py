"""Transcript normalization applied before G2P and LM training.

Only five character classes survive: letters of the target alphabet, English
letters, spaces, apostrophes and hyphens.  Everything else is deleted rather
than replaced by a space, so ``"naïve"`` with an English-only alphabet becomes
``"nave"`` instead of two words.  Lowercasing is plain Unicode ``str.lower``
(no locale tailoring: ``"İ"`` lowers to ``"i̇"`` and the dot is then dropped
unless the alphabet lists it).
"""
from __future__ import annotations

import os
import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable

from .errors import FormatError, ZrasrError

ENGLISH = frozenset("abcdefghijklmnopqrstuvwxyz")
_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class Alphabet:
    letters: frozenset[str]

    def __post_init__(self):
        letters = {unicodedata.normalize("NFC", x) for x in self.letters}
        if not letters:
            raise ZrasrError("alphabet must not be empty")
        for x in list(letters):
            if len(x) != 1:
                raise ZrasrError(f"alphabet entry {x!r} is not a single character")
            low = x.lower()
            if len(low) == 1:
                letters.add(low)
        object.__setattr__(self, "letters", frozenset(letters) | ENGLISH)

    @classmethod
    def english(cls) -> Alphabet:
        return cls(ENGLISH)

    @classmethod
    def from_letters(cls, letters: Iterable[str]) -> Alphabet:
        return cls(frozenset(letters))

    @classmethod
    def load(cls, path: str | os.PathLike) -> Alphabet:
        letters = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                x = line.strip()
                if not x or x.startswith("#"):
                    continue
                if len(unicodedata.normalize("NFC", x)) != 1:
                    raise FormatError(f"expected one letter per line, got {x!r}", path, lineno)
                letters.append(x)
        if not letters:
            return cls.english()
        return cls(frozenset(letters))

    def __contains__(self, ch: str) -> bool:
        return ch in self.letters


def _keep(ch: str, alphabet: Alphabet) -> bool:
    return ch in alphabet or ch in " '-"


def normalize_text(s: str, alphabet: Alphabet | None = None) -> str:
    alphabet = alphabet or Alphabet.english()
    s = unicodedata.normalize("NFC", unicodedata.normalize("NFC", s).lower())
    s = _WS.sub(" ", s)
    s = "".join(ch for ch in s if _keep(ch, alphabet))
    return _WS.sub(" ", s).strip()
