from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zrasr.errors import FormatError, ZrasrError
from zrasr.textnorm import ENGLISH, Alphabet, normalize_text

FR = Alphabet.from_letters("éèàç")


def test_examples():
    assert normalize_text("Héllo, Wörld! 123", Alphabet.from_letters("é")) == "héllo wrld"
    assert normalize_text("don't re-do") == "don't re-do"
    assert normalize_text("") == ""


def test_whitespace_and_case():
    assert normalize_text("  A\tB\n\nC  ") == "a b c"
    assert normalize_text("ÉCOLE", FR) == "école"
    assert normalize_text("école", FR) == "école"  # decomposed input


def test_alphabet_is_lowercase_closed_and_includes_english():
    a = Alphabet.from_letters("ÉÖ")
    assert "é" in a and "ö" in a and ENGLISH <= a.letters
    with pytest.raises(ZrasrError):
        Alphabet(frozenset())
    with pytest.raises(ZrasrError):
        Alphabet.from_letters(["ab"])


def test_alphabet_file(tmp_path):
    f = tmp_path / "alpha.txt"
    f.write_text("é\n# comment\nß\n", encoding="utf-8")
    a = Alphabet.load(f)
    assert "é" in a and "ß" in a
    f.write_text("é\nxy\n", encoding="utf-8")
    with pytest.raises(FormatError, match="alpha.txt:2"):
        Alphabet.load(f)


@given(st.text(max_size=40))
@settings(max_examples=500, deadline=None)
def test_idempotent_and_closed(s):
    out = normalize_text(s, FR)
    assert normalize_text(out, FR) == out
    assert all(ch in FR.letters or ch in " '-" for ch in out)
    assert "  " not in out and out == out.strip()
