from __future__ import annotations

import pytest

from zrasr.ablation import (
    COLUMNS,
    AblationConfig,
    AblationReport,
    ablation_settings,
    build_language,
    run_ablation,
    run_condition,
)
from zrasr.errors import ZrasrError
from zrasr.phonology import split_polyphthongs

SMALL = AblationConfig(lexicon_size=60, corpus_size=100, test_size=8)


def test_language_shape(language):
    assert len(language.consonants) + len(language.nuclei) == 20
    assert sum(p.is_polyphthong for p in language.nuclei) == 4
    assert len(language.lexicon) == 200 and len(language.train_corpus) == 500
    assert not any(p.is_polyphthong for p in language.model_inventory.phonemes)
    # the model hears every true phoneme, possibly as its nearest neighbour
    for _, pron in language.lexicon:
        for p in split_polyphthongs(pron):
            assert language.heard.get(p, p) in language.model_inventory


def test_clean_channel_is_error_free():
    for seed in range(3):
        cfg = AblationConfig(lexicon_size=80, corpus_size=150, test_size=10, seed=seed)
        assert run_condition(cfg).errors == 0


def test_noise_zero_leaves_lexicon_intact():
    lang = build_language(SMALL, 0)
    assert lang.given == lang.lexicon


def test_report_layout_and_determinism():
    cfg = AblationConfig(lexicon_size=60, corpus_size=100, test_size=6, noise=0.15, languages=2)
    a = run_ablation(cfg)
    b = run_ablation(cfg)
    assert a.to_tsv() == b.to_tsv() and a.to_text() == b.to_text()
    lines = a.to_tsv().splitlines()
    assert lines[0].split("\t") == ["Language", *COLUMNS]
    assert [ln.split("\t")[0] for ln in lines[1:]] == ["lang0", "lang1", "Avg."]
    avg = [float(x) for x in lines[-1].split("\t")[1:]]
    assert avg == pytest.approx([sum(r[1][c] for r in a.rows) / 2 for c in range(3)], abs=0.01)
    text = a.to_text().splitlines()
    assert text[0].split("|")[0].strip() == "Language" and text[-1].startswith("Avg.")


def test_settings_order():
    s = ablation_settings(AblationConfig())
    assert [(c.vowel_splitting, c.lexicon_extension) for c in s] == [(True, True), (False, True), (False, False)]


def test_average_row():
    rep = AblationReport((("x", (10.0, 20.0, 30.0)), ("y", (20.0, 40.0, 60.0))))
    assert rep.average == (15.0, 30.0, 45.0)
    assert rep.to_tsv().splitlines()[-1] == "Avg.\t15.00\t30.00\t45.00"


@pytest.mark.parametrize(
    "kwargs, match",
    [
        ({"diphthong_fraction": 0.3, "inventory_size": 10}, "diphthongs cannot be formed"),
        ({"diphthong_fraction": 1.2}, "diphthong_fraction"),
        ({"noise": 1.0}, "noise"),
        ({"inventory_size": 60}, "phoneme pool"),
        ({"missing_consonants": 50}, "missing_consonants"),
        ({"lexicon_size": 0}, "lexicon_size"),
    ],
)
def test_config_errors(kwargs, match):
    with pytest.raises(ZrasrError, match=match):
        AblationConfig(**kwargs).validate()
