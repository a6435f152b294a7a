from __future__ import annotations

import pytest

from zrasr.ablation import AblationConfig, build_language


@pytest.fixture(scope="session")
def language():
    """Seed-0 synthetic language: 20 phonemes incl. 4 diphthongs, 200 words, 500 sentences."""
    return build_language(AblationConfig(), 0)


@pytest.fixture(scope="session")
def bigram_corpus(language):
    return language.train_corpus


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
