from __future__ import annotations

import pytest

from tmdl import corpus_path, parse_model


@pytest.fixture(scope="session")
def corpus_text() -> str:
    return corpus_path().read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def corpus(corpus_text):
    return parse_model(corpus_text)
