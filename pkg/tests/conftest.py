"""
Shared fixtures.
"""
from pathlib import Path

import pytest

from casecontext.api.gateway import Gateway
from casecontext.api.mock import MockBackend
from casecontext.corpus.store import CorpusLayout, ingest_corpus
from casecontext.corpus.synthetic import write_synthetic_corpus

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def mock_gateway():
    return Gateway(MockBackend(seed=0, dim=64))


@pytest.fixture(scope="session")
def synthetic_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synthetic")
    write_synthetic_corpus(out)
    return out


@pytest.fixture(scope="session")
def synthetic_corpus(synthetic_dir):
    return ingest_corpus(synthetic_dir, CorpusLayout(qrels="qrels.tsv"))
