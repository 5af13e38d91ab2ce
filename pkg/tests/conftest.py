import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lifecap.decoder import START, STOP, ToyPredictor, Vocabulary  # noqa: E402

DATA = Path(__file__).parent / "data"


def random_toy_predictor(rng, n_words=3, n_clusters=1, scale=2.0):
    vocab = Vocabulary([START, STOP] + [f"w{i}" for i in range(n_words)])
    centroids = rng.standard_normal((n_clusters, 2))
    bigrams = {
        c: {tok: (scale * rng.standard_normal(len(vocab))).tolist() for tok in vocab.tokens if tok != STOP}
        for c in range(n_clusters)
    }
    return ToyPredictor(vocab, centroids, bigrams)


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
