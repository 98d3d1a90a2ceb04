from pathlib import Path

import numpy as np
import pytest

from xlcalib import PredictionSet
from xlcalib.core import confidences_and_correct
from xlcalib.smoothing import FeatureDataset

DATA = Path(__file__).parent / "data"

# (criterion, passed, detail) lines collected by test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture
def data_dir():
    return DATA


def random_prediction_set(rng, n=None, k=None, scale=None):
    n = n or int(rng.integers(1, 65))
    k = k or int(rng.integers(2, 6))
    scale = scale or float(rng.uniform(0.1, 5))
    return PredictionSet(rng.normal(scale=scale, size=(n, k)), rng.integers(k, size=n), "xx")


def separable_fixture(n=40):
    """Two classes split by the sign of the first feature, with a margin of 0.5."""
    rng = np.random.default_rng(0)
    y = np.arange(n) % 2
    x0 = (2 * y - 1) * rng.uniform(0.5, 2.5, n)
    return FeatureDataset(np.c_[x0, rng.normal(size=n)], y)


def mean_max_confidence(model, data):
    conf, _ = confidences_and_correct(model.predictions(data))
    return float(conf.mean())


def train_accuracy(model, data):
    return float(np.mean(model.logits(data.features).argmax(axis=1) == data.labels))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
