import sys

import pytest

from scrubbot import dataset as ds
from scrubbot import ik_net as nn
from scrubbot import plant as pl


@pytest.fixture(scope="session")
def plant():
    return pl.PlantConfig()


@pytest.fixture(scope="session")
def corpus(plant):
    return ds.generate(ds.DatasetSpec(seed=42), plant)


@pytest.fixture(scope="session")
def baseline_corpus(plant):
    return ds.generate(ds.DatasetSpec(weight_levels=(6.2,), samples_per_level=10_000, seed=43), plant)


def _fit(data):
    tr, va = ds.split(data, 0.8, 42)
    return nn.train(tr.inputs, tr.q, va.inputs, va.q, nn.TrainConfig(seed=42))


@pytest.fixture(scope="session")
def trained(corpus):
    """(params, history) for the load-aware model on the default corpus."""
    return _fit(corpus)


@pytest.fixture(scope="session")
def baseline_model(baseline_corpus):
    return _fit(baseline_corpus)[0]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
