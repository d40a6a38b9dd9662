import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from amppath import SEModel, parse_prior

GOLDEN_PRIOR_TEXT = "0.9:0,0.05:1,0.05:-1"


def pytest_addoption(parser):
    parser.addoption(
        "--run-long",
        action="store_true",
        default=False,
        help="also run the full paper-scale reproductions",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-long"):
        return
    skip = pytest.mark.skip(reason="needs --run-long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def golden_prior():
    return parse_prior(GOLDEN_PRIOR_TEXT)


@pytest.fixture(scope="session")
def golden_model(golden_prior):
    return SEModel(0.5, 0.2, golden_prior)
