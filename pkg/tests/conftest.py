"""
Shared fixtures.

The generated fixture set and the two trained models are session-scoped:
generation and training are deterministic, so every test sees the same data.
"""

import os
import sys

import pytest

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fixture_generator import FixtureSpec, generate_fixtures
from pipeline_cli import train_classifier_cmd, train_ranker_cmd
from pipeline_config import config_for_fixture_dir

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


@pytest.fixture(scope="session")
def fixtures_dir() -> str:
    return FIXTURES_DIR


@pytest.fixture(scope="session")
def generated(tmp_path_factory):
    """The default fixture set (seed 7), written once per session."""
    out_dir = tmp_path_factory.mktemp("generated")
    return generate_fixtures(FixtureSpec(seed=7), str(out_dir))


@pytest.fixture(scope="session")
def ranker_training(generated):
    config = config_for_fixture_dir(generated.out_dir)
    return train_ranker_cmd(config.fixtures.labeled_search, config.models.ranker_path,
                            folds=5, seed=7, compare=True)


@pytest.fixture(scope="session")
def classifier_training(generated):
    config = config_for_fixture_dir(generated.out_dir)
    return train_classifier_cmd(config.fixtures.labeled_documents, config.models.classifier_path,
                                folds=3, seed=7)


@pytest.fixture
def pipeline_config(generated, ranker_training, classifier_training, tmp_path):
    """Config over the generated fixtures with trained models and a fresh store."""
    return config_for_fixture_dir(generated.out_dir, store_root=str(tmp_path / "store"))
