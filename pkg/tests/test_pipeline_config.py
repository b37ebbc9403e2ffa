"""
Pipeline Configuration Tests

TOML loading, key validation, path resolution and override precedence.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from pipeline_config import (
    PipelineConfig,
    config_from_dict,
    config_for_fixture_dir,
    load_config,
    require_paths,
    with_cli_overrides,
)
from validators.schema_validators import InvalidInputError

SAMPLE = """
[search]
backend = "fixture"
fixture_path = "search.jsonl"
top_k = 5

[crawl]
max_depth = 3
scope = "unrestricted"
obey_robots = false

[store]
root = "/var/harvest/store"

[pipeline]
seed = 11
exclude_domains = ["citeseerx.ist.psu.edu"]
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "pipeline.toml"
    path.write_text(SAMPLE, encoding="utf-8")
    return str(path)


def test_defaults():
    config = load_config(None, env={})
    assert config == PipelineConfig()
    assert config.crawl.max_depth == 2
    assert config.crawl.per_host_delay_ms == 1000
    assert config.search.top_k == 10
    assert config.seed == 7


def test_load_sample(config_file, tmp_path):
    config = load_config(config_file, env={})
    assert config.search.top_k == 5
    assert config.crawl.max_depth == 3
    assert config.crawl.scope == "unrestricted"
    assert config.crawl.obey_robots is False
    assert config.pipeline.exclude_domains == ["citeseerx.ist.psu.edu"]
    assert config.seed == 11


def test_relative_paths_resolve_against_file(config_file, tmp_path):
    config = load_config(config_file, env={})
    assert config.search.fixture_path == os.path.join(str(tmp_path), "search.jsonl")
    assert config.store.root == "/var/harvest/store"


def test_unknown_key_rejected():
    with pytest.raises(InvalidInputError):
        config_from_dict({"crawl": {"max_dept": 2}})


def test_unknown_table_rejected():
    with pytest.raises(InvalidInputError):
        config_from_dict({"crawler": {}})


def test_missing_file_and_bad_syntax(tmp_path):
    with pytest.raises(InvalidInputError):
        load_config(str(tmp_path / "absent.toml"), env={})
    bad = tmp_path / "bad.toml"
    bad.write_text("[search\nbackend = ", encoding="utf-8")
    with pytest.raises(InvalidInputError):
        load_config(str(bad), env={})


def test_environment_overrides_file(config_file):
    env = {"SEARCH_BACKEND": "LIVE", "SEARCH_API_KEY": "k-123", "FETCHER": "live", "TEXT_EXTRACTOR": "pdfplumber"}
    config = load_config(config_file, env=env)
    assert config.search.backend == "live"
    assert config.search.api_key == "k-123"
    assert config.crawl.fetcher == "live"
    assert config.models.extractor == "pdfplumber"


def test_cli_overrides_environment(config_file):
    config = with_cli_overrides(load_config(config_file, env={"SEARCH_BACKEND": "live"}),
                                seed=3, backend="fixture", store_root="/tmp/other")
    assert config.search.backend == "fixture"
    assert config.crawl.fetcher == "fixture"
    assert config.seed == 3
    assert config.store.root == "/tmp/other"


def test_cli_rejects_unknown_backend():
    with pytest.raises(InvalidInputError):
        with_cli_overrides(PipelineConfig(), backend="carrier-pigeon")


def test_require_paths(tmp_path):
    require_paths(here=str(tmp_path))
    with pytest.raises(InvalidInputError):
        require_paths(titles="")
    with pytest.raises(InvalidInputError):
        require_paths(titles=str(tmp_path / "missing.txt"))


def test_config_for_fixture_dir_without_generated_file(tmp_path):
    config = config_for_fixture_dir(str(tmp_path), seed=5)
    assert config.fixtures.titles == os.path.join(str(tmp_path), "titles.txt")
    assert config.store.logical_clock is True
    assert config.seed == 5


def test_config_for_generated_fixtures(generated, tmp_path):
    config = config_for_fixture_dir(generated.out_dir, store_root=str(tmp_path / "s"))
    assert config.store.root == str(tmp_path / "s")
    assert os.path.isfile(config.fixtures.titles)
    assert os.path.isfile(config.search.fixture_path)
