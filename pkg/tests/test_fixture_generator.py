"""
Fixture Generator Tests

Determinism, sizes and internal consistency of the generated data sets.
"""

import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from adapters.fixture_providers import FixtureFetcher, FixtureSearchBackend
from doc_model import load_labeled_documents
from docstore import load_targets
from fixture_generator import EMPTY_RESULT_NAME, FixtureSpec, generate_fixtures
from search_gateway import build_author_query, build_title_query, load_labeled_fixture
from validators.schema_validators import InvalidInputError

SMALL = dict(n_authors=20, n_documents=40, n_pipeline_authors=3, n_title_queries=5)


def _read_all(files):
    contents = {}
    for name, path in files.items():
        with open(path, "rb") as f:
            contents[name] = f.read()
    return contents


def test_generation_is_deterministic(tmp_path):
    a = generate_fixtures(FixtureSpec(seed=3, **SMALL), str(tmp_path / "a"))
    b = generate_fixtures(FixtureSpec(seed=3, **SMALL), str(tmp_path / "b"))
    assert _read_all(a.files) == _read_all(b.files)
    assert a.ground_truth == b.ground_truth


def test_different_seeds_differ(tmp_path):
    a = generate_fixtures(FixtureSpec(seed=3, **SMALL), str(tmp_path / "a"))
    b = generate_fixtures(FixtureSpec(seed=4, **SMALL), str(tmp_path / "b"))
    assert _read_all(a.files)["homepage_search.jsonl"] != _read_all(b.files)["homepage_search.jsonl"]


def test_default_sizes_and_balance(generated):
    truth = generated.ground_truth
    assert truth["homepage"]["n_queries"] == 200
    assert truth["documents"] == {"n": 420, "papers": 210, "non_papers": 210}
    assert 0 < len(truth["homepage"]["hard_queries"]) < 200


def test_every_labeled_page_has_one_homepage(generated):
    pages = load_labeled_fixture(generated.files["homepage_search.jsonl"])
    assert len(pages) == 200
    for page in pages:
        assert len(page.homepage_indices()) == 1, f"{page.query_id} must have exactly one homepage"
        assert len(page.page.results) == 10


def test_labeled_documents_load(generated):
    labeled = load_labeled_documents(generated.files["documents.jsonl"])
    assert len(labeled) == 420
    assert {label for label, _ in labeled} == {"paper", "non_paper"}


def test_pipeline_inputs_are_consistent(generated):
    backend = FixtureSearchBackend(generated.files["search_fixture.jsonl"])
    with open(generated.files["titles.txt"], encoding="utf-8") as f:
        titles = f.read().splitlines()
    with open(generated.files["names.txt"], encoding="utf-8") as f:
        names = f.read().splitlines()

    assert len(titles) == 10
    assert names[-1] == EMPTY_RESULT_NAME
    for title in titles:
        assert build_title_query(title).rendered in backend
    for name in names:
        assert build_author_query(name).rendered in backend

    targets = load_targets(generated.files["targets.jsonl"])
    assert len({t.id for t in targets}) == len(targets)
    FixtureFetcher.from_site_map(generated.files["site_map.json"])


def test_ground_truth_document(generated):
    truth = generated.ground_truth
    assert 0 < truth["intended_fraction"] <= 1
    assert truth["intended_recovered"] <= len(truth["intended_set"])
    assert len(truth["mispredicted_authors"]) == 1
    assert truth["exclude_domains"] == ["citeseerx.ist.psu.edu"]
    combined = truth["manifest"]["combined"]
    paths = truth["manifest"]["paths"]
    assert combined["union_unique_titles"] == (paths["path1_search"]["unique_titles"]
                                               + paths["path2_crawl"]["unique_titles"] - combined["overlap"])
    with open(generated.files["ground_truth.json"], encoding="utf-8") as f:
        assert json.load(f) == truth


def test_no_authors(tmp_path):
    result = generate_fixtures(FixtureSpec(n_authors=0, n_documents=10, n_pipeline_authors=2,
                                           n_title_queries=2), str(tmp_path))
    assert result.ground_truth["homepage"]["n_queries"] == 0
    with open(result.files["homepage_search.jsonl"], encoding="utf-8") as f:
        assert f.read() == ""


@pytest.mark.parametrize("kwargs", [{"results_per_query": 2}, {"paper_ratio": 1.0}, {"n_authors": -1},
                                    {"hard_query_ratio": 1.5}, {"n_authors": 5000}])
def test_invalid_spec(kwargs):
    with pytest.raises(InvalidInputError):
        FixtureSpec(**kwargs)
