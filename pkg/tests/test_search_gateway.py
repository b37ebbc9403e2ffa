"""
Search Gateway Tests

Query construction, fixture replay and the fixture wire format.
"""

import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from adapters.fixture_providers import FixtureSearchBackend
from adapters.interfaces import FixtureNotFoundError, RawSearchHit, SearchBackend, SearchResponse
import search_gateway
from search_gateway import (
    ResultPage,
    SearchResult,
    build_author_query,
    build_title_query,
    execute,
    execute_many,
    load_fixture,
    load_labeled_fixture,
    make_query_id,
    record_fixture,
    strip_rendered,
)
from validators.schema_validators import DataParseError, InvalidInputError, InvariantViolationError


class ListBackend(SearchBackend):
    """Returns the same hit list for every query."""

    name = "list"

    def __init__(self, hits):
        self.hits = hits

    def search(self, request):
        return SearchResponse(rendered=request.rendered, hits=list(self.hits))


@pytest.fixture
def blitzer_backend(fixtures_dir):
    return FixtureSearchBackend(os.path.join(fixtures_dir, "blitzer_search.jsonl"))


# ==================== Query Construction ====================

def test_title_query_rendering():
    query = build_title_query("Maximum Satisfiability using Cores and Correction Sets")
    assert query.rendered == '"Maximum Satisfiability using Cores and Correction Sets" filetype:pdf'
    assert query.kind == "title"
    assert query.filetype == "pdf"


def test_title_query_collapses_whitespace():
    assert build_title_query("  A  B ").rendered == '"A B" filetype:pdf'


@pytest.mark.parametrize("title", ["", "   ", "\t\n"])
def test_title_query_rejects_empty(title):
    with pytest.raises(InvalidInputError):
        build_title_query(title)


def test_author_query_rendering():
    query = build_author_query("John Blitzer")
    assert query.rendered == '"John Blitzer" filetype:html'
    assert query.raw_text == "John Blitzer"
    assert build_author_query("Nikolaj Bjorner").rendered.startswith('"Nikolaj Bjorner"')


@pytest.mark.parametrize("name", ["", "123", "  42 7 "])
def test_author_query_rejects_non_names(name):
    with pytest.raises(InvalidInputError):
        build_author_query(name)


@pytest.mark.parametrize("title", [
    "Maximum Satisfiability using Cores and Correction Sets",
    "  A  Multi-Agent   Approach to Planning ",
    "\u00dcber Graphen: eine Einf\u00fchrung",
])
def test_title_query_survives_strip_and_rebuild(title):
    query = build_title_query(title)
    raw = strip_rendered(query.rendered)
    assert build_title_query(raw).rendered == query.rendered, f"rebuild changed {query.rendered!r}"
    assert strip_rendered(build_title_query(raw).rendered) == raw


def test_author_query_survives_strip_and_rebuild():
    query = build_author_query(" Jean-Luc   Picard ")
    assert build_author_query(strip_rendered(query.rendered)).rendered == query.rendered


def test_strip_rendered_rejects_unquoted_text():
    with pytest.raises(InvalidInputError):
        strip_rendered("plain words")


def test_query_id_is_stable_and_independent_of_top_k():
    a = build_author_query("John Blitzer", top_k=10)
    b = build_author_query("John  Blitzer", top_k=3)
    assert a.id == b.id == make_query_id("author", a.rendered)
    assert a.id != build_title_query("John Blitzer").id


# ==================== Execution ====================

def test_fixture_execute_blitzer(blitzer_backend):
    page = execute(build_author_query("John Blitzer"), blitzer_backend)
    assert [r.rank for r in page.results] == [1, 2, 3, 4]
    assert page.results[1].url == "http://john.blitzer.com/"
    assert all(r.query_id == page.query.id for r in page.results)


def test_fixture_execute_unknown_query(blitzer_backend):
    with pytest.raises(FixtureNotFoundError):
        execute(build_author_query("Ada Lovelace"), blitzer_backend)


def test_execute_truncates_to_top_k():
    hits = [RawSearchHit(url=f"http://x.edu/{i}", title=f"t{i}", snippet="") for i in range(10)]
    page = execute(build_title_query("Some Title", top_k=3), ListBackend(hits))
    assert len(page) == 3
    assert [r.url for r in page.results] == ["http://x.edu/0", "http://x.edu/1", "http://x.edu/2"]


def test_execute_drops_invalid_urls_and_renumbers():
    hits = [RawSearchHit("http://a.edu/", "a", ""), RawSearchHit("", "bad", ""),
            RawSearchHit("http://b.edu/", "b", "")]
    page = execute(build_title_query("Some Title"), ListBackend(hits))
    assert [(r.rank, r.url) for r in page.results] == [(1, "http://a.edu/"), (2, "http://b.edu/")]


def test_execute_many_keeps_order_and_isolates_failures(blitzer_backend):
    queries = [build_author_query("John Blitzer"), build_author_query("Ada Lovelace"),
               build_author_query("John Blitzer", query_id="again")]
    pages = execute_many(queries, blitzer_backend, max_workers=3)
    assert isinstance(pages[0], ResultPage)
    assert isinstance(pages[1], FixtureNotFoundError)
    assert isinstance(pages[2], ResultPage) and pages[2].query.id == "again"


def test_execute_empty_result_page(fixtures_dir):
    backend = FixtureSearchBackend(os.path.join(fixtures_dir, "title_search.jsonl"))
    page = execute(build_author_query("Nobody Inparticular"), backend)
    assert len(page) == 0


# ==================== Result Page Invariants ====================

def test_result_page_rejects_duplicate_ranks():
    query = build_title_query("Some Title")
    results = [SearchResult(query.id, 1, "http://a.edu/", "a", ""),
               SearchResult(query.id, 1, "http://b.edu/", "b", "")]
    with pytest.raises(InvariantViolationError):
        ResultPage(query=query, results=results)


def test_result_page_rejects_more_than_top_k():
    query = build_title_query("Some Title", top_k=1)
    results = [SearchResult(query.id, 1, "http://a.edu/", "a", ""),
               SearchResult(query.id, 2, "http://b.edu/", "b", "")]
    with pytest.raises(InvariantViolationError):
        ResultPage(query=query, results=results)


# ==================== Fixture Wire Format ====================

def test_record_then_replay(tmp_path, blitzer_backend):
    query = build_author_query("John Blitzer")
    page = execute(query, blitzer_backend)
    path = str(tmp_path / "recorded.jsonl")
    record_fixture(query, page, path)

    replayed = execute(query, FixtureSearchBackend(path))
    assert replayed == page


def test_record_twice_last_wins(tmp_path):
    query = build_title_query("Some Title")
    path = str(tmp_path / "recorded.jsonl")
    first = ResultPage(query, (SearchResult(query.id, 1, "http://a.edu/", "a", ""),))
    second = ResultPage(query, (SearchResult(query.id, 1, "http://b.edu/", "b", ""),))
    record_fixture(query, first, path)
    record_fixture(query, second, path)

    pages = load_fixture(path)
    assert len(pages) == 1
    assert pages[0].results[0].url == "http://b.edu/"


def test_record_rejects_page_of_other_query(tmp_path):
    query = build_title_query("Some Title")
    other = build_title_query("Other Title")
    page = ResultPage(other, ())
    with pytest.raises(InvariantViolationError):
        record_fixture(query, page, str(tmp_path / "x.jsonl"))


def test_load_labeled_fixture(fixtures_dir):
    pages = load_labeled_fixture(os.path.join(fixtures_dir, "blitzer_search.jsonl"))
    assert len(pages) == 1
    assert pages[0].author_name == "John Blitzer"
    assert pages[0].labels == ("other", "homepage", "other", "other")
    assert pages[0].homepage_indices() == [1]


def test_load_labeled_fixture_reports_line_number(tmp_path, fixtures_dir):
    with open(os.path.join(fixtures_dir, "blitzer_search.jsonl"), encoding="utf-8") as f:
        good = f.readline().strip()
    bad = json.loads(good)
    del bad["results"][0]["label"]
    path = tmp_path / "labeled.jsonl"
    path.write_text(good + "\n\n" + json.dumps(bad) + "\n", encoding="utf-8")

    with pytest.raises(DataParseError) as excinfo:
        load_labeled_fixture(str(path))
    assert excinfo.value.line_number == 3


def test_load_fixture_rejects_gapped_ranks(tmp_path):
    record = {"q": '"A B" filetype:pdf', "results": [
        {"rank": 1, "url": "http://a.edu/", "title": "", "snippet": ""},
        {"rank": 3, "url": "http://b.edu/", "title": "", "snippet": ""}]}
    path = tmp_path / "gapped.jsonl"
    path.write_text(json.dumps(record) + "\n", encoding="utf-8")
    with pytest.raises(DataParseError):
        load_fixture(str(path))


# ==================== Module Surface ====================

def test_public_names_are_defined_here():
    for name in search_gateway.__all__:
        obj = getattr(search_gateway, name)
        if isinstance(obj, type) or callable(obj):
            assert obj.__module__ == "search_gateway", f"{name} is re-exported from {obj.__module__}"
