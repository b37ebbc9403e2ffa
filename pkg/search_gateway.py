"""
Search Gateway
==============

Builds the harvester's quoted search queries and executes them against a
pluggable SearchBackend (live HTTPS API or recorded fixtures), normalizing the
hits into ranked, immutable ResultPages.

Features:
- build_title_query / build_author_query: quoted exact-match queries with
  filetype directives (pdf for titles, html for author names)
- execute / execute_many: one or many queries against a backend
- record_fixture / load_fixture / load_labeled_fixture: fixture wire format

Fixture wire format (one JSON object per line, UTF-8, last duplicate wins):
    {"q": rendered, "results": [{"rank", "url", "title", "snippet"}, ...],
     "retrieved_at": iso timestamp, "name": str (labeled), "label" per result (labeled)}
"""

import hashlib
import json
import logging
import os
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from adapters.interfaces import SearchBackend, SearchRequest, SearchResponse
from validators.schema_validators import (
    DataParseError,
    InvalidInputError,
    InvariantViolationError,
    is_valid_url,
    validate_labeled_record,
)

logger = logging.getLogger(__name__)

DEFAULT_TOP_K = 10
FIXTURE_EPOCH = "1970-01-01T00:00:00+00:00"

QUERY_KINDS = ("title", "author")
FILETYPE_FOR_KIND = {"title": "pdf", "author": "html"}

_WHITESPACE = re.compile(r"\s+")
_RENDERED = re.compile(r'^"(?P<raw>[^"]*)"(?:\s+filetype:(?P<filetype>\w+))?$')

_record_lock = threading.Lock()


# ==================== Domain Types ====================

@dataclass(frozen=True)
class Query:
    """One quoted search query."""
    id: str
    kind: str
    raw_text: str
    rendered: str
    top_k: int = DEFAULT_TOP_K

    def __post_init__(self):
        if self.kind not in QUERY_KINDS:
            raise InvariantViolationError(f"query kind must be one of {QUERY_KINDS}, got {self.kind!r}")
        if not isinstance(self.top_k, int) or self.top_k < 1:
            raise InvariantViolationError(f"top_k must be >= 1, got {self.top_k!r}")
        if not self.rendered.startswith(f'"{self.raw_text}"'):
            raise InvariantViolationError(f"rendered query {self.rendered!r} does not quote {self.raw_text!r}")
        directive = f"filetype:{FILETYPE_FOR_KIND[self.kind]}"
        if not self.rendered.endswith(directive):
            raise InvariantViolationError(f"{self.kind} query must carry '{directive}': {self.rendered!r}")

    @property
    def filetype(self) -> str:
        return FILETYPE_FOR_KIND[self.kind]


@dataclass(frozen=True)
class SearchResult:
    """One ranked hit: (url, page title, snippet)."""
    query_id: str
    rank: int
    url: str
    page_title: str
    snippet: str

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise InvariantViolationError(f"rank must be an integer >= 1, got {self.rank!r}")
        if not is_valid_url(self.url):
            raise InvariantViolationError(f"result url is not valid: {self.url!r}")


@dataclass(frozen=True)
class ResultPage:
    """The candidate set of one search interaction, ranks exactly 1..n."""
    query: Query
    results: Tuple[SearchResult, ...]
    retrieved_at: str = FIXTURE_EPOCH

    def __post_init__(self):
        object.__setattr__(self, "results", tuple(self.results))
        check_page_invariants(self.query, self.results)

    def __len__(self) -> int:
        return len(self.results)


@dataclass(frozen=True)
class LabeledPage:
    """A ResultPage of an author query with one label per result (homepage/other)."""
    page: ResultPage
    author_name: str
    labels: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != len(self.page.results):
            raise InvariantViolationError(
                f"{len(self.labels)} labels for {len(self.page.results)} results in {self.page.query.id!r}")

    @property
    def query_id(self) -> str:
        return self.page.query.id

    def homepage_indices(self) -> List[int]:
        return [i for i, label in enumerate(self.labels) if label == "homepage"]


def check_page_invariants(query: Query, results: Sequence[SearchResult]) -> None:
    """
    Raises:
        InvariantViolationError: more than top_k results, or ranks not exactly
            1..n in ascending order
    """
    if len(results) > query.top_k:
        raise InvariantViolationError(
            f"page for {query.id!r} has {len(results)} results, more than top_k={query.top_k}")
    ranks = [r.rank for r in results]
    if ranks != list(range(1, len(ranks) + 1)):
        raise InvariantViolationError(f"ranks must be exactly 1..{len(ranks)} in order, got {ranks}")


# ==================== Query Construction ====================

def normalize_query_text(text: str) -> str:
    """Collapse whitespace runs; embedded double quotes are dropped."""
    return _WHITESPACE.sub(" ", (text or "").replace('"', " ")).strip()


def make_query_id(kind: str, rendered: str) -> str:
    digest = hashlib.sha1(rendered.encode("utf-8")).hexdigest()[:12]
    return f"{kind}-{digest}"


def render_query(kind: str, raw_text: str) -> str:
    return f'"{raw_text}" filetype:{FILETYPE_FOR_KIND[kind]}'


def strip_rendered(rendered: str) -> str:
    """
    Recover the raw text from a rendered query.

    Raises:
        InvalidInputError: Not a quoted query
    """
    match = _RENDERED.match(rendered.strip())
    if match is None:
        raise InvalidInputError(f"not a rendered query: {rendered!r}")
    return match.group("raw")


def build_title_query(title: str, top_k: int = DEFAULT_TOP_K, query_id: Optional[str] = None) -> Query:
    """
    Build a quoted title query restricted to PDF results.

    Args:
        title: Paper title; whitespace is collapsed before quoting
        top_k: Result budget
        query_id: Optional explicit id (default derived from the rendered text)

    Returns:
        Query with rendered form '"<title>" filetype:pdf'

    Raises:
        InvalidInputError: Title is empty after whitespace normalization
    """
    raw = normalize_query_text(title)
    if not raw:
        raise InvalidInputError("title must be non-empty", stage="query")
    rendered = render_query("title", raw)
    return Query(id=query_id or make_query_id("title", rendered), kind="title",
                 raw_text=raw, rendered=rendered, top_k=top_k)


def build_author_query(name: str, top_k: int = DEFAULT_TOP_K, query_id: Optional[str] = None) -> Query:
    """
    Build a quoted author-name query restricted to HTML results.

    Raises:
        InvalidInputError: Name is empty or has no alphabetic token
    """
    raw = normalize_query_text(name)
    if not raw:
        raise InvalidInputError("author name must be non-empty", stage="query")
    if not any(ch.isalpha() for ch in raw):
        raise InvalidInputError(f"author name has no alphabetic token: {name!r}", stage="query")
    rendered = render_query("author", raw)
    return Query(id=query_id or make_query_id("author", rendered), kind="author",
                 raw_text=raw, rendered=rendered, top_k=top_k)


def query_from_rendered(rendered: str, top_k: int = DEFAULT_TOP_K) -> Query:
    """Rebuild a Query from its rendered text (kind taken from the filetype directive)."""
    match = _RENDERED.match(rendered.strip())
    if match is None:
        raise InvalidInputError(f"not a rendered query: {rendered!r}")
    kind = "title" if match.group("filetype") == "pdf" else "author"
    builder = build_title_query if kind == "title" else build_author_query
    return builder(match.group("raw"), top_k=top_k)


# ==================== Execution ====================

def _normalize_response(query: Query, response: SearchResponse) -> ResultPage:
    results: List[SearchResult] = []
    for hit in response.hits:
        if len(results) >= query.top_k:
            break
        if not is_valid_url(hit.url):
            logger.warning("Dropping result with invalid url %r for %s", hit.url, query.id)
            continue
        results.append(SearchResult(
            query_id=query.id,
            rank=len(results) + 1,
            url=hit.url,
            page_title=hit.title or "",
            snippet=hit.snippet or "",
        ))
    return ResultPage(query=query, results=tuple(results),
                      retrieved_at=response.retrieved_at or FIXTURE_EPOCH)


def execute(query: Query, backend: SearchBackend) -> ResultPage:
    """
    Execute one query and normalize the hits.

    Returns:
        ResultPage with at most top_k results, ranks 1..n in engine order

    Raises:
        FixtureNotFoundError: Fixture backend has no entry for the rendered query
        BackendError: Live backend failed after retries
        ThrottledError: Rate limit exceeded
    """
    request = SearchRequest(rendered=query.rendered, top_k=query.top_k,
                            kind=query.kind, filetype=query.filetype)
    response = backend.search(request)
    page = _normalize_response(query, response)
    logger.debug("Query %s returned %d results", query.id, len(page.results))
    return page


def execute_many(queries: Sequence[Query], backend: SearchBackend,
                 max_workers: int = 4) -> List[Union[ResultPage, Exception]]:
    """
    Execute queries on a bounded worker pool.

    Results come back in input order; a failed query yields its exception in
    place of a page so one failure never aborts the batch.
    """
    def run_one(query: Query) -> Union[ResultPage, Exception]:
        try:
            return execute(query, backend)
        except Exception as e:
            logger.warning("Query %s failed: %s", query.id, e)
            return e

    if max_workers <= 1 or len(queries) <= 1:
        return [run_one(q) for q in queries]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run_one, queries))


# ==================== Fixture Wire Format ====================

def page_to_record(page: ResultPage, labels: Optional[Sequence[str]] = None,
                   name: Optional[str] = None) -> Dict[str, Any]:
    record: Dict[str, Any] = {"q": page.query.rendered}
    if name is not None:
        record["name"] = name
    entries = []
    for idx, result in enumerate(page.results):
        entry = {"rank": result.rank, "url": result.url, "title": result.page_title,
                 "snippet": result.snippet}
        if labels is not None:
            entry["label"] = labels[idx]
        entries.append(entry)
    record["results"] = entries
    record["retrieved_at"] = page.retrieved_at
    return record


def record_fixture(query: Query, page: ResultPage, path: str,
                   labels: Optional[Sequence[str]] = None, name: Optional[str] = None) -> None:
    """
    Append one fixture line for (query, page).

    Re-recording a query appends another line; the last line wins on load.

    Raises:
        InvariantViolationError: Page breaks rank contiguity or belongs to another query
        OSError: Path is not writable
    """
    if page.query.rendered != query.rendered:
        raise InvariantViolationError(
            f"page belongs to {page.query.rendered!r}, not {query.rendered!r}")
    check_page_invariants(query, page.results)
    line = json.dumps(page_to_record(page, labels=labels, name=name), ensure_ascii=False)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with _record_lock:
        with open(path, "a", encoding="utf-8") as f:
            f.write(line + "\n")


def _page_from_record(record: Dict[str, Any], kind: Optional[str] = None) -> ResultPage:
    results = record["results"]
    top_k = max(DEFAULT_TOP_K, len(results))
    query = query_from_rendered(record["q"], top_k=top_k)
    if kind is not None and query.kind != kind:
        raise InvalidInputError(f"expected a {kind} query, got {record['q']!r}")
    ordered = sorted(results, key=lambda e: e["rank"])
    return ResultPage(
        query=query,
        results=tuple(SearchResult(query_id=query.id, rank=e["rank"], url=e["url"],
                                   page_title=e["title"], snippet=e["snippet"]) for e in ordered),
        retrieved_at=record.get("retrieved_at") or FIXTURE_EPOCH,
    )


def load_fixture(path: str) -> List[ResultPage]:
    """All pages of a fixture file, last duplicate winning, in first-seen order."""
    from adapters.fixture_providers import read_fixture_lines

    pages = []
    for rendered, record in read_fixture_lines(path).items():
        try:
            pages.append(_page_from_record(record))
        except (InvalidInputError, InvariantViolationError) as e:
            raise DataParseError(path, 0, f"{rendered!r}: {e.message}")
    return pages


def load_labeled_fixture(path: str) -> List[LabeledPage]:
    """
    Load labeled homepage-search data (author queries with per-result labels).

    Raises:
        DataParseError: Malformed line (names the line number)
    """
    by_query: Dict[str, LabeledPage] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataParseError(path, line_number, f"invalid JSON: {e.msg}")
            is_valid, error_msg = validate_labeled_record(record)
            if not is_valid:
                raise DataParseError(path, line_number, error_msg)
            try:
                page = _page_from_record(record, kind="author")
            except (InvalidInputError, InvariantViolationError) as e:
                raise DataParseError(path, line_number, e.message)
            ordered = sorted(record["results"], key=lambda e: e["rank"])
            by_query[record["q"]] = LabeledPage(page=page, author_name=record["name"],
                                                labels=tuple(e["label"] for e in ordered))
    return list(by_query.values())


__all__ = [
    "DEFAULT_TOP_K",
    "FIXTURE_EPOCH",
    "Query",
    "SearchResult",
    "ResultPage",
    "LabeledPage",
    "check_page_invariants",
    "normalize_query_text",
    "make_query_id",
    "strip_rendered",
    "build_title_query",
    "build_author_query",
    "query_from_rendered",
    "execute",
    "execute_many",
    "page_to_record",
    "record_fixture",
    "load_fixture",
    "load_labeled_fixture",
]
