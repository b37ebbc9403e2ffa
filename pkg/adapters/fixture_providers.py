"""
Fixture Providers - Offline Implementations

Fixture-backed implementations of all provider interfaces.
These work offline and replay recorded data for development and testing.

These are the default providers and will be used when:
- SEARCH_BACKEND=fixture (or not set)
- FETCHER=fixture (or not set)
- TEXT_EXTRACTOR=fixture (or not set)
"""

import json
import logging
import mimetypes
import os
import threading
from collections import defaultdict
from typing import Dict, List, Any, Optional, Tuple
from urllib.parse import urlsplit

from validators.schema_validators import (
    DataParseError,
    validate_document_json,
    validate_fixture_record,
    validate_site_map,
)

from .interfaces import (
    SearchBackend,
    SearchRequest,
    SearchResponse,
    RawSearchHit,
    HttpFetcher,
    FetchRequest,
    FetchResponse,
    TextExtractor,
    FixtureNotFoundError,
    FetchError,
    ExtractionError,
)

logger = logging.getLogger(__name__)


def read_fixture_lines(path: str) -> Dict[str, Dict[str, Any]]:
    """
    Load a search fixture file into a map rendered query -> record.

    Lines are JSON objects in the fixture wire format; blank lines are
    ignored and the last line for a rendered query wins.

    Raises:
        DataParseError: A line is not JSON or fails validation (names the line)
    """
    records: Dict[str, Dict[str, Any]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataParseError(path, line_number, f"invalid JSON: {e.msg}")
            is_valid, error_msg = validate_fixture_record(record)
            if not is_valid:
                raise DataParseError(path, line_number, error_msg)
            records[record["q"]] = record
    return records


class FixtureSearchBackend(SearchBackend):
    """
    Search backend that replays a recorded fixture file.

    The file is loaded once and read-only afterwards, so a lookup is a pure
    function of (rendered query, fixture file).
    """

    name = "fixture"

    def __init__(self, path: str):
        self.path = path
        self._records = read_fixture_lines(path)
        logger.debug("Loaded %d fixture queries from %s", len(self._records), path)

    def __contains__(self, rendered: str) -> bool:
        return rendered in self._records

    def search(self, request: SearchRequest) -> SearchResponse:
        record = self._records.get(request.rendered)
        if record is None:
            raise FixtureNotFoundError(f"No fixture entry for query {request.rendered!r} in {self.path}")

        hits = [
            RawSearchHit(
                url=entry["url"],
                title=entry["title"],
                snippet=entry["snippet"],
                rank=entry["rank"],
            )
            for entry in sorted(record["results"], key=lambda e: e["rank"])
        ]
        return SearchResponse(
            rendered=request.rendered,
            hits=hits,
            retrieved_at=record.get("retrieved_at"),
            metadata={"provider": "fixture", "path": self.path},
        )


# ==================== Fixture Fetcher ====================

class FixtureFetcher(HttpFetcher):
    """
    HTTP fetcher that serves a declared site map (or a directory tree) from memory.

    Time is virtual: sleep() advances the clock instantly, and every request
    is logged with its virtual timestamp so politeness can be asserted.

    Site map entries may declare:
    - status: HTTP status (default 200)
    - content_type: default guessed from the path
    - body: text body (served UTF-8 encoded)
    - error: true to raise FetchError (simulated connection failure)
    """

    name = "fixture"

    def __init__(self, pages: Optional[Dict[str, Dict[str, Any]]] = None,
                 robots: Optional[Dict[str, str]] = None,
                 root_dir: Optional[str] = None):
        self.pages = {self._key(url): page for url, page in (pages or {}).items()}
        self.robots = {host.lower(): text for host, text in (robots or {}).items()}
        self.root_dir = root_dir
        self._now = 0.0
        self._lock = threading.Lock()
        self.request_log: List[Tuple[str, float]] = []

    @classmethod
    def from_site_map(cls, path: str) -> "FixtureFetcher":
        """Load a site map JSON file (see validate_site_map)."""
        with open(path, "r", encoding="utf-8") as f:
            site = json.load(f)
        is_valid, error_msg = validate_site_map(site)
        if not is_valid:
            raise DataParseError(path, 1, error_msg)
        return cls(pages=site["pages"], robots=site.get("robots", {}))

    @classmethod
    def from_directory(cls, root_dir: str) -> "FixtureFetcher":
        """Serve <root_dir>/<host>/<path>; robots from <root_dir>/<host>/robots.txt."""
        return cls(root_dir=root_dir)

    @staticmethod
    def _key(url: str) -> str:
        parts = urlsplit(url)
        path = parts.path or "/"
        key = f"{parts.scheme.lower()}://{(parts.netloc or '').lower()}{path}"
        if parts.query:
            key += "?" + parts.query
        return key

    # -------- clock --------

    def clock(self) -> float:
        with self._lock:
            return self._now

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            with self._lock:
                self._now += seconds

    def timestamps_by_host(self) -> Dict[str, List[float]]:
        """Virtual request timestamps grouped by host, in request order."""
        grouped: Dict[str, List[float]] = defaultdict(list)
        for url, ts in self.request_log:
            grouped[(urlsplit(url).hostname or "").lower()].append(ts)
        return dict(grouped)

    # -------- fetch --------

    def fetch(self, request: FetchRequest) -> FetchResponse:
        with self._lock:
            self.request_log.append((request.url, self._now))

        parts = urlsplit(request.url)
        host = (parts.hostname or "").lower()

        if parts.path == "/robots.txt":
            text = self.robots.get(host)
            if text is None and self.root_dir:
                text = self._read_file(os.path.join(self.root_dir, host, "robots.txt"))
                text = text.decode("utf-8") if text is not None else None
            if text is None:
                return FetchResponse(url=request.url, status=404, content_type="text/plain")
            return FetchResponse(url=request.url, status=200, content_type="text/plain",
                                 body=text.encode("utf-8"))

        if self.root_dir:
            return self._fetch_from_directory(request.url, host, parts.path)

        page = self.pages.get(self._key(request.url))
        if page is None:
            return FetchResponse(url=request.url, status=404, content_type="text/html",
                                 metadata={"provider": "fixture"})
        if page.get("error"):
            raise FetchError(f"Simulated connection failure for {request.url}")

        content_type = page.get("content_type") or self._guess_type(parts.path)
        return FetchResponse(
            url=request.url,
            status=int(page.get("status", 200)),
            content_type=content_type,
            body=page.get("body", "").encode("utf-8"),
            metadata={"provider": "fixture"},
        )

    def _fetch_from_directory(self, url: str, host: str, path: str) -> FetchResponse:
        relative = path.lstrip("/")
        if not relative or relative.endswith("/"):
            relative += "index.html"
        full_path = os.path.join(self.root_dir, host, *relative.split("/"))
        body = self._read_file(full_path)
        if body is None:
            return FetchResponse(url=url, status=404, content_type="text/html")
        return FetchResponse(url=url, status=200, content_type=self._guess_type(full_path), body=body)

    @staticmethod
    def _read_file(path: str) -> Optional[bytes]:
        if not os.path.isfile(path):
            return None
        with open(path, "rb") as f:
            return f.read()

    @staticmethod
    def _guess_type(path: str) -> str:
        if path.lower().endswith(".pdf"):
            return "application/pdf"
        guessed, _ = mimetypes.guess_type(path)
        return guessed or "text/html"


# ==================== Fixture Text Extractor ====================

class FixtureTextExtractor(TextExtractor):
    """
    Extractor for the pre-extracted JSON format.

    Fixture "PDF" bodies are UTF-8 JSON documents, so extraction is parsing
    plus validation.
    """

    name = "fixture"

    def extract(self, data: bytes, doc_id: str) -> Dict[str, Any]:
        try:
            document = json.loads(data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ExtractionError(f"{doc_id}: not a pre-extracted document ({e})")
        is_valid, error_msg = validate_document_json(document)
        if not is_valid:
            raise ExtractionError(f"{doc_id}: {error_msg}")
        return document


__all__ = [
    "read_fixture_lines",
    "FixtureSearchBackend",
    "FixtureFetcher",
    "FixtureTextExtractor",
]
