"""
Live Provider Implementations

Network-backed provider implementations.
Currently supports:
- LiveSearchBackend: generic HTTPS JSON search API (one GET per query)
- LiveHttpFetcher: requests-based GET with a configurable user agent
- PdfPlumberExtractor: PDF text extraction via pdfplumber
- CommandTextExtractor: shells out to an external extraction tool (pdftotext-style)

All providers implement the adapter interfaces and raise provider errors;
the factory layer decides whether to fall back to fixtures.
"""

import io
import logging
import subprocess
import threading
import time
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional

import requests

from .interfaces import (
    SearchBackend,
    SearchRequest,
    SearchResponse,
    RawSearchHit,
    HttpFetcher,
    FetchRequest,
    FetchResponse,
    TextExtractor,
    ProviderError,
    ProviderTimeoutError,
    ProviderAuthenticationError,
    BackendError,
    ThrottledError,
    FetchError,
    ExtractionError,
)

try:
    import pdfplumber
    PDFPLUMBER_AVAILABLE = True
except ImportError:
    PDFPLUMBER_AVAILABLE = False

logger = logging.getLogger(__name__)

DEFAULT_USER_AGENT = "search-crawl-harvester/0.1 (+https://example.org/harvester-contact)"

TRANSIENT_STATUSES = {500, 502, 503, 504}


# ==================== Rate Limiting ====================

class TokenBucket:
    """
    Thread-safe token bucket.

    acquire() blocks until a token is available. A bucket is shared by every
    thread that talks to the same backend.
    """

    def __init__(self, rate_per_second: float = 3.0, capacity: Optional[float] = None,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate_per_second <= 0:
            raise ValueError("rate_per_second must be positive")
        self.rate = float(rate_per_second)
        self.capacity = float(capacity if capacity is not None else max(1.0, rate_per_second))
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def _refill(self) -> None:
        now = self._clock()
        self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
        self._last = now

    def try_acquire(self) -> bool:
        """Take a token without blocking; False when the bucket is empty."""
        with self._lock:
            self._refill()
            if self._tokens >= 1.0:
                self._tokens -= 1.0
                return True
            return False

    def acquire(self) -> None:
        while True:
            with self._lock:
                self._refill()
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


# ==================== Live Search Backend ====================

class LiveSearchBackend(SearchBackend):
    """
    Generic HTTPS search API backend.

    One GET per query: ``endpoint?q=<rendered>&count=<top_k>`` with the
    credential as a bearer token. Transient failures (timeouts, 5xx) are
    retried with exponential backoff; 429 after the last retry raises
    ThrottledError.

    Response mapping accepts the common provider shapes:
    - {"results": [{"url", "title", "snippet"}]}
    - {"webPages": {"value": [{"url", "name", "snippet"}]}}
    - {"organic_results": [{"link", "title", "snippet", "position"}]}
    """

    name = "live"

    def __init__(self, endpoint: str, api_key: Optional[str], timeout_ms: int = 10000,
                 max_retries: int = 3, queries_per_second: float = 3.0,
                 backoff_seconds: float = 0.5, rate_limiter: Optional[TokenBucket] = None,
                 session: Optional[requests.Session] = None):
        if not endpoint:
            raise ProviderAuthenticationError("Missing search endpoint: set SEARCH_ENDPOINT or [search].endpoint")
        if not api_key:
            raise ProviderAuthenticationError("Missing search credential: set SEARCH_API_KEY or [search].api_key")
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout_ms / 1000.0
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self.rate_limiter = rate_limiter or TokenBucket(queries_per_second)
        self.session = session or requests.Session()

    def search(self, request: SearchRequest) -> SearchResponse:
        params = {"q": request.rendered, "count": request.top_k}
        headers = {"Authorization": f"Bearer {self.api_key}", "Accept": "application/json"}

        last_status: Optional[int] = None
        for attempt in range(self.max_retries + 1):
            self.rate_limiter.acquire()
            try:
                response = self.session.get(self.endpoint, params=params, headers=headers,
                                            timeout=self.timeout)
            except requests.exceptions.Timeout:
                last_status = None
                logger.warning("Search timeout for %r (attempt %d)", request.rendered, attempt + 1)
                self._backoff(attempt)
                continue
            except requests.exceptions.RequestException as e:
                last_status = None
                logger.warning("Search network error for %r: %s", request.rendered, e)
                self._backoff(attempt)
                continue

            if response.status_code in (401, 403):
                raise ProviderAuthenticationError(
                    f"Search backend rejected credentials (HTTP {response.status_code})")
            if response.status_code == 429 or response.status_code in TRANSIENT_STATUSES:
                last_status = response.status_code
                self._backoff(attempt)
                continue
            if response.status_code != 200:
                raise BackendError("Search backend error", status=response.status_code)

            try:
                data = response.json()
            except ValueError:
                raise BackendError("Search backend returned non-JSON body", status=response.status_code)

            return SearchResponse(
                rendered=request.rendered,
                hits=self._extract_hits(data)[:request.top_k],
                retrieved_at=datetime.now(timezone.utc).isoformat(),
                metadata={"provider": "live", "attempts": attempt + 1},
            )

        if last_status == 429:
            raise ThrottledError(f"Search backend throttled query {request.rendered!r}")
        raise BackendError(f"Search failed after {self.max_retries + 1} attempts", status=last_status)

    def _backoff(self, attempt: int) -> None:
        if attempt < self.max_retries:
            time.sleep(self.backoff_seconds * (2 ** attempt))

    @staticmethod
    def _extract_hits(data: Dict[str, Any]) -> List[RawSearchHit]:
        if isinstance(data.get("results"), list):
            items = data["results"]
            return [RawSearchHit(url=i.get("url", ""), title=i.get("title", "") or "",
                                 snippet=i.get("snippet", "") or "") for i in items if i.get("url")]
        web_pages = data.get("webPages")
        if isinstance(web_pages, dict) and isinstance(web_pages.get("value"), list):
            return [RawSearchHit(url=i.get("url", ""), title=i.get("name", "") or "",
                                 snippet=i.get("snippet", "") or "")
                    for i in web_pages["value"] if i.get("url")]
        if isinstance(data.get("organic_results"), list):
            items = sorted(data["organic_results"], key=lambda i: i.get("position", 0))
            return [RawSearchHit(url=i.get("link", ""), title=i.get("title", "") or "",
                                 snippet=i.get("snippet", "") or "") for i in items if i.get("link")]
        raise BackendError("Search backend response has no recognizable result list")


# ==================== Live HTTP Fetcher ====================

class LiveHttpFetcher(HttpFetcher):
    """requests-based fetcher; wall-clock time for politeness."""

    name = "live"

    def __init__(self, user_agent: str = DEFAULT_USER_AGENT, session: Optional[requests.Session] = None):
        self.user_agent = user_agent
        self.session = session or requests.Session()

    def fetch(self, request: FetchRequest) -> FetchResponse:
        headers = {"User-Agent": request.user_agent or self.user_agent}
        try:
            response = self.session.get(request.url, headers=headers, timeout=request.timeout,
                                        allow_redirects=True)
        except requests.exceptions.Timeout:
            raise ProviderTimeoutError(f"Timed out fetching {request.url}")
        except requests.exceptions.RequestException as e:
            raise FetchError(f"Network error fetching {request.url}: {e}")

        content_type = response.headers.get("Content-Type", "").split(";")[0].strip().lower()
        return FetchResponse(
            url=request.url,
            status=response.status_code,
            content_type=content_type,
            body=response.content,
            metadata={"provider": "live", "final_url": response.url},
        )


# ==================== Text Extractors ====================

class PdfPlumberExtractor(TextExtractor):
    """PDF text extraction via pdfplumber; one list of lines per page."""

    name = "pdfplumber"

    def __init__(self):
        if not PDFPLUMBER_AVAILABLE:
            raise ProviderError("pdfplumber is required for the pdfplumber extractor")

    def extract(self, data: bytes, doc_id: str) -> Dict[str, Any]:
        try:
            pages = []
            with pdfplumber.open(io.BytesIO(data)) as pdf:
                for page in pdf.pages:
                    text = page.extract_text() or ""
                    pages.append(text.splitlines())
        except Exception as e:
            raise ExtractionError(f"{doc_id}: pdfplumber failed: {e}")
        if not pages:
            raise ExtractionError(f"{doc_id}: no pages")
        return {"doc_id": doc_id, "byte_size": len(data), "pages": pages}


class CommandTextExtractor(TextExtractor):
    """
    Shells out to an external tool that reads PDF bytes on stdin and writes
    text on stdout, pages separated by form feeds (pdftotext convention).
    """

    name = "command"

    def __init__(self, command: Optional[List[str]] = None, timeout: float = 60.0):
        self.command = command or ["pdftotext", "-enc", "UTF-8", "-", "-"]
        self.timeout = timeout

    def extract(self, data: bytes, doc_id: str) -> Dict[str, Any]:
        try:
            completed = subprocess.run(self.command, input=data, capture_output=True,
                                       timeout=self.timeout, check=False)
        except (OSError, subprocess.TimeoutExpired) as e:
            raise ExtractionError(f"{doc_id}: extraction command failed: {e}")
        if completed.returncode != 0:
            raise ExtractionError(
                f"{doc_id}: extraction command exited {completed.returncode}: "
                f"{completed.stderr.decode('utf-8', 'replace')[:200]}")
        text = completed.stdout.decode("utf-8", "replace")
        pages = [page.splitlines() for page in text.split("\f")]
        if pages and not any(pages[-1]):
            pages = pages[:-1]
        if not pages:
            raise ExtractionError(f"{doc_id}: extraction produced no pages")
        return {"doc_id": doc_id, "byte_size": len(data), "pages": pages}


__all__ = [
    "PDFPLUMBER_AVAILABLE",
    "DEFAULT_USER_AGENT",
    "TokenBucket",
    "LiveSearchBackend",
    "LiveHttpFetcher",
    "PdfPlumberExtractor",
    "CommandTextExtractor",
]
