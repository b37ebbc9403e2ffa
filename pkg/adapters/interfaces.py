"""
Provider Interfaces - Abstract Base Classes

Defines the contract that all providers (fixture and live) must implement.
This ensures the harvesting pipeline can work with any provider without modification.

Three provider families:
- SearchBackend: one web-search interaction per rendered query
- HttpFetcher: one GET per canonical URL, plus the clock politeness is measured on
- TextExtractor: document bytes to pages of text lines
"""

from abc import ABC, abstractmethod
from typing import Dict, List, Any, Optional
from dataclasses import dataclass, field
import time


# ==================== Error Types ====================

class ProviderError(Exception):
    """Base exception for provider errors"""
    pass


class ProviderTimeoutError(ProviderError):
    """Provider request timed out"""
    pass


class ProviderAuthenticationError(ProviderError):
    """Provider authentication failed or credentials are missing"""
    pass


class BackendError(ProviderError):
    """Search backend failed after retries"""
    def __init__(self, message: str, status: Optional[int] = None):
        self.status = status
        super().__init__(message if status is None else f"{message} (HTTP {status})")


class ThrottledError(ProviderError):
    """Rate limit exceeded; the caller may retry later"""
    pass


class FixtureNotFoundError(ProviderError):
    """Rendered query or URL is not present in the loaded fixture"""
    pass


class FetchError(ProviderError):
    """Network-level failure while fetching a URL"""
    pass


class ExtractionError(ProviderError):
    """Text extraction adapter could not read the document"""
    pass


# ==================== Search Backend ====================

@dataclass(frozen=True)
class SearchRequest:
    """Request for one search interaction"""
    rendered: str  # quoted query text plus filetype directive
    top_k: int = 10
    kind: str = "title"  # "title" or "author"
    filetype: Optional[str] = None  # "pdf" or "html"


@dataclass(frozen=True)
class RawSearchHit:
    """One hit as the backend returned it, before rank normalization"""
    url: str
    title: str
    snippet: str
    rank: Optional[int] = None


@dataclass
class SearchResponse:
    """Result from one search interaction"""
    rendered: str
    hits: List[RawSearchHit] = field(default_factory=list)
    retrieved_at: Optional[str] = None  # ISO timestamp; backends may leave it to the gateway
    metadata: Optional[Dict[str, Any]] = None


class SearchBackend(ABC):
    """
    Interface for web search backends.

    All backends must implement:
    - search(): one query, ranked hits in engine order
    """

    name: str = "abstract"

    @abstractmethod
    def search(self, request: SearchRequest) -> SearchResponse:
        """
        Execute a single search.

        Args:
            request: Rendered query and result budget

        Returns:
            SearchResponse with hits in engine rank order

        Raises:
            FixtureNotFoundError: Fixture backend has no entry for the query
            BackendError: Live backend failed after retries (carries status)
            ThrottledError: Rate limit exceeded
        """
        pass


# ==================== HTTP Fetcher ====================

@dataclass(frozen=True)
class FetchRequest:
    """Request for one GET"""
    url: str
    timeout: float = 10.0
    user_agent: Optional[str] = None


@dataclass
class FetchResponse:
    """Result from one GET"""
    url: str
    status: int
    content_type: str = ""
    body: bytes = b""
    metadata: Optional[Dict[str, Any]] = None


class HttpFetcher(ABC):
    """
    Interface for HTTP fetchers.

    All fetchers must implement:
    - fetch(): one GET returning (status, content type, body)

    clock() and sleep() are the time source politeness delays are enforced
    against. Live fetchers use wall time; the fixture fetcher keeps a virtual
    clock so delays cost nothing in tests.
    """

    name: str = "abstract"

    @abstractmethod
    def fetch(self, request: FetchRequest) -> FetchResponse:
        """
        Fetch a single URL.

        Raises:
            FetchError: Connection-level failure (status never received)
            ProviderTimeoutError: Request timed out
        """
        pass

    def clock(self) -> float:
        """Current time in seconds."""
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        """Block for the given number of seconds."""
        if seconds > 0:
            time.sleep(seconds)


# ==================== Text Extractor ====================

class TextExtractor(ABC):
    """
    Interface for document text extractors.

    Output shape matches the pre-extracted fixture format:
    {"doc_id": str, "byte_size": int, "pages": [[line, ...], ...]}
    """

    name: str = "abstract"

    @abstractmethod
    def extract(self, data: bytes, doc_id: str) -> Dict[str, Any]:
        """
        Extract pages of lines from document bytes.

        Raises:
            ExtractionError: The bytes cannot be read as a document
        """
        pass


__all__ = [
    "ProviderError",
    "ProviderTimeoutError",
    "ProviderAuthenticationError",
    "BackendError",
    "ThrottledError",
    "FixtureNotFoundError",
    "FetchError",
    "ExtractionError",
    "SearchRequest",
    "RawSearchHit",
    "SearchResponse",
    "SearchBackend",
    "FetchRequest",
    "FetchResponse",
    "HttpFetcher",
    "TextExtractor",
]
