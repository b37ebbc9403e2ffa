"""
Provider Adapters - Integration Layer

This module provides a clean adapter layer for search backends, HTTP fetchers
and text extractors. The harvesting pipeline (search, crawl, ingest) uses these
adapters instead of calling the network or a PDF parser directly.

Architecture:
- Interfaces define the contract (interfaces.py)
- Fixture providers replay recorded data offline (fixture_providers.py)
- Live providers talk to the network or external tools (live_providers.py)
- Strategy module handles multi-provider selection and fallback (strategy.py)
- Factory functions select providers based on configuration (get_*)

Usage:
    from adapters import get_search_backend, get_fetcher, get_text_extractor

    backend = get_search_backend(fixture_path="fixtures/author_search.jsonl")  # SEARCH_BACKEND env var
    fetcher = get_fetcher(site_map="fixtures/site_map.json")                  # FETCHER env var
    extractor = get_text_extractor()                                         # TEXT_EXTRACTOR env var

    # Auto strategy (tries live providers, then fixtures)
    # Set SEARCH_BACKEND=auto
"""

from typing import Any, List, Optional
import os
import warnings

from .interfaces import (
    SearchBackend,
    HttpFetcher,
    TextExtractor,
    ProviderError,
)
from .fixture_providers import FixtureSearchBackend, FixtureFetcher, FixtureTextExtractor
from .strategy import (
    register_provider_factory,
    try_provider,
    get_auto_provider,
)


# ==================== Factories ====================

def _factory_fixture_search(fixture_path: Optional[str] = None, **_: Any) -> SearchBackend:
    if not fixture_path:
        raise ProviderError("No search fixture path configured")
    if not os.path.isfile(fixture_path):
        raise ProviderError(f"Search fixture not found: {fixture_path}")
    return FixtureSearchBackend(fixture_path)


def _factory_live_search(endpoint: Optional[str] = None, api_key: Optional[str] = None,
                         timeout_ms: int = 10000, max_retries: int = 3,
                         queries_per_second: float = 3.0, **_: Any) -> SearchBackend:
    from .live_providers import LiveSearchBackend
    return LiveSearchBackend(endpoint=endpoint or "", api_key=api_key, timeout_ms=timeout_ms,
                             max_retries=max_retries, queries_per_second=queries_per_second)


def _factory_fixture_fetcher(site_map: Optional[str] = None, site_dir: Optional[str] = None,
                             **_: Any) -> HttpFetcher:
    if site_map:
        return FixtureFetcher.from_site_map(site_map)
    if site_dir:
        return FixtureFetcher.from_directory(site_dir)
    return FixtureFetcher()


def _factory_live_fetcher(user_agent: Optional[str] = None, **_: Any) -> HttpFetcher:
    from .live_providers import LiveHttpFetcher, DEFAULT_USER_AGENT
    return LiveHttpFetcher(user_agent=user_agent or DEFAULT_USER_AGENT)


def _factory_fixture_extractor(**_: Any) -> TextExtractor:
    return FixtureTextExtractor()


def _factory_pdfplumber(**_: Any) -> TextExtractor:
    from .live_providers import PdfPlumberExtractor
    return PdfPlumberExtractor()


def _factory_command(command: Optional[List[str]] = None, **_: Any) -> TextExtractor:
    from .live_providers import CommandTextExtractor
    return CommandTextExtractor(command=command)


register_provider_factory("search", "fixture", _factory_fixture_search)
register_provider_factory("search", "live", _factory_live_search)
register_provider_factory("fetcher", "fixture", _factory_fixture_fetcher)
register_provider_factory("fetcher", "live", _factory_live_fetcher)
register_provider_factory("extractor", "fixture", _factory_fixture_extractor)
register_provider_factory("extractor", "pdfplumber", _factory_pdfplumber)
register_provider_factory("extractor", "command", _factory_command)


def _select(family: str, label: str, choice: str, **kwargs: Any) -> Any:
    """
    Shared selection logic: explicit fixture, auto chain, explicit live
    provider with fixture fallback, unknown name with fixture fallback.

    Raises:
        ProviderError: The fixture provider itself cannot be built
    """
    if choice == "auto":
        try:
            return get_auto_provider(family, **kwargs)
        except RuntimeError as e:
            raise ProviderError(str(e))

    if choice != "fixture":
        provider, error = try_provider(family, choice, **kwargs)
        if provider is not None:
            return provider
        if error and error.startswith("Provider factory not found"):
            warnings.warn(f"Unknown {label} value: '{choice}'. Falling back to fixture.", UserWarning)
        else:
            warnings.warn(f"Failed to initialize {family} provider '{choice}': {error}. "
                          f"Falling back to fixture.", UserWarning)

    provider, error = try_provider(family, "fixture", **kwargs)
    if provider is None:
        raise ProviderError(f"Cannot initialize fixture {family} provider: {error}")
    return provider


def get_search_backend(
    backend: Optional[str] = None,
    *,
    fixture_path: Optional[str] = None,
    endpoint: Optional[str] = None,
    api_key: Optional[str] = None,
    timeout_ms: int = 10000,
    max_retries: int = 3,
    queries_per_second: float = 3.0,
) -> SearchBackend:
    """
    Get the configured search backend with fallback to fixtures.

    Configuration:
        backend argument, else SEARCH_BACKEND environment variable:
        - "fixture" (default): replay fixture_path
        - "live": HTTPS search API (needs SEARCH_ENDPOINT and SEARCH_API_KEY)
        - "auto": live first, then fixture
        - Unknown values: fall back to fixture

    Raises:
        ProviderError: No usable backend (e.g. live failed and no fixture path)
    """
    choice = (backend or os.getenv("SEARCH_BACKEND") or "fixture").lower()
    return _select(
        "search", "SEARCH_BACKEND", choice,
        fixture_path=fixture_path,
        endpoint=endpoint or os.getenv("SEARCH_ENDPOINT"),
        api_key=api_key or os.getenv("SEARCH_API_KEY"),
        timeout_ms=timeout_ms,
        max_retries=max_retries,
        queries_per_second=queries_per_second,
    )


def get_fetcher(
    fetcher: Optional[str] = None,
    *,
    site_map: Optional[str] = None,
    site_dir: Optional[str] = None,
    user_agent: Optional[str] = None,
) -> HttpFetcher:
    """
    Get the configured HTTP fetcher.

    Configuration:
        fetcher argument, else FETCHER environment variable:
        - "fixture" (default): serve site_map (JSON) or site_dir (directory tree)
        - "live": requests-based fetcher
        - "auto": live first, then fixture
    """
    choice = (fetcher or os.getenv("FETCHER") or "fixture").lower()
    return _select("fetcher", "FETCHER", choice,
                   site_map=site_map, site_dir=site_dir, user_agent=user_agent)


def get_text_extractor(
    extractor: Optional[str] = None,
    *,
    command: Optional[List[str]] = None,
) -> TextExtractor:
    """
    Get the configured text extractor.

    Configuration:
        extractor argument, else TEXT_EXTRACTOR environment variable:
        - "fixture" (default): pre-extracted JSON documents
        - "pdfplumber": pdfplumber (optional dependency)
        - "command": external tool reading PDF on stdin (default pdftotext)
        - "auto": pdfplumber, then command, then fixture
    """
    choice = (extractor or os.getenv("TEXT_EXTRACTOR") or "fixture").lower()
    return _select("extractor", "TEXT_EXTRACTOR", choice, command=command)


__all__ = [
    "SearchBackend",
    "HttpFetcher",
    "TextExtractor",
    "ProviderError",
    "FixtureSearchBackend",
    "FixtureFetcher",
    "FixtureTextExtractor",
    "get_search_backend",
    "get_fetcher",
    "get_text_extractor",
]
