"""
Polite Depth-Limited Crawler
============================

Breadth-first crawl from seed URLs (predicted homepages) that harvests PDF
documents up to a fixed depth.

Rules:
- the seed is depth 0; pages at depth < max_depth are expanded, so no fetch
  goes deeper than max_depth
- HTML is only expanded inside the seed's registrable domain (default scope);
  off-domain links ending in .pdf are still fetched, other off-domain links
  are recorded as skipped_scope without a request
- robots.txt Disallow rules of the configured agent and "*" are honored
- requests to one host are serialized and spaced by per_host_delay_ms,
  measured on the fetcher's clock
- every touched URL yields exactly one FetchRecord; network errors are
  recorded, never raised

Each depth level is fetched by a bounded worker pool; records are committed
in frontier order so crawl output is deterministic.
"""

import hashlib
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Protocol, Sequence, Tuple
from urllib import robotparser
from urllib.parse import urljoin, urlsplit, urlunsplit

from bs4 import BeautifulSoup

from adapters.interfaces import (
    FetchError,
    FetchRequest,
    FetchResponse,
    HttpFetcher,
    ProviderTimeoutError,
)
from adapters.live_providers import DEFAULT_USER_AGENT
from validators.schema_validators import InvalidInputError, InvalidURLError

logger = logging.getLogger(__name__)

SCOPES = ("same_registrable_domain_html", "unrestricted")
FETCH_STATUSES = ("fetched_html", "fetched_pdf", "skipped_robots", "skipped_scope", "error")
HTML_TYPES = ("text/html", "application/xhtml+xml", "")
DEFAULT_PORTS = {"http": 80, "https": 443}
SECOND_LEVEL_LABELS = {"ac", "co", "com", "edu", "gov", "net", "org", "or", "ne", "go"}


# ==================== URLs ====================

def _remove_dot_segments(path: str) -> str:
    if not path:
        return "/"
    trailing = path.endswith(("/", "/.", "/.."))
    out: List[str] = []
    for segment in path.split("/"):
        if segment == "..":
            if out:
                out.pop()
        elif segment and segment != ".":
            out.append(segment)
    result = "/" + "/".join(out)
    if trailing and out:
        result += "/"
    return result


def canonicalize_url(url: str, base: Optional[str] = None) -> str:
    """
    Canonical absolute form of a URL.

    Lowercases scheme and host, strips default ports and fragments, resolves
    dot-segments and drops a trailing "index.html". Scheme-less host URLs
    ("john.blitzer.com") are read as http when no base is given.

    Raises:
        InvalidURLError: Not resolvable to an http(s) URL with a host
    """
    if not isinstance(url, str) or not url.strip():
        raise InvalidURLError(str(url), "empty url")
    candidate = url.strip()
    if base:
        candidate = urljoin(base, candidate)
    elif "://" not in candidate and not urlsplit(candidate).scheme:
        candidate = "http://" + candidate

    try:
        parts = urlsplit(candidate)
        host = parts.hostname
        port = parts.port
    except ValueError:
        raise InvalidURLError(url)
    scheme = parts.scheme.lower()
    if scheme not in DEFAULT_PORTS:
        raise InvalidURLError(url, f"unsupported scheme {scheme!r}")
    if not host:
        raise InvalidURLError(url, "url has no host")

    netloc = host.lower()
    if port is not None and port != DEFAULT_PORTS[scheme]:
        netloc = f"{netloc}:{port}"
    path = _remove_dot_segments(parts.path)
    if path.endswith("/index.html"):
        path = path[: -len("index.html")]
    return urlunsplit((scheme, netloc, path, parts.query, ""))


def registrable_domain(host: str) -> str:
    """
    Host suffix one label below the public suffix.

    Heuristic without a suffix list: two labels, or three when the second-level
    label is a common generic one under a two-letter country code (unsw.edu.au).
    """
    labels = [label for label in (host or "").lower().split(".") if label]
    if len(labels) <= 2:
        return ".".join(labels)
    if len(labels[-1]) == 2 and labels[-2] in SECOND_LEVEL_LABELS:
        return ".".join(labels[-3:])
    return ".".join(labels[-2:])


def _host(url: str) -> str:
    return (urlsplit(url).hostname or "").lower()


def is_pdf_url(url: str) -> bool:
    return urlsplit(url).path.lower().endswith(".pdf")


def extract_links(html: bytes, base: str) -> List[str]:
    """
    Canonical href targets of anchor elements, de-duplicated, document order.
    Malformed HTML is tolerated; unusable hrefs are skipped.
    """
    if not html:
        return []
    soup = BeautifulSoup(html, "html.parser")
    links: List[str] = []
    seen = set()
    for anchor in soup.find_all("a", href=True):
        href = anchor["href"].strip()
        if not href or href.startswith(("#", "mailto:", "javascript:", "tel:")):
            continue
        try:
            url = canonicalize_url(href, base=base)
        except InvalidURLError:
            continue
        if url not in seen:
            seen.add(url)
            links.append(url)
    return links


# ==================== Job & Records ====================

@dataclass
class CrawlJob:
    seeds: List[str]
    max_depth: int = 2
    scope: str = "same_registrable_domain_html"
    per_host_delay_ms: int = 1000
    max_pages: int = 500
    obey_robots: bool = True
    timeout: float = 10.0
    user_agent: str = DEFAULT_USER_AGENT
    workers: int = 4

    def __post_init__(self):
        if self.max_depth < 0:
            raise InvalidInputError("max_depth must be >= 0", stage="crawl")
        if self.per_host_delay_ms < 0:
            raise InvalidInputError("per_host_delay_ms must be >= 0", stage="crawl")
        if self.max_pages < 1:
            raise InvalidInputError("max_pages must be >= 1", stage="crawl")
        if self.scope not in SCOPES:
            raise InvalidInputError(f"scope must be one of {SCOPES}", stage="crawl")


@dataclass
class FetchRecord:
    url: str
    depth: int
    status: str
    http_status: Optional[int] = None
    content_hash: Optional[str] = None
    stored_path: Optional[str] = None
    seed: str = ""
    content_type: str = ""


@dataclass
class Frontier:
    """Current BFS level plus every canonical URL ever enqueued in the job."""
    queue: List[Tuple[str, int]] = field(default_factory=list)
    visited: set = field(default_factory=set)

    def push(self, url: str, depth: int) -> bool:
        if url in self.visited:
            return False
        self.visited.add(url)
        self.queue.append((url, depth))
        return True

    def take_level(self) -> List[Tuple[str, int]]:
        level, self.queue = self.queue, []
        return level


class BlobSink(Protocol):
    def write_blob(self, data: bytes) -> str:
        """Persist bytes; return the stored path."""
        ...


class MemoryBlobSink:
    """Keeps fetched PDF bytes in memory, keyed by sha256."""

    def __init__(self):
        self.blobs: Dict[str, bytes] = {}
        self._lock = threading.Lock()

    def write_blob(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        with self._lock:
            self.blobs.setdefault(digest, data)
        return f"memory://{digest}"

    def read_blob(self, digest: str) -> bytes:
        return self.blobs[digest]


# ==================== Politeness ====================

class RobotsRules:
    """Per-host robots.txt rules, fetched once per host through the throttle."""

    def __init__(self, fetcher: HttpFetcher, throttle: "PerHostThrottle", user_agent: str,
                 timeout: float):
        self.fetcher = fetcher
        self.throttle = throttle
        self.user_agent = user_agent
        self.timeout = timeout
        self._parsers: Dict[str, robotparser.RobotFileParser] = {}
        self._lock = threading.Lock()

    @staticmethod
    def parse(text: str) -> robotparser.RobotFileParser:
        parser = robotparser.RobotFileParser()
        parser.parse(text.splitlines())
        return parser

    def _load(self, url: str) -> robotparser.RobotFileParser:
        parts = urlsplit(url)
        robots_url = urlunsplit((parts.scheme, parts.netloc, "/robots.txt", "", ""))
        try:
            response = self.throttle.fetch(self.fetcher, FetchRequest(
                url=robots_url, timeout=self.timeout, user_agent=self.user_agent))
        except (FetchError, ProviderTimeoutError) as e:
            logger.debug("robots.txt unavailable for %s: %s", parts.netloc, e)
            return self.parse("")
        if response.status != 200:
            return self.parse("")
        return self.parse(response.body.decode("utf-8", "replace"))

    def allowed(self, url: str) -> bool:
        key = urlsplit(url).netloc
        with self._lock:
            parser = self._parsers.get(key)
            if parser is None:
                parser = self._load(url)
                self._parsers[key] = parser
        agent = self.user_agent.split("/")[0]
        return parser.can_fetch(agent, url)


class PerHostThrottle:
    """
    Serializes requests per host and keeps consecutive requests to one host
    at least delay_seconds apart on the fetcher's clock.
    """

    def __init__(self, delay_seconds: float):
        self.delay_seconds = delay_seconds
        self._host_locks: Dict[str, threading.Lock] = {}
        self._last_request: Dict[str, float] = {}
        self._guard = threading.Lock()

    def _lock_for(self, host: str) -> threading.Lock:
        with self._guard:
            return self._host_locks.setdefault(host, threading.Lock())

    def fetch(self, fetcher: HttpFetcher, request: FetchRequest) -> FetchResponse:
        host = _host(request.url)
        with self._lock_for(host):
            last = self._last_request.get(host)
            if last is not None:
                while True:
                    remaining = self.delay_seconds - (fetcher.clock() - last)
                    if remaining <= 0:
                        break
                    fetcher.sleep(remaining)
            try:
                return fetcher.fetch(request)
            finally:
                self._last_request[host] = fetcher.clock()


# ==================== Crawl ====================

def is_pdf_response(url: str, response: FetchResponse) -> bool:
    return response.content_type.split(";")[0].strip().lower() == "application/pdf" or is_pdf_url(url)


def _is_html_response(response: FetchResponse) -> bool:
    return response.content_type.split(";")[0].strip().lower() in HTML_TYPES


class _SeedCrawl:
    """One seed's level-synchronous BFS inside a job."""

    def __init__(self, job: CrawlJob, fetcher: HttpFetcher, sink: BlobSink,
                 throttle: PerHostThrottle, robots: Optional[RobotsRules],
                 frontier: Frontier, seed: str, pool: ThreadPoolExecutor):
        self.job = job
        self.fetcher = fetcher
        self.sink = sink
        self.throttle = throttle
        self.robots = robots
        self.frontier = frontier
        self.seed = seed
        self.seed_domain = registrable_domain(_host(seed))
        self.pool = pool
        self.fetches = 0

    def in_scope(self, url: str) -> bool:
        if self.job.scope == "unrestricted":
            return True
        return registrable_domain(_host(url)) == self.seed_domain

    def fetch_one(self, url: str, depth: int) -> Tuple[FetchRecord, List[str]]:
        record = FetchRecord(url=url, depth=depth, status="error", seed=self.seed)
        try:
            response = self.throttle.fetch(self.fetcher, FetchRequest(
                url=url, timeout=self.job.timeout, user_agent=self.job.user_agent))
        except (FetchError, ProviderTimeoutError) as e:
            logger.warning("Fetch failed for %s: %s", url, e)
            return record, []

        record.http_status = response.status
        record.content_type = response.content_type
        if not 200 <= response.status < 300:
            return record, []

        if is_pdf_response(url, response):
            if not response.body:
                logger.warning("Empty PDF body at %s", url)
                return record, []
            record.status = "fetched_pdf"
            record.content_hash = hashlib.sha256(response.body).hexdigest()
            record.stored_path = self.sink.write_blob(response.body)
            return record, []

        record.status = "fetched_html"
        expand = depth < self.job.max_depth and self.in_scope(url) and _is_html_response(response)
        return record, (extract_links(response.body, url) if expand else [])

    def run(self) -> List[FetchRecord]:
        records: List[FetchRecord] = []
        self.frontier.push(self.seed, 0)
        while self.frontier.queue:
            level = self.frontier.take_level()
            decisions: List[Tuple[str, int, Optional[FetchRecord]]] = []
            for url, depth in level:
                if not self.in_scope(url) and not is_pdf_url(url):
                    decisions.append((url, depth, FetchRecord(url, depth, "skipped_scope", seed=self.seed)))
                elif self.robots is not None and not self.robots.allowed(url):
                    decisions.append((url, depth, FetchRecord(url, depth, "skipped_robots", seed=self.seed)))
                elif self.fetches < self.job.max_pages:
                    self.fetches += 1
                    decisions.append((url, depth, None))

            to_fetch = [(url, depth) for url, depth, record in decisions if record is None]
            fetched = iter(self.pool.map(lambda item: self.fetch_one(*item), to_fetch))

            for url, depth, record in decisions:
                links: List[str] = []
                if record is None:
                    record, links = next(fetched)
                records.append(record)
                for link in links:
                    self.frontier.push(link, depth + 1)
        return records


def crawl(job: CrawlJob, fetcher: HttpFetcher, sink: Optional[BlobSink] = None,
          throttle: Optional[PerHostThrottle] = None,
          robots: Optional[RobotsRules] = None) -> List[FetchRecord]:
    """
    Crawl every seed breadth-first up to job.max_depth.

    Args:
        job: Seeds, depth, scope and politeness settings
        fetcher: HttpFetcher (live or fixture)
        sink: Where fetched PDF bytes go (default: in memory)
        throttle: Shared per-host throttle, so delays hold across jobs (default: one per call)
        robots: Shared robots.txt cache; ignored when job.obey_robots is false

    Returns:
        One FetchRecord per touched URL: seeds in order, BFS levels in order

    Raises:
        InvalidInputError: No seed is a valid URL
    """
    sink = sink if sink is not None else MemoryBlobSink()
    seeds: List[str] = []
    for seed in job.seeds:
        try:
            seeds.append(canonicalize_url(seed))
        except InvalidURLError as e:
            logger.warning("Skipping invalid seed %r: %s", seed, e)
    if not seeds:
        raise InvalidInputError("no valid seed URL in crawl job", stage="crawl")

    throttle = throttle if throttle is not None else PerHostThrottle(job.per_host_delay_ms / 1000.0)
    if not job.obey_robots:
        robots = None
    elif robots is None:
        robots = RobotsRules(fetcher, throttle, job.user_agent, job.timeout)
    frontier = Frontier()
    records: List[FetchRecord] = []
    with ThreadPoolExecutor(max_workers=max(1, job.workers)) as pool:
        for seed in seeds:
            if seed in frontier.visited:
                continue
            seed_records = _SeedCrawl(job, fetcher, sink, throttle, robots, frontier, seed, pool).run()
            logger.info("Crawled %s: %d records, %d PDFs", seed, len(seed_records),
                        sum(1 for r in seed_records if r.status == "fetched_pdf"))
            records.extend(seed_records)
    return records


__all__ = [
    "SCOPES",
    "FETCH_STATUSES",
    "canonicalize_url",
    "registrable_domain",
    "is_pdf_url",
    "is_pdf_response",
    "extract_links",
    "CrawlJob",
    "FetchRecord",
    "Frontier",
    "BlobSink",
    "MemoryBlobSink",
    "RobotsRules",
    "PerHostThrottle",
    "crawl",
]
