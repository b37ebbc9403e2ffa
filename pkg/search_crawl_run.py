"""
Search & Crawl Run
==================

Runs the two acquisition paths against one document store.

Flow:
1. Path 1: title → title query → search → fetch result PDFs → classify → store
2. Path 2: name → author query → search → rank results → crawl the predicted
   homepage to depth 2 → classify fetched PDFs → store

Output:
- a DocumentStore (blobs, ledger.jsonl, queries.jsonl)
- a Manifest with per-path counters
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from adapters import get_fetcher, get_search_backend, get_text_extractor
from adapters.interfaces import (
    FetchError,
    FetchRequest,
    HttpFetcher,
    ProviderError,
    SearchBackend,
    TextExtractor,
)
from crawler import CrawlJob, FetchRecord, PerHostThrottle, RobotsRules, canonicalize_url, crawl, is_pdf_response
from doc_model import (
    TitleRecord,
    extract_structural_features,
    extract_title_heuristic,
    ingest_document,
)
from docstore import (
    PATH1,
    PATH2,
    DocumentMetadata,
    DocumentRecord,
    DocumentStore,
    LogicalClock,
    Manifest,
    PathCounters,
    Target,
    first_matching_target,
    load_targets,
)
from forest import PAPER, RandomForestModel, load_forest, predict
from homepage_features import Dictionaries, vectorize_page
from ltr_models import Ranker, load_ranker, predict_homepage
from pipeline_config import PipelineConfig, require_paths
from search_gateway import Query, ResultPage, build_author_query, build_title_query, execute_many
from validators.schema_validators import (
    InvalidInputError,
    InvalidURLError,
    NoTitleError,
    UnparseableDocumentError,
)

logger = logging.getLogger(__name__)

UNCLASSIFIED = "unclassified"


@dataclass
class Harvester:
    """Providers, models and the store one run works with."""
    backend: SearchBackend
    fetcher: HttpFetcher
    store: DocumentStore
    classifier: RandomForestModel
    extractor: Optional[TextExtractor] = None
    targets: List[Target] = field(default_factory=list)
    ranker: Optional[Ranker] = None
    dictionaries: Optional[Dictionaries] = None
    throttle: Optional[PerHostThrottle] = None     # shared by both paths
    robots: Optional[RobotsRules] = None


@dataclass
class Classification:
    label: str
    score: Optional[float] = None
    title: Optional[TitleRecord] = None
    matched_target: Optional[str] = None


@dataclass
class PathRun:
    path: str
    counters: PathCounters
    manifest: Manifest
    skipped: Dict[str, str] = field(default_factory=dict)        # query id -> reason
    homepages: Dict[str, str] = field(default_factory=dict)      # query id -> predicted seed
    crawl_records: List[FetchRecord] = field(default_factory=list)


# ==================== Setup ====================

def open_store(config: PipelineConfig, targets: Sequence[Target] = ()) -> DocumentStore:
    clock = LogicalClock() if config.store.logical_clock else None
    return DocumentStore(config.store.root, clock=clock, targets=targets)


def build_harvester(config: PipelineConfig, need_ranker: bool = False) -> Harvester:
    """
    Build providers and load models for a run.

    Raises:
        InvalidInputError: A model file is missing or malformed
        ProviderError: A provider cannot be built
    """
    require_paths(classifier_path=config.models.classifier_path)
    ranker, dictionaries = None, None
    if need_ranker:
        require_paths(ranker_path=config.models.ranker_path)
        ranker, dictionaries = load_ranker(config.models.ranker_path)

    targets: List[Target] = []
    if config.fixtures.targets and os.path.exists(config.fixtures.targets):
        targets = load_targets(config.fixtures.targets)

    backend = get_search_backend(
        config.search.backend,
        fixture_path=config.search.fixture_path,
        endpoint=config.search.endpoint,
        api_key=config.search.api_key,
        timeout_ms=config.search.timeout_ms,
        max_retries=config.search.max_retries,
        queries_per_second=config.search.queries_per_second,
    )
    fetcher = get_fetcher(config.crawl.fetcher, site_map=config.crawl.site_map,
                          site_dir=config.crawl.site_dir, user_agent=config.crawl.user_agent)
    extractor = get_text_extractor(config.models.extractor)
    throttle = PerHostThrottle(config.crawl.per_host_delay_ms / 1000.0)
    robots = RobotsRules(fetcher, throttle, config.crawl.user_agent, config.crawl.timeout_ms / 1000.0)
    return Harvester(
        backend=backend,
        fetcher=fetcher,
        store=open_store(config, targets),
        classifier=load_forest(config.models.classifier_path),
        extractor=extractor,
        targets=targets,
        ranker=ranker,
        dictionaries=dictionaries,
        throttle=throttle,
        robots=robots,
    )


def read_lines(path: str) -> List[str]:
    """Non-blank lines of a titles/names file."""
    with open(path, "r", encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]


# ==================== Classification ====================

def classify_document(data: bytes, classifier: RandomForestModel, targets: Sequence[Target] = (),
                      extractor: Optional[TextExtractor] = None,
                      doc_id: Optional[str] = None) -> Classification:
    """
    Ingest, classify, and for papers extract the title and the first matching target.

    Unparseable documents come back unclassified instead of raising.
    """
    try:
        doc = ingest_document(data, extractor=extractor, doc_id=doc_id)
    except UnparseableDocumentError as e:
        logger.warning("Unparseable document: %s", e.message)
        return Classification(label=UNCLASSIFIED)

    label, score = predict(classifier, extract_structural_features(doc))
    if label != PAPER:
        return Classification(label=label, score=score)
    try:
        title: Optional[TitleRecord] = extract_title_heuristic(doc)
    except NoTitleError:
        title = None
    return Classification(label=label, score=score, title=title,
                          matched_target=first_matching_target(doc, targets))


def store_document(harvester: Harvester, data: bytes, acquisition_path: str, origin: str,
                   source_url: str, query_id: str = "", depth: Optional[int] = None) -> DocumentRecord:
    result = classify_document(data, harvester.classifier, harvester.targets, harvester.extractor)
    metadata = DocumentMetadata(
        acquisition_path=acquisition_path,
        origin=origin,
        source_url=source_url,
        query_id=query_id,
        depth=depth,
        classifier_label=result.label,
        classifier_score=result.score,
        extracted_title=result.title,
        matched_target=result.matched_target,
    )
    return harvester.store.put(data, metadata)


# ==================== Helpers ====================

def is_excluded(url: str, exclude_domains: Sequence[str]) -> bool:
    """True when the URL's host is an excluded domain or one of its subdomains."""
    host = url.split("://", 1)[-1].split("/", 1)[0].split(":")[0].lower()
    return any(host == d.lower() or host.endswith("." + d.lower()) for d in exclude_domains)


def _build_queries(texts: Sequence[str], kind: str, top_k: int) -> List[Query]:
    build = build_title_query if kind == "title" else build_author_query
    queries: List[Query] = []
    for text in texts:
        try:
            queries.append(build(text, top_k=top_k))
        except InvalidInputError as e:
            logger.warning("Skipping %s %r: %s", kind, text, e.message)
    return queries


def _fetch_pdf(fetcher: HttpFetcher, throttle: PerHostThrottle, url: str,
               config: PipelineConfig) -> Optional[bytes]:
    request = FetchRequest(url=url, timeout=config.crawl.timeout_ms / 1000.0,
                           user_agent=config.crawl.user_agent)
    try:
        response = throttle.fetch(fetcher, request)
    except (FetchError, ProviderError) as e:
        logger.warning("Fetch failed for %s: %s", url, e)
        return None
    if not 200 <= response.status < 300:
        logger.info("HTTP %d for %s", response.status, url)
        return None
    if not is_pdf_response(url, response) or not response.body:
        logger.debug("Not a PDF: %s (%s)", url, response.content_type)
        return None
    return response.body


def _failed(harvester: Harvester, path: str, query: Query, page: Exception, run: PathRun) -> None:
    reason = f"{type(page).__name__}: {page}"
    harvester.store.log_query(path, query.id, query.rendered, status="failed", reason=reason)
    run.skipped[query.id] = reason


def _finish(harvester: Harvester, run: PathRun) -> PathRun:
    run.manifest = harvester.store.manifest()
    run.counters = run.manifest.paths[run.path]
    return run


# ==================== Path 1 ====================

def run_path1(titles: Sequence[str], config: PipelineConfig,
              harvester: Optional[Harvester] = None) -> PathRun:
    """
    Search each title and store the PDFs among its top-k results.

    Results on config.pipeline.exclude_domains are skipped. Per-title failures
    are logged and recorded; the batch continues.
    """
    harvester = harvester or build_harvester(config)
    run = PathRun(path=PATH1, counters=PathCounters(), manifest=Manifest())
    queries = _build_queries(titles, "title", config.search.top_k)
    pages = execute_many(queries, harvester.backend, max_workers=config.search.workers)
    throttle = harvester.throttle or PerHostThrottle(config.crawl.per_host_delay_ms / 1000.0)

    with ThreadPoolExecutor(max_workers=max(1, config.pipeline.workers)) as pool:
        for query, page in zip(queries, pages):
            if isinstance(page, Exception):
                _failed(harvester, PATH1, query, page, run)
                continue
            harvester.store.log_query(PATH1, query.id, query.rendered, n_results=len(page.results))

            urls: List[str] = []
            for result in page.results:
                try:
                    url = canonicalize_url(result.url)
                except InvalidURLError as e:
                    logger.warning("Skipping result %s: %s", result.url, e.message)
                    continue
                if is_excluded(url, config.pipeline.exclude_domains):
                    logger.debug("Excluded result %s", url)
                    continue
                if url not in urls:
                    urls.append(url)

            bodies = list(pool.map(lambda u: _fetch_pdf(harvester.fetcher, throttle, u, config), urls))
            for url, data in zip(urls, bodies):
                if data:
                    store_document(harvester, data, PATH1, origin=query.id, source_url=url,
                                   query_id=query.id)
    return _finish(harvester, run)


# ==================== Path 2 ====================

def predict_seed(page: ResultPage, harvester: Harvester) -> str:
    """
    Canonical URL of the result the ranker puts first.

    Raises:
        InvalidInputError: No ranker loaded, or an empty page
        InvalidURLError: Predicted URL cannot be crawled
    """
    if harvester.ranker is None or harvester.dictionaries is None:
        raise InvalidInputError("Path 2 needs a trained ranker", stage="ranking")
    instances = vectorize_page(page, harvester.dictionaries)
    return canonicalize_url(predict_homepage(page, instances, harvester.ranker).url)


def run_path2(names: Sequence[str], config: PipelineConfig,
              harvester: Optional[Harvester] = None) -> PathRun:
    """
    Search each name, crawl the predicted homepage and store the PDFs found.

    Zero-result queries are recorded with a reason and skipped.
    """
    harvester = harvester or build_harvester(config, need_ranker=True)
    run = PathRun(path=PATH2, counters=PathCounters(), manifest=Manifest())
    queries = _build_queries(names, "author", config.search.top_k)
    pages = execute_many(queries, harvester.backend, max_workers=config.search.workers)

    for query, page in zip(queries, pages):
        if isinstance(page, Exception):
            _failed(harvester, PATH2, query, page, run)
            continue
        if not page.results:
            harvester.store.log_query(PATH2, query.id, query.rendered, status="skipped", reason="no results")
            run.skipped[query.id] = "no results"
            logger.info("No results for %s; skipped", query.raw_text)
            continue
        harvester.store.log_query(PATH2, query.id, query.rendered, n_results=len(page.results))

        try:
            seed = predict_seed(page, harvester)
        except InvalidURLError as e:
            run.skipped[query.id] = e.message
            logger.warning("Predicted homepage for %s is not crawlable: %s", query.raw_text, e.message)
            continue
        run.homepages[query.id] = seed

        job = CrawlJob(
            seeds=[seed],
            max_depth=config.crawl.max_depth,
            scope=config.crawl.scope,
            per_host_delay_ms=config.crawl.per_host_delay_ms,
            max_pages=config.crawl.max_pages,
            obey_robots=config.crawl.obey_robots,
            timeout=config.crawl.timeout_ms / 1000.0,
            user_agent=config.crawl.user_agent,
            workers=config.crawl.workers,
        )
        records = crawl(job, harvester.fetcher, sink=harvester.store,
                        throttle=harvester.throttle, robots=harvester.robots)
        run.crawl_records.extend(records)
        for record in records:
            if record.status != "fetched_pdf":
                continue
            data = harvester.store.read_blob(record.content_hash)
            store_document(harvester, data, PATH2, origin=seed, source_url=record.url,
                           query_id=query.id, depth=record.depth)
    return _finish(harvester, run)


# ==================== Both Paths ====================

def print_counters(label: str, counters: PathCounters) -> None:
    print(f"  {label}: {counters.queries_issued} queries, {counters.pdfs_fetched} PDFs "
          f"({counters.pdfs_unique} unique), {counters.papers_classified} papers, "
          f"{counters.unique_titles} unique titles, {counters.target_matches} matches")


def run_harvest(config: PipelineConfig, titles: Sequence[str], names: Sequence[str]) -> Manifest:
    """Run Path 1 then Path 2 into one store and print the summary."""
    print("=" * 60)
    print("Search & Crawl Run")
    print("=" * 60)
    print()

    harvester = build_harvester(config, need_ranker=bool(names))

    print(f"[Path 1] Searching {len(titles)} titles...")
    path1 = run_path1(titles, config, harvester)
    print(f"✓ Path 1 Complete: {path1.counters.papers_classified} papers from "
          f"{path1.counters.queries_issued} queries")
    print()

    print(f"[Path 2] Searching {len(names)} names and crawling homepages...")
    path2 = run_path2(names, config, harvester)
    print(f"✓ Path 2 Complete: {path2.counters.papers_classified} papers from "
          f"{len(path2.homepages)} homepages")
    print()

    manifest = harvester.store.manifest()
    manifest.check_invariants()
    print("=" * 60)
    print("Summary")
    print("=" * 60)
    print_counters("Path 1", manifest.paths[PATH1])
    print_counters("Path 2", manifest.paths[PATH2])
    print(f"  Union unique titles: {manifest.union_unique_titles} (overlap {manifest.overlap})")
    print(f"  Targets recovered: {manifest.targets_recovered}/{manifest.targets_total}")
    print()
    return manifest


__all__ = [
    "Harvester",
    "Classification",
    "PathRun",
    "open_store",
    "build_harvester",
    "read_lines",
    "classify_document",
    "store_document",
    "is_excluded",
    "predict_seed",
    "run_path1",
    "run_path2",
    "run_harvest",
]
