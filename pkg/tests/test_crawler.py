"""
Crawler Tests

URL canonicalization, link extraction and the depth-limited crawl over the
static mini-web in fixtures/site_map.json.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from adapters.fixture_providers import FixtureFetcher
from adapters.interfaces import FetchResponse
from crawler import (
    CrawlJob,
    MemoryBlobSink,
    PerHostThrottle,
    RobotsRules,
    canonicalize_url,
    crawl,
    extract_links,
    is_pdf_response,
    registrable_domain,
)
from validators.schema_validators import InvalidInputError, InvalidURLError

SEED = "http://www.x.edu/~nina/"


@pytest.fixture
def fetcher(fixtures_dir):
    return FixtureFetcher.from_site_map(os.path.join(fixtures_dir, "site_map.json"))


def _by_url(records):
    return {r.url: r for r in records}


# ==================== URLs ====================

def test_canonicalize_resolves_dot_segments():
    assert canonicalize_url("../a/b.pdf", base="http://x.edu/p/q/") == "http://x.edu/p/a/b.pdf"


def test_canonicalize_normalizes_case_port_and_fragment():
    assert canonicalize_url("HTTP://X.EDU:80/#top") == "http://x.edu/"


def test_canonicalize_keeps_non_default_port_and_drops_index():
    assert canonicalize_url("https://Host.org:8443/dir/index.html") == "https://host.org:8443/dir/"


def test_canonicalize_scheme_less_host():
    assert canonicalize_url("john.blitzer.com") == "http://john.blitzer.com/"


@pytest.mark.parametrize("url", ["notaurl::", "", "ftp://x.edu/file", "http:///"])
def test_canonicalize_rejects_malformed(url):
    with pytest.raises(InvalidURLError):
        canonicalize_url(url)


@pytest.mark.parametrize("host, expected", [
    ("www.cse.iitb.ac.in", "iitb.ac.in"),
    ("people.csail.mit.edu", "mit.edu"),
    ("www.cse.unsw.edu.au", "unsw.edu.au"),
    ("john.blitzer.com", "blitzer.com"),
    ("localhost", "localhost"),
])
def test_registrable_domain(host, expected):
    assert registrable_domain(host) == expected


def test_is_pdf_response_by_type_or_extension():
    assert is_pdf_response("http://x.edu/paper", FetchResponse("http://x.edu/paper", 200, "application/pdf"))
    assert is_pdf_response("http://x.edu/p.PDF", FetchResponse("http://x.edu/p.PDF", 200, "text/plain"))
    assert not is_pdf_response("http://x.edu/p.html", FetchResponse("http://x.edu/p.html", 200, "text/html"))


# ==================== Links ====================

def test_extract_links_in_order():
    html = b'<a href="a.html">A</a><a href="b.html">B</a><a href="/c.pdf">C</a>'
    assert extract_links(html, "http://x.edu/dir/") == [
        "http://x.edu/dir/a.html", "http://x.edu/dir/b.html", "http://x.edu/c.pdf"]


def test_extract_links_deduplicates():
    html = b'<a href="a.html">A</a><a href="./a.html#x">again</a><a href="a.html">third</a>'
    assert extract_links(html, "http://x.edu/") == ["http://x.edu/a.html"]


def test_extract_links_no_anchors_and_skipped_schemes():
    assert extract_links(b"<p>nothing</p>", "http://x.edu/") == []
    assert extract_links(b'<a href="mailto:a@x.edu">m</a><a href="javascript:void(0)">j</a>',
                         "http://x.edu/") == []


def test_extract_links_tolerates_malformed_html():
    html = b'<html><body><a href="a.html">A<div><a href="b.html">B</body>'
    assert extract_links(html, "http://x.edu/") == ["http://x.edu/a.html", "http://x.edu/b.html"]


# ==================== Crawl ====================

def test_crawl_depth_two_fetches_reachable_set(fetcher):
    records = crawl(CrawlJob(seeds=[SEED], max_depth=2, workers=2), fetcher)
    by_url = _by_url(records)
    fetched = {r.url for r in records if r.status in ("fetched_html", "fetched_pdf")}

    assert fetched == {
        SEED,
        "http://www.x.edu/~nina/a.html",
        "http://www.x.edu/~nina/b.html",
        "http://www.x.edu/~nina/c.html",
        "http://www.x.edu/~nina/papers/p1.pdf",
        "http://mirror.example.org/p2.pdf",
    }
    assert "http://www.x.edu/~nina/d.html" not in by_url, "depth-3 page must never be touched"
    assert "http://www.x.edu/~nina/papers/deep.pdf" not in by_url
    assert max(r.depth for r in records) <= 2


def test_crawl_records_statuses(fetcher):
    by_url = _by_url(crawl(CrawlJob(seeds=[SEED]), fetcher))

    assert by_url[SEED].depth == 0
    assert by_url["http://mirror.example.org/p2.pdf"].status == "fetched_pdf"
    assert by_url["http://scholar.example.com/nina"].status == "skipped_scope"
    assert by_url["http://www.x.edu/~nina/private/secret.html"].status == "skipped_robots"
    missing = by_url["http://www.x.edu/~nina/missing.pdf"]
    assert missing.status == "error"
    assert missing.http_status == 404


def test_crawl_order_is_bfs_and_deterministic(fetcher, fixtures_dir):
    first = [(r.url, r.depth, r.status) for r in crawl(CrawlJob(seeds=[SEED], workers=4), fetcher)]
    again = FixtureFetcher.from_site_map(os.path.join(fixtures_dir, "site_map.json"))
    second = [(r.url, r.depth, r.status) for r in crawl(CrawlJob(seeds=[SEED], workers=1), again)]

    assert first == second
    depths = [depth for _, depth, _ in first]
    assert depths == sorted(depths)


def test_crawl_visits_each_url_once(fetcher):
    records = crawl(CrawlJob(seeds=[SEED, SEED + "a.html"], max_depth=2), fetcher)
    urls = [r.url for r in records]
    assert len(urls) == len(set(urls))
    fetched_urls = [url for url, _ in fetcher.request_log if not url.endswith("/robots.txt")]
    assert len(fetched_urls) == len(set(fetched_urls))


def test_crawl_deeper_job_reaches_depth_three(fetcher):
    by_url = _by_url(crawl(CrawlJob(seeds=[SEED], max_depth=3), fetcher))
    assert by_url["http://www.x.edu/~nina/d.html"].depth == 3
    assert by_url["http://www.x.edu/~nina/papers/deep.pdf"].status == "fetched_pdf"


def test_crawl_depth_zero_fetches_only_seed(fetcher):
    records = crawl(CrawlJob(seeds=[SEED], max_depth=0), fetcher)
    assert [(r.url, r.status) for r in records] == [(SEED, "fetched_html")]


def test_crawl_unrestricted_scope_fetches_off_domain_html(fetcher):
    by_url = _by_url(crawl(CrawlJob(seeds=[SEED], scope="unrestricted"), fetcher))
    assert by_url["http://scholar.example.com/nina"].status == "fetched_html"


def test_crawl_without_robots_fetches_private(fetcher):
    by_url = _by_url(crawl(CrawlJob(seeds=[SEED], obey_robots=False), fetcher))
    assert by_url["http://www.x.edu/~nina/private/secret.html"].status == "fetched_html"


def test_crawl_max_pages_caps_fetches(fetcher):
    records = crawl(CrawlJob(seeds=[SEED], max_pages=3), fetcher)
    assert sum(1 for r in records if r.status.startswith("fetched") or r.status == "error") == 3


def test_crawl_politeness_per_host(fetcher):
    crawl(CrawlJob(seeds=[SEED], per_host_delay_ms=1000, workers=4), fetcher)
    for host, stamps in fetcher.timestamps_by_host().items():
        gaps = [b - a for a, b in zip(stamps, stamps[1:])]
        assert all(gap >= 1.0 - 1e-9 for gap in gaps), f"{host} requests closer than 1s: {stamps}"


def test_shared_throttle_keeps_delay_across_jobs(fetcher):
    job = CrawlJob(seeds=[SEED], per_host_delay_ms=1000, workers=2)
    throttle = PerHostThrottle(1.0)
    robots = RobotsRules(fetcher, throttle, job.user_agent, job.timeout)
    crawl(job, fetcher, throttle=throttle, robots=robots)
    crawl(job, fetcher, throttle=throttle, robots=robots)

    for host, stamps in fetcher.timestamps_by_host().items():
        gaps = [b - a for a, b in zip(stamps, stamps[1:])]
        assert all(gap >= 1.0 - 1e-9 for gap in gaps), f"{host} requests closer than 1s across jobs: {stamps}"
    robots_fetches = [url for url, _ in fetcher.request_log if url.endswith("/robots.txt")]
    assert len(robots_fetches) == len(set(robots_fetches)), f"robots.txt refetched: {robots_fetches}"


def test_crawl_stores_pdf_bytes_in_sink(fetcher):
    sink = MemoryBlobSink()
    records = crawl(CrawlJob(seeds=[SEED]), fetcher, sink=sink)
    pdfs = [r for r in records if r.status == "fetched_pdf"]
    assert len(pdfs) == 2
    for record in pdfs:
        assert record.stored_path == f"memory://{record.content_hash}"
        assert sink.read_blob(record.content_hash).startswith(b"{")


def test_crawl_connection_errors_are_recorded():
    fetcher = FixtureFetcher(pages={
        "http://y.edu/": {"content_type": "text/html", "body": '<a href="down.html">x</a>'},
        "http://y.edu/down.html": {"error": True},
    })
    by_url = _by_url(crawl(CrawlJob(seeds=["http://y.edu/"]), fetcher))
    assert by_url["http://y.edu/down.html"].status == "error"
    assert by_url["http://y.edu/down.html"].http_status is None


def test_crawl_all_seeds_invalid():
    with pytest.raises(InvalidInputError):
        crawl(CrawlJob(seeds=["notaurl::", ""]), FixtureFetcher())


def test_crawl_job_validation():
    with pytest.raises(InvalidInputError):
        CrawlJob(seeds=[SEED], max_depth=-1)
    with pytest.raises(InvalidInputError):
        CrawlJob(seeds=[SEED], scope="everything")
