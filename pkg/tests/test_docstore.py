"""
Document Store Tests

Content addressing, provenance merging, ledger replay, title counting,
target matching and report export.
"""

import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from doc_model import NormalizedDocument, TitleRecord, load_document_json
from docstore import (
    PATH1,
    PATH2,
    DocumentMetadata,
    DocumentRecord,
    DocumentStore,
    LogicalClock,
    Target,
    compute_manifest,
    count_unique_titles,
    export_report,
    load_targets,
    match_against_targets,
    top_level_domain,
)
from validators.schema_validators import DataParseError, InvalidInputError, InvariantViolationError


def _meta(path=PATH1, origin="title-q1", url="http://a.edu/p.pdf", label="paper", title=None, **kwargs):
    return DocumentMetadata(acquisition_path=path, origin=origin, source_url=url, classifier_label=label,
                            extracted_title=TitleRecord.from_raw(title) if title else None, **kwargs)


def _record(title, label="paper"):
    return DocumentRecord(content_hash=hashlib.sha256(title.encode()).hexdigest(), source_url="http://a.edu/",
                          acquisition_path=PATH1, origin="q", classifier_label=label, classifier_score=None,
                          extracted_title=TitleRecord.from_raw(title), matched_target=None, stored_at="")


@pytest.fixture
def store(tmp_path):
    return DocumentStore(str(tmp_path / "store"), clock=LogicalClock())


# ==================== Put ====================

def test_put_is_content_addressed(store):
    data = b"%PDF-1.4 paper bytes"
    record = store.put(data, _meta())
    assert record.content_hash == hashlib.sha256(data).hexdigest()
    assert store.read_blob(record.content_hash) == data
    assert record.stored_path.startswith("blobs")


def test_put_same_bytes_merges_provenance(store):
    data = b"%PDF-1.4 shared"
    store.put(data, _meta(path=PATH2, origin="http://www.x.edu/~nina/", url="http://www.x.edu/~nina/p.pdf",
                          depth=1))
    record = store.put(data, _meta(origin="title-q1", url="http://mirror.org/p.pdf"))

    assert len(store) == 1
    assert [p.acquisition_path for p in record.provenance] == [PATH1, PATH2]
    assert record.acquisition_path == PATH1


def test_put_identical_acquisition_twice_is_idempotent(store):
    data = b"%PDF-1.4 once"
    store.put(data, _meta())
    store.put(data, _meta())
    with open(store.ledger_path, encoding="utf-8") as f:
        assert len(f.readlines()) == 1
    assert len(store.get(hashlib.sha256(data).hexdigest()).provenance) == 1


def test_put_later_classification_fills_unclassified(store):
    data = b"%PDF-1.4 later"
    store.put(data, _meta(label="unclassified"))
    record = store.put(data, _meta(origin="title-q2", label="paper", title="A Study"))
    assert record.classifier_label == "paper"
    assert record.extracted_title.normalized == "a study"


def test_put_rejects_empty_bytes(store):
    with pytest.raises(InvalidInputError):
        store.put(b"", _meta())


@pytest.mark.parametrize("kwargs", [{"path": "path3"}, {"label": "maybe"}])
def test_metadata_validation(kwargs):
    with pytest.raises(InvalidInputError):
        _meta(**kwargs)


def test_metadata_rejects_score_outside_unit_interval():
    with pytest.raises(InvalidInputError):
        _meta(classifier_score=1.5)


def test_concurrent_puts_of_same_bytes(store):
    data = b"%PDF-1.4 contended"
    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(lambda i: store.put(data, _meta(origin=f"q{i}")), range(16)))
    assert len(store) == 1
    assert len(store.records()[0].provenance) == 16


def test_logical_clock_ticks():
    clock = LogicalClock()
    assert clock() == "1970-01-01T00:00:01+00:00"
    assert clock() == "1970-01-01T00:00:02+00:00"


# ==================== Ledger ====================

def test_reopened_store_replays_ledger(tmp_path):
    root = str(tmp_path / "store")
    first = DocumentStore(root, clock=LogicalClock())
    first.put(b"%PDF a", _meta(title="A Study"))
    first.put(b"%PDF a", _meta(path=PATH2, origin="http://x.edu/", url="http://x.edu/a.pdf"))
    first.log_query(PATH1, "title-q1", '"A Study" filetype:pdf', n_results=1)

    reopened = DocumentStore(root, clock=LogicalClock())
    assert len(reopened) == 1
    assert reopened.records()[0].to_dict() == first.records()[0].to_dict()
    assert reopened.manifest().to_dict() == first.manifest().to_dict()


def test_rebuild_manifest_matches_live_manifest(store):
    store.put(b"%PDF a", _meta(title="A Study"))
    store.put(b"%PDF b", _meta(path=PATH2, origin="http://x.edu/", url="http://x.edu/b.pdf", title="Other"))
    store.log_query(PATH1, "title-q1", '"A Study" filetype:pdf')
    assert store.rebuild_manifest().to_dict() == store.manifest().to_dict()


def test_corrupt_ledger_line_is_reported(tmp_path):
    root = tmp_path / "store"
    root.mkdir()
    (root / "ledger.jsonl").write_text("{not json\n", encoding="utf-8")
    with pytest.raises(DataParseError):
        DocumentStore(str(root))


# ==================== Accounting ====================

def test_unique_titles_normalize_case_and_punctuation():
    records = [_record("A Study"), _record("a study."), _record("Other")]
    assert count_unique_titles(records) == 2


def test_unique_titles_ignore_hyphenation():
    records = [_record("Multi-Agent Planning"), _record("Multiagent planning")]
    assert count_unique_titles(records) == 1, "hyphenation variants are one title"


def test_non_papers_do_not_count_as_titles():
    assert count_unique_titles([_record("A Study", label="non_paper")]) == 0


def test_manifest_counts_and_inclusion_exclusion(store):
    store.put(b"%PDF shared", _meta(title="Shared Paper"))
    store.put(b"%PDF shared", _meta(path=PATH2, origin="http://x.edu/", url="http://x.edu/s.pdf"))
    store.put(b"%PDF only1", _meta(origin="title-q2", url="http://b.org/o.pdf", title="Only One"))
    store.put(b"%PDF slides", _meta(path=PATH2, origin="http://x.edu/", url="http://x.edu/t.pdf",
                                    label="non_paper", title="Talk"))
    store.log_query(PATH1, "title-q1", "q1")
    store.log_query(PATH1, "title-q2", "q2")

    manifest = store.manifest()
    path1, path2 = manifest.paths[PATH1], manifest.paths[PATH2]
    assert (path1.queries_issued, path1.pdfs_fetched, path1.papers_classified, path1.unique_titles) == (2, 2, 2, 2)
    assert (path2.pdfs_fetched, path2.papers_classified, path2.unique_titles) == (2, 1, 1)
    assert manifest.overlap == 1
    assert manifest.union_unique_titles == path1.unique_titles + path2.unique_titles - manifest.overlap
    assert path1.domain_histogram == {"edu": 1, "org": 1}
    manifest.check_invariants()


def test_manifest_invariant_violation_detected(store):
    store.put(b"%PDF x", _meta(title="A Study"))
    manifest = store.manifest()
    manifest.paths[PATH1].papers_classified = 5
    with pytest.raises(InvariantViolationError):
        manifest.check_invariants()


@pytest.mark.parametrize("url, tld", [("http://www.cse.iitb.ac.in/x.pdf", "in"),
                                      ("https://arxiv.org/pdf/1", "org"), ("not a url", "")])
def test_top_level_domain(url, tld):
    assert top_level_domain(url) == tld


# ==================== Targets ====================

def test_load_targets(fixtures_dir):
    targets = load_targets(os.path.join(fixtures_dir, "targets.jsonl"))
    assert [t.id for t in targets] == ["t001", "t002", "t003"]
    assert targets[0].authors == ("Nina Narodytska", "Nikolaj Bjorner")


def test_load_targets_rejects_missing_authors(tmp_path):
    path = tmp_path / "targets.jsonl"
    path.write_text(json.dumps({"id": "t1", "title": "A Title"}) + "\n", encoding="utf-8")
    with pytest.raises(DataParseError):
        load_targets(str(path))


def test_match_against_targets(fixtures_dir):
    targets = load_targets(os.path.join(fixtures_dir, "targets.jsonl"))
    maxsat = load_document_json(os.path.join(fixtures_dir, "maxsat_paper.json"))
    two_line = load_document_json(os.path.join(fixtures_dir, "two_line_title.json"))
    slides = load_document_json(os.path.join(fixtures_dir, "slides.json"))

    report = match_against_targets([("h1", maxsat), ("h2", two_line), ("h3", slides), ("h4", maxsat)], targets)
    assert report.count == 2
    assert report.hits == {"t001": ["h1", "h4"], "t002": ["h2"], "t003": []}
    assert "h3" not in report.assignment


def test_match_against_targets_rejects_empty_title():
    doc = NormalizedDocument("d", 1, (("A title",),))
    with pytest.raises(InvalidInputError):
        match_against_targets([("h", doc)], [Target(id="t", title="  ", authors=("A",))])


def test_recovered_fraction_counts_distinct_targets():
    a = _record("A Study")
    a.matched_target = "t1"
    b = _record("A Study again")
    b.matched_target = "t1"
    manifest = compute_manifest([a, b], targets=[Target("t1", "A Study", ()), Target("t2", "B", ())])
    assert manifest.targets_recovered == 1
    assert manifest.recovered_fraction == 0.5


# ==================== Reports ====================

def test_export_report_writes_tsv_and_json(tmp_path, store):
    store.put(b"%PDF x", _meta(title="A Study"))
    store.log_query(PATH1, "title-q1", "q1")
    written = export_report(store.manifest(), str(tmp_path / "out" / "yield"))

    assert [os.path.basename(p) for p in written] == ["yield.tsv", "yield.json"]
    with open(written[0], encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines[0].split("\t") == ["path", "queries", "pdfs", "papers", "unique_titles", "matches"]
    assert lines[1].split("\t") == [PATH1, "1", "1", "1", "1", "0"]
    with open(written[1], encoding="utf-8") as f:
        payload = json.load(f)
    assert payload["combined"]["union_unique_titles"] == 1
    assert payload["domain_histogram"] == {"edu": 1}
