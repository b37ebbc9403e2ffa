"""
Document Store
==============

Content-addressed persistence of harvested documents with provenance,
target-title matching and yield accounting.

Layout under the store root:
    blobs/<h[0:2]>/<h[2:4]>/<sha256>   raw document bytes
    ledger.jsonl                        one JSON object per put (full record snapshot)
    queries.jsonl                       one JSON object per issued query

The ledger is append-only; the last line for a content hash is that
record's current state, so the whole store is reconstructible from it.
"""

import hashlib
import json
import logging
import os
import tempfile
import threading
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple
from urllib.parse import urlsplit

from doc_model import NormalizedDocument, TitleRecord, match_title, normalize_title
from validators.schema_validators import (
    DataParseError,
    InvalidInputError,
    InvariantViolationError,
    validate_target,
)

logger = logging.getLogger(__name__)

PATH1 = "path1_search"
PATH2 = "path2_crawl"
ACQUISITION_PATHS = (PATH1, PATH2)
CLASSIFIER_LABELS = ("paper", "non_paper", "unclassified")
REPORT_COLUMNS = ("path", "queries", "pdfs", "papers", "unique_titles", "matches")

LEDGER_FILE = "ledger.jsonl"
QUERY_LOG_FILE = "queries.jsonl"
BLOB_DIR = "blobs"


# ==================== Clocks ====================

def wall_clock() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class LogicalClock:
    """Deterministic timestamps: epoch plus one second per tick."""

    def __init__(self, start: int = 0):
        self._tick = start
        self._lock = threading.Lock()

    def __call__(self) -> str:
        with self._lock:
            self._tick += 1
            tick = self._tick
        stamp = datetime(1970, 1, 1, tzinfo=timezone.utc) + timedelta(seconds=tick)
        return stamp.isoformat(timespec="seconds")


# ==================== Types ====================

@dataclass(frozen=True)
class Target:
    id: str
    title: str
    authors: Tuple[str, ...]


@dataclass(frozen=True)
class Provenance:
    """One acquisition of the bytes: origin is a query id (path 1) or a seed URL (path 2)."""
    acquisition_path: str
    origin: str
    source_url: str
    query_id: str = ""
    depth: Optional[int] = None
    stored_at: str = ""

    def key(self) -> Tuple[str, str, str, str]:
        return (self.acquisition_path, self.origin, self.source_url, self.query_id)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "acquisition_path": self.acquisition_path,
            "origin": self.origin,
            "source_url": self.source_url,
            "query_id": self.query_id,
            "depth": self.depth,
            "stored_at": self.stored_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Provenance":
        return cls(
            acquisition_path=data["acquisition_path"],
            origin=data["origin"],
            source_url=data["source_url"],
            query_id=data.get("query_id", ""),
            depth=data.get("depth"),
            stored_at=data.get("stored_at", ""),
        )


@dataclass
class DocumentMetadata:
    """What the caller knows about one acquisition when calling put()."""
    acquisition_path: str
    origin: str
    source_url: str
    query_id: str = ""
    depth: Optional[int] = None
    classifier_label: str = "unclassified"
    classifier_score: Optional[float] = None
    extracted_title: Optional[TitleRecord] = None
    matched_target: Optional[str] = None

    def __post_init__(self):
        if self.acquisition_path not in ACQUISITION_PATHS:
            raise InvalidInputError(f"acquisition_path must be one of {ACQUISITION_PATHS}", stage="store")
        if self.classifier_label not in CLASSIFIER_LABELS:
            raise InvalidInputError(f"classifier_label must be one of {CLASSIFIER_LABELS}", stage="store")
        if self.classifier_score is not None and not 0.0 <= self.classifier_score <= 1.0:
            raise InvalidInputError("classifier_score must be in [0, 1]", stage="store")


@dataclass
class DocumentRecord:
    content_hash: str
    source_url: str
    acquisition_path: str
    origin: str
    classifier_label: str
    classifier_score: Optional[float]
    extracted_title: Optional[TitleRecord]
    matched_target: Optional[str]
    stored_at: str
    byte_size: int = 0
    stored_path: str = ""
    provenance: List[Provenance] = field(default_factory=list)

    @property
    def is_paper(self) -> bool:
        return self.classifier_label == "paper"

    def provenance_on(self, path: str) -> List[Provenance]:
        return [p for p in self.provenance if p.acquisition_path == path]

    def to_dict(self) -> Dict[str, Any]:
        title = self.extracted_title
        return {
            "content_hash": self.content_hash,
            "source_url": self.source_url,
            "acquisition_path": self.acquisition_path,
            "origin": self.origin,
            "classifier_label": self.classifier_label,
            "classifier_score": self.classifier_score,
            "extracted_title": {"raw": title.raw, "normalized": title.normalized} if title else None,
            "matched_target": self.matched_target,
            "stored_at": self.stored_at,
            "byte_size": self.byte_size,
            "stored_path": self.stored_path,
            "provenance": [p.to_dict() for p in self.provenance],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DocumentRecord":
        title = data.get("extracted_title")
        return cls(
            content_hash=data["content_hash"],
            source_url=data["source_url"],
            acquisition_path=data["acquisition_path"],
            origin=data["origin"],
            classifier_label=data["classifier_label"],
            classifier_score=data.get("classifier_score"),
            extracted_title=TitleRecord(raw=title["raw"], normalized=title["normalized"]) if title else None,
            matched_target=data.get("matched_target"),
            stored_at=data["stored_at"],
            byte_size=data.get("byte_size", 0),
            stored_path=data.get("stored_path", ""),
            provenance=[Provenance.from_dict(p) for p in data.get("provenance", [])],
        )


# ==================== Accounting ====================

@dataclass
class PathCounters:
    queries_issued: int = 0
    pdfs_fetched: int = 0
    pdfs_unique: int = 0
    papers_classified: int = 0
    unique_titles: int = 0
    target_matches: int = 0
    domain_histogram: Dict[str, int] = field(default_factory=dict)

    @property
    def papers_per_query(self) -> float:
        return self.papers_classified / self.queries_issued if self.queries_issued else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "queries_issued": self.queries_issued,
            "pdfs_fetched": self.pdfs_fetched,
            "pdfs_unique": self.pdfs_unique,
            "papers_classified": self.papers_classified,
            "unique_titles": self.unique_titles,
            "target_matches": self.target_matches,
            "papers_per_query": self.papers_per_query,
            "domain_histogram": dict(sorted(self.domain_histogram.items(), key=lambda kv: (-kv[1], kv[0]))),
        }


@dataclass
class Manifest:
    """
    Yield accounting per acquisition path plus the cross-path section.

    pdfs_fetched and papers_classified count provenance entries (raw fetches);
    pdfs_unique counts distinct content hashes.
    """
    paths: Dict[str, PathCounters] = field(default_factory=lambda: {p: PathCounters() for p in ACQUISITION_PATHS})
    union_unique_titles: int = 0
    overlap: int = 0
    targets_total: int = 0
    targets_recovered: int = 0

    @property
    def recovered_fraction(self) -> float:
        return self.targets_recovered / self.targets_total if self.targets_total else 0.0

    @property
    def domain_histogram(self) -> Dict[str, int]:
        total: Counter = Counter()
        for counters in self.paths.values():
            total.update(counters.domain_histogram)
        return dict(total)

    def check_invariants(self) -> None:
        for name, c in self.paths.items():
            if c.papers_classified > c.pdfs_fetched:
                raise InvariantViolationError(f"{name}: papers_classified > pdfs_fetched")
            if c.target_matches > c.papers_classified:
                raise InvariantViolationError(f"{name}: target_matches > papers_classified")
            if sum(c.domain_histogram.values()) != c.papers_classified:
                raise InvariantViolationError(f"{name}: domain histogram does not sum to papers_classified")
        a, b = (self.paths[p].unique_titles for p in ACQUISITION_PATHS)
        if self.union_unique_titles != a + b - self.overlap:
            raise InvariantViolationError("unique-title inclusion-exclusion does not hold")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "paths": {name: counters.to_dict() for name, counters in self.paths.items()},
            "combined": {
                "union_unique_titles": self.union_unique_titles,
                "overlap": self.overlap,
                "targets_total": self.targets_total,
                "targets_recovered": self.targets_recovered,
                "recovered_fraction": self.recovered_fraction,
            },
        }


def top_level_domain(url: str) -> str:
    host = (urlsplit(url).hostname or "").rstrip(".")
    return host.rsplit(".", 1)[-1] if host else ""


def _paper_titles(records: Iterable[DocumentRecord]) -> set:
    return {r.extracted_title.normalized for r in records
            if r.is_paper and r.extracted_title is not None and r.extracted_title.normalized}


def count_unique_titles(records: Iterable[DocumentRecord]) -> int:
    """Distinct normalized titles among paper-labeled records; untitled records excluded."""
    return len(_paper_titles(records))


def title_overlap(a: Iterable[DocumentRecord], b: Iterable[DocumentRecord]) -> int:
    return len(_paper_titles(a) & _paper_titles(b))


def compute_manifest(records: Iterable[DocumentRecord], query_log: Sequence[Mapping[str, Any]] = (),
                     targets: Sequence[Target] = ()) -> Manifest:
    """
    Recompute every counter from records and the query log.

    A record counts toward a path once per provenance entry on that path;
    titles and target matches count once per path.
    """
    records = list(records)
    manifest = Manifest(targets_total=len(targets))
    for entry in query_log:
        path = entry.get("acquisition_path")
        if path in manifest.paths:
            manifest.paths[path].queries_issued += 1

    by_path: Dict[str, List[DocumentRecord]] = {p: [] for p in ACQUISITION_PATHS}
    for record in records:
        for path in ACQUISITION_PATHS:
            entries = record.provenance_on(path)
            if not entries:
                continue
            by_path[path].append(record)
            counters = manifest.paths[path]
            counters.pdfs_fetched += len(entries)
            counters.pdfs_unique += 1
            if record.is_paper:
                counters.papers_classified += len(entries)
                for entry in entries:
                    tld = top_level_domain(entry.source_url)
                    counters.domain_histogram[tld] = counters.domain_histogram.get(tld, 0) + 1

    for path, path_records in by_path.items():
        counters = manifest.paths[path]
        counters.unique_titles = count_unique_titles(path_records)
        counters.target_matches = len({r.matched_target for r in path_records
                                       if r.is_paper and r.matched_target})

    manifest.union_unique_titles = count_unique_titles(records)
    manifest.overlap = title_overlap(by_path[PATH1], by_path[PATH2])
    manifest.targets_recovered = len({r.matched_target for r in records if r.is_paper and r.matched_target})
    return manifest


# ==================== Target Matching ====================

def load_targets(path: str) -> List[Target]:
    """Load target titles (JSON lines of {"id", "title", "authors"})."""
    targets: List[Target] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataParseError(path, line_number, f"invalid JSON: {e.msg}")
            is_valid, error_msg = validate_target(record)
            if not is_valid:
                raise DataParseError(path, line_number, error_msg)
            targets.append(Target(id=record["id"], title=record["title"], authors=tuple(record["authors"])))
    return targets


def first_matching_target(doc: NormalizedDocument, targets: Sequence[Target]) -> Optional[str]:
    for target in targets:
        if match_title(doc, target.title, target.authors):
            return target.id
    return None


@dataclass
class TargetMatchReport:
    count: int
    hits: Dict[str, List[str]]        # target id -> content hashes, target order
    assignment: Dict[str, str]        # content hash -> target id


def match_against_targets(documents: Iterable[Tuple[str, NormalizedDocument]],
                          targets: Sequence[Target]) -> TargetMatchReport:
    """
    Match documents against target titles on their first page.

    Args:
        documents: (content_hash, document) pairs
        targets: Targets, in priority order

    Returns:
        TargetMatchReport; each document matches at most one target (the first)

    Raises:
        InvalidInputError: A target title is empty
    """
    for target in targets:
        if not normalize_title(target.title):
            raise InvalidInputError(f"target {target.id} has an empty title", stage="match")
    hits: Dict[str, List[str]] = {t.id: [] for t in targets}
    assignment: Dict[str, str] = {}
    for content_hash, doc in documents:
        target_id = first_matching_target(doc, targets)
        if target_id is not None:
            hits[target_id].append(content_hash)
            assignment[content_hash] = target_id
    count = sum(1 for ids in hits.values() if ids)
    return TargetMatchReport(count=count, hits=hits, assignment=assignment)


# ==================== Store ====================

def _merge(record: DocumentRecord, metadata: DocumentMetadata, entry: Provenance) -> bool:
    """Merge one acquisition into an existing record; return True if anything changed."""
    changed = False
    if entry.key() not in {p.key() for p in record.provenance}:
        record.provenance.append(entry)
        record.provenance.sort(key=Provenance.key)
        changed = True
    if record.classifier_label == "unclassified" and metadata.classifier_label != "unclassified":
        record.classifier_label = metadata.classifier_label
        record.classifier_score = metadata.classifier_score
        changed = True
    if record.extracted_title is None and metadata.extracted_title is not None:
        record.extracted_title = metadata.extracted_title
        changed = True
    if record.matched_target is None and metadata.matched_target is not None:
        record.matched_target = metadata.matched_target
        changed = True
    first = record.provenance[0]
    record.acquisition_path, record.origin, record.source_url = (
        first.acquisition_path, first.origin, first.source_url)
    return changed


class DocumentStore:
    """
    Content-addressed store. Concurrent put() calls are safe: blobs are written
    temp-then-rename, index and ledger updates are serialized.
    """

    def __init__(self, root: str, clock: Optional[Callable[[], str]] = None,
                 targets: Sequence[Target] = ()):
        self.root = root
        self.clock = clock or wall_clock
        self.targets = list(targets)
        self._lock = threading.Lock()
        self._records: Dict[str, DocumentRecord] = {}
        self._query_log: List[Dict[str, Any]] = []
        os.makedirs(os.path.join(root, BLOB_DIR), exist_ok=True)
        self._load()

    @property
    def ledger_path(self) -> str:
        return os.path.join(self.root, LEDGER_FILE)

    @property
    def query_log_path(self) -> str:
        return os.path.join(self.root, QUERY_LOG_FILE)

    def _load(self) -> None:
        self._records = read_ledger(self.ledger_path)
        self._query_log = _read_jsonl(self.query_log_path)
        if self._records:
            logger.info("Opened store %s with %d records", self.root, len(self._records))

    # -------- blobs --------

    def blob_path(self, content_hash: str) -> str:
        return os.path.join(self.root, BLOB_DIR, content_hash[:2], content_hash[2:4], content_hash)

    def write_blob(self, data: bytes) -> str:
        """Store bytes under their sha256 (idempotent); return the blob path."""
        content_hash = hashlib.sha256(data).hexdigest()
        path = self.blob_path(content_hash)
        if os.path.exists(path):
            return path
        directory = os.path.dirname(path)
        os.makedirs(directory, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise
        return path

    def read_blob(self, content_hash: str) -> bytes:
        with open(self.blob_path(content_hash), "rb") as f:
            return f.read()

    # -------- records --------

    def put(self, data: bytes, metadata: DocumentMetadata) -> DocumentRecord:
        """
        Store bytes and record one acquisition of them.

        Re-putting identical bytes returns the existing record with the new
        provenance merged in.

        Raises:
            InvalidInputError: Empty bytes
        """
        if not data:
            raise InvalidInputError("cannot store empty document bytes", stage="store")
        stored_path = self.write_blob(data)
        content_hash = os.path.basename(stored_path)

        with self._lock:
            stamp = self.clock()
            entry = Provenance(
                acquisition_path=metadata.acquisition_path,
                origin=metadata.origin,
                source_url=metadata.source_url,
                query_id=metadata.query_id,
                depth=metadata.depth,
                stored_at=stamp,
            )
            record = self._records.get(content_hash)
            if record is None:
                record = DocumentRecord(
                    content_hash=content_hash,
                    source_url=metadata.source_url,
                    acquisition_path=metadata.acquisition_path,
                    origin=metadata.origin,
                    classifier_label=metadata.classifier_label,
                    classifier_score=metadata.classifier_score,
                    extracted_title=metadata.extracted_title,
                    matched_target=metadata.matched_target,
                    stored_at=stamp,
                    byte_size=len(data),
                    stored_path=os.path.relpath(stored_path, self.root),
                    provenance=[entry],
                )
                self._records[content_hash] = record
                self._append_ledger(record)
            elif _merge(record, metadata, entry):
                self._append_ledger(record)
            return record

    def _append_ledger(self, record: DocumentRecord) -> None:
        with open(self.ledger_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")

    def get(self, content_hash: str) -> Optional[DocumentRecord]:
        return self._records.get(content_hash)

    def records(self) -> List[DocumentRecord]:
        with self._lock:
            return list(self._records.values())

    def __len__(self) -> int:
        return len(self._records)

    # -------- queries --------

    def log_query(self, acquisition_path: str, query_id: str, rendered: str,
                  n_results: int = 0, status: str = "ok", reason: str = "") -> None:
        entry = {
            "acquisition_path": acquisition_path,
            "query_id": query_id,
            "rendered": rendered,
            "n_results": n_results,
            "status": status,
            "reason": reason,
        }
        with self._lock:
            self._query_log.append(entry)
            with open(self.query_log_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(entry, sort_keys=True, ensure_ascii=False) + "\n")

    def query_log(self) -> List[Dict[str, Any]]:
        with self._lock:
            return list(self._query_log)

    # -------- accounting --------

    def manifest(self) -> Manifest:
        """Manifest of the in-memory state."""
        return compute_manifest(self.records(), self.query_log(), self.targets)

    def rebuild_manifest(self) -> Manifest:
        """Manifest recomputed from the files on disk alone."""
        records = read_ledger(self.ledger_path)
        return compute_manifest(records.values(), _read_jsonl(self.query_log_path), self.targets)


def _read_jsonl(path: str) -> List[Dict[str, Any]]:
    if not os.path.exists(path):
        return []
    rows: List[Dict[str, Any]] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise DataParseError(path, line_number, f"invalid JSON: {e.msg}")
    return rows


def read_ledger(path: str) -> Dict[str, DocumentRecord]:
    """Current records from a ledger file (last line per content hash wins)."""
    records: Dict[str, DocumentRecord] = {}
    for row in _read_jsonl(path):
        record = DocumentRecord.from_dict(row)
        records[record.content_hash] = record
    return records


# ==================== Reports ====================

def report_rows(manifest: Manifest) -> List[List[str]]:
    rows = []
    for name in ACQUISITION_PATHS:
        c = manifest.paths[name]
        rows.append([name, str(c.queries_issued), str(c.pdfs_fetched), str(c.papers_classified),
                     str(c.unique_titles), str(c.target_matches)])
    return rows


def export_report(manifest: Manifest, out_prefix: str, formats: Sequence[str] = ("tsv", "json")) -> List[str]:
    """
    Write the yield report.

    Args:
        manifest: Finalized manifest
        out_prefix: Output path without extension
        formats: Any of "tsv", "json"

    Returns:
        Paths written
    """
    written: List[str] = []
    directory = os.path.dirname(out_prefix)
    if directory:
        os.makedirs(directory, exist_ok=True)
    if "tsv" in formats:
        path = out_prefix + ".tsv"
        with open(path, "w", encoding="utf-8") as f:
            f.write("\t".join(REPORT_COLUMNS) + "\n")
            for row in report_rows(manifest):
                f.write("\t".join(row) + "\n")
        written.append(path)
    if "json" in formats:
        path = out_prefix + ".json"
        payload = manifest.to_dict()
        payload["domain_histogram"] = dict(sorted(manifest.domain_histogram.items(),
                                                  key=lambda kv: (-kv[1], kv[0])))
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=False)
            f.write("\n")
        written.append(path)
    return written


__all__ = [
    "PATH1",
    "PATH2",
    "ACQUISITION_PATHS",
    "REPORT_COLUMNS",
    "LogicalClock",
    "wall_clock",
    "Target",
    "Provenance",
    "DocumentMetadata",
    "DocumentRecord",
    "PathCounters",
    "Manifest",
    "top_level_domain",
    "count_unique_titles",
    "title_overlap",
    "compute_manifest",
    "load_targets",
    "first_matching_target",
    "TargetMatchReport",
    "match_against_targets",
    "DocumentStore",
    "read_ledger",
    "report_rows",
    "export_report",
]
