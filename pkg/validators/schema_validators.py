"""
Schema Validators
=================

Validation functions for every wire format the harvester reads or writes.

Features:
- validate_fixture_record: one line of a search fixture file
- validate_result_entries: rank contiguity of fixture results
- validate_document_json: pre-extracted document format
- validate_labeled_document: one line of the classifier training set
- validate_site_map: fixture mini-web
- validate_target: one target (title, authors) line

Rules:
- validators never raise; they return (is_valid, error_message)
- callers decide whether an invalid record is fatal (raise) or skipped (log)
"""

from typing import Any, Dict, List, Optional, Tuple
from urllib.parse import urlsplit


# ==================== Error Types ====================

class ValidationError(Exception):
    """Base validation error class"""
    def __init__(self, stage: str, message: str):
        self.stage = stage
        self.message = message
        super().__init__(f"[{stage}] {message}")


class InvalidInputError(ValidationError):
    """Input violates an operation's precondition"""
    def __init__(self, message: str, stage: str = "input"):
        super().__init__(stage, message)


class InvalidURLError(InvalidInputError):
    """URL cannot be parsed or resolved"""
    def __init__(self, url: str, reason: str = "unparseable url"):
        self.url = url
        super().__init__(f"{reason}: {url!r}", stage="url")


class InvalidLabelingError(ValidationError):
    """A labeled result page does not have exactly one homepage"""
    def __init__(self, query_id: str, homepage_count: int):
        self.query_id = query_id
        self.homepage_count = homepage_count
        super().__init__(
            "labeling",
            f"query {query_id!r} has {homepage_count} results labeled homepage (expected exactly 1)"
        )


class DegenerateTrainingError(ValidationError):
    """Training data contains a single class"""
    def __init__(self, message: str):
        super().__init__("training", message)


class InvariantViolationError(ValidationError):
    """A value object would break one of its invariants"""
    def __init__(self, message: str):
        super().__init__("invariant", message)


class NoTitleError(ValidationError):
    """First page carries no text a title could be taken from"""
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__("title", f"document {doc_id!r} has an empty first page")


class UnparseableDocumentError(ValidationError):
    """Document bytes could not be turned into pages of lines"""
    def __init__(self, doc_id: str, reason: str):
        self.doc_id = doc_id
        super().__init__("ingest", f"document {doc_id!r} is unparseable: {reason}")


class DataParseError(ValidationError):
    """A data file line failed to parse or validate"""
    def __init__(self, path: str, line_number: int, reason: str):
        self.path = path
        self.line_number = line_number
        super().__init__("data", f"{path}:{line_number}: {reason}")


# ==================== Primitive Checks ====================

def is_valid_url(url: Any) -> bool:
    """
    Check that a URL is syntactically usable.

    Scheme-less URLs ("john.blitzer.com") are accepted the way search engines
    display them; they are read as http.
    """
    if not isinstance(url, str) or not url.strip():
        return False
    candidate = url.strip()
    if "://" not in candidate:
        candidate = "http://" + candidate
    try:
        parts = urlsplit(candidate)
        host = parts.hostname
    except ValueError:
        return False
    if parts.scheme not in ("http", "https"):
        return False
    return bool(host) and " " not in host


# ==================== Search Fixtures ====================

def validate_result_entries(results: Any, context: str = "results") -> Tuple[bool, Optional[str]]:
    """
    Validate a list of result dictionaries in fixture wire format.

    Each entry: {"rank": int, "url": str, "title": str, "snippet": str}
    Ranks must be unique and contiguous from 1.
    """
    if not isinstance(results, list):
        return False, f"{context} must be a list"

    ranks = []
    for idx, entry in enumerate(results):
        if not isinstance(entry, dict):
            return False, f"{context}[{idx}] must be a dictionary"
        for field in ("rank", "url", "title", "snippet"):
            if field not in entry:
                return False, f"{context}[{idx}] missing required field: '{field}'"
        if not isinstance(entry["rank"], int) or isinstance(entry["rank"], bool):
            return False, f"{context}[{idx}].rank must be an integer"
        if not is_valid_url(entry["url"]):
            return False, f"{context}[{idx}].url is not a valid url: {entry['url']!r}"
        if not isinstance(entry["title"], str):
            return False, f"{context}[{idx}].title must be a string"
        if not isinstance(entry["snippet"], str):
            return False, f"{context}[{idx}].snippet must be a string"
        if "label" in entry and entry["label"] not in ("homepage", "other"):
            return False, f"{context}[{idx}].label must be 'homepage' or 'other'"
        ranks.append(entry["rank"])

    if sorted(ranks) != list(range(1, len(ranks) + 1)):
        return False, f"{context} ranks must be unique and contiguous from 1, got {sorted(ranks)}"

    return True, None


def validate_fixture_record(record: Any) -> Tuple[bool, Optional[str]]:
    """
    Validate one search fixture line.

    Structure:
    {
        "q": str,               # rendered query
        "results": [...],       # see validate_result_entries
        "name": str,            # optional, labeled homepage fixtures only
        "retrieved_at": str     # optional ISO timestamp
    }
    """
    if not isinstance(record, dict):
        return False, "fixture record must be a dictionary"
    if "q" not in record:
        return False, "fixture record missing required field: 'q'"
    if not isinstance(record["q"], str) or not record["q"].strip():
        return False, "fixture record 'q' must be a non-empty string"
    if "results" not in record:
        return False, "fixture record missing required field: 'results'"
    if "name" in record and not isinstance(record["name"], str):
        return False, "fixture record 'name' must be a string"
    return validate_result_entries(record["results"])


def validate_labeled_record(record: Any) -> Tuple[bool, Optional[str]]:
    """Validate a labeled homepage fixture line (fixture record + name + labels)."""
    is_valid, error_msg = validate_fixture_record(record)
    if not is_valid:
        return is_valid, error_msg
    if not isinstance(record.get("name"), str) or not record["name"].strip():
        return False, "labeled record must carry a non-empty 'name'"
    for idx, entry in enumerate(record["results"]):
        if "label" not in entry:
            return False, f"results[{idx}] missing required field: 'label'"
    return True, None


# ==================== Documents ====================

def validate_document_json(document: Any) -> Tuple[bool, Optional[str]]:
    """
    Validate the pre-extracted document format.

    Structure:
    {
        "doc_id": str,
        "byte_size": int,       # >= 0
        "pages": [[str, ...], ...]  # >= 1 page, lines without line breaks
    }
    """
    if not isinstance(document, dict):
        return False, "document must be a dictionary"
    for field in ("doc_id", "byte_size", "pages"):
        if field not in document:
            return False, f"document missing required field: '{field}'"
    if not isinstance(document["doc_id"], str):
        return False, "document.doc_id must be a string"
    byte_size = document["byte_size"]
    if not isinstance(byte_size, int) or isinstance(byte_size, bool) or byte_size < 0:
        return False, "document.byte_size must be a non-negative integer"
    pages = document["pages"]
    if not isinstance(pages, list) or len(pages) == 0:
        return False, "document.pages must be a non-empty list"
    for p_idx, page in enumerate(pages):
        if not isinstance(page, list):
            return False, f"document.pages[{p_idx}] must be a list of lines"
        for l_idx, line in enumerate(page):
            if not isinstance(line, str):
                return False, f"document.pages[{p_idx}][{l_idx}] must be a string"
    return True, None


def validate_labeled_document(record: Any) -> Tuple[bool, Optional[str]]:
    """Validate one classifier training line: {"label": "paper"|"non_paper", "document": {...}}."""
    if not isinstance(record, dict):
        return False, "labeled document must be a dictionary"
    if record.get("label") not in ("paper", "non_paper"):
        return False, "labeled document 'label' must be 'paper' or 'non_paper'"
    if "document" not in record:
        return False, "labeled document missing required field: 'document'"
    return validate_document_json(record["document"])


def validate_target(record: Any) -> Tuple[bool, Optional[str]]:
    """Validate one target line: {"id": str, "title": str, "authors": [str, ...]}."""
    if not isinstance(record, dict):
        return False, "target must be a dictionary"
    for field in ("id", "title", "authors"):
        if field not in record:
            return False, f"target missing required field: '{field}'"
    if not isinstance(record["title"], str) or not record["title"].strip():
        return False, "target.title must be a non-empty string"
    if not isinstance(record["authors"], list) or not all(isinstance(a, str) for a in record["authors"]):
        return False, "target.authors must be a list of strings"
    return True, None


# ==================== Fixture Mini-Web ====================

def validate_site_map(site: Any) -> Tuple[bool, Optional[str]]:
    """
    Validate a fixture mini-web.

    Structure:
    {
        "pages": {url: {"status": int, "content_type": str, "body": str}},
        "robots": {host: str}     # optional robots.txt bodies
    }
    """
    if not isinstance(site, dict):
        return False, "site map must be a dictionary"
    pages = site.get("pages")
    if not isinstance(pages, dict):
        return False, "site map 'pages' must be a dictionary"
    for url, page in pages.items():
        if not is_valid_url(url):
            return False, f"site map url is not valid: {url!r}"
        if not isinstance(page, dict):
            return False, f"site map page {url!r} must be a dictionary"
        if not isinstance(page.get("status", 200), int):
            return False, f"site map page {url!r} status must be an integer"
        if not isinstance(page.get("content_type", ""), str):
            return False, f"site map page {url!r} content_type must be a string"
        if not isinstance(page.get("body", ""), str):
            return False, f"site map page {url!r} body must be a string"
    robots = site.get("robots", {})
    if not isinstance(robots, dict) or not all(isinstance(v, str) for v in robots.values()):
        return False, "site map 'robots' must map host to robots.txt text"
    return True, None


def require_valid(result: Tuple[bool, Optional[str]], stage: str) -> None:
    """Raise ValidationError when a validator reports a problem."""
    is_valid, error_msg = result
    if not is_valid:
        raise ValidationError(stage, error_msg or "invalid")


__all__ = [
    "ValidationError",
    "InvalidInputError",
    "InvalidURLError",
    "InvalidLabelingError",
    "DegenerateTrainingError",
    "InvariantViolationError",
    "NoTitleError",
    "UnparseableDocumentError",
    "DataParseError",
    "is_valid_url",
    "validate_result_entries",
    "validate_fixture_record",
    "validate_labeled_record",
    "validate_document_json",
    "validate_labeled_document",
    "validate_target",
    "validate_site_map",
    "require_valid",
]
