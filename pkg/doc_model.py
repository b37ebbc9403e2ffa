"""
Document Model
==============

Page/line text model of harvested documents, the 24 structural features the
paper classifier uses, a first-page title heuristic and first-page title
matching.

Conventions:
- a "line" is a non-blank line; blank lines only delimit title blocks
- a "word" is a maximal run of non-whitespace
- headings are detected on the normalized line (lowercase, punctuation removed,
  leading section numbering removed) that equals or starts with the heading word
"""

import hashlib
import json
import logging
import re
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from adapters.interfaces import ExtractionError, TextExtractor
from validators.schema_validators import (
    DataParseError,
    InvalidInputError,
    NoTitleError,
    UnparseableDocumentError,
    validate_document_json,
    validate_labeled_document,
)

logger = logging.getLogger(__name__)

FEATURE_NAMES: Tuple[str, ...] = (
    "byte_size_kb",
    "page_count",
    "total_words",
    "total_lines",
    "avg_words_per_page",
    "avg_lines_per_page",
    "frac_short_lines",
    "frac_upper_lines",
    "count_numbered_section_headings",
    "count_bullet_lines",
    "contains_this_paper",
    "contains_this_thesis",
    "contains_this_book",
    "contains_abstract_heading",
    "contains_introduction_heading",
    "contains_acknowledgments",
    "contains_references_or_bibliography",
    "contains_cv_marker",
    "contains_chapter_marker",
    "contains_table_of_contents",
    "relpos_introduction",
    "relpos_acknowledgments",
    "relpos_references",
    "count_email_or_url_tokens",
)

ABSENT = -1.0
SHORT_LINE_WORDS = 4
TITLE_MIN_WORDS = 3
TITLE_MAX_WORDS = 30
TITLE_MAX_LINES = 3

_LINE_BREAK = re.compile(r"\r\n|\r|\n|\f|\v|\u2028|\u2029")
_NON_ALNUM = re.compile(r"[^\w]+|_", re.UNICODE)
_SECTION_NUMBER = re.compile(r"^(?:\d+(?:\.\d+)*\.?|[ivxlc]+\.)\s+", re.IGNORECASE)
_NUMBERED_HEADING = re.compile(r"^\d+(?:\.\d+)*\.?\s+[A-Z][^.]*$")
_BULLET = re.compile(r"^\s*[•▪●‣◦·\-\*–]\s+\S")
_CHAPTER = re.compile(r"^chapter\s+(?:\d+|[ivxlc]+|one|two|three|four|five|six|seven|eight|nine|ten)\b")
_EMAIL_OR_URL = re.compile(r"^(?:\S+@\S+\.\w+|https?://\S+|www\.\S+)$", re.IGNORECASE)


# ==================== Domain Types ====================

@dataclass(frozen=True)
class NormalizedDocument:
    """Text of one document: pages of lines, no line-break characters inside lines."""
    doc_id: str
    byte_size: int
    pages: Tuple[Tuple[str, ...], ...]

    def __post_init__(self):
        if self.byte_size < 0:
            raise InvalidInputError("byte_size must be >= 0", stage="ingest")
        if not self.pages:
            raise InvalidInputError("document needs at least one page", stage="ingest")

    @property
    def first_page(self) -> Tuple[str, ...]:
        return self.pages[0]

    def content_lines(self) -> List[str]:
        """All non-blank lines, stripped, in document order."""
        return [line.strip() for page in self.pages for line in page if line.strip()]


@dataclass(frozen=True)
class StructuralFeatures:
    """Fixed-order vector over FEATURE_NAMES."""
    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(FEATURE_NAMES):
            raise InvalidInputError(
                f"expected {len(FEATURE_NAMES)} features, got {len(self.values)}", stage="features")

    def __getitem__(self, name: str) -> float:
        return self.values[FEATURE_NAMES.index(name)]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def to_dict(self) -> Dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values))

    @classmethod
    def from_dict(cls, data: Dict[str, float]) -> "StructuralFeatures":
        return cls(values=tuple(float(data[name]) for name in FEATURE_NAMES))


@dataclass(frozen=True)
class TitleRecord:
    raw: str
    normalized: str

    @classmethod
    def from_raw(cls, raw: str) -> "TitleRecord":
        return cls(raw=raw, normalized=normalize_title(raw))


# ==================== Normalization ====================

def normalize_title(text: str) -> str:
    """Lowercase, punctuation removed inside each word, whitespace collapsed ("Multi-Agent" -> "multiagent")."""
    words = (_NON_ALNUM.sub("", word) for word in (text or "").lower().split())
    return " ".join(word for word in words if word)


def _normalize_heading(line: str) -> str:
    return normalize_title(_SECTION_NUMBER.sub("", line.strip()))


def _split_line(line: str) -> List[str]:
    return _LINE_BREAK.split(line.rstrip("\r\n"))


def _coerce_pages(pages: Iterable[Any]) -> Tuple[Tuple[str, ...], ...]:
    result = []
    for page in pages:
        if isinstance(page, str):
            page = [page]
        lines: List[str] = []
        for line in page:
            lines.extend(_split_line(str(line)))
        result.append(tuple(lines))
    return tuple(result)


def document_from_json(data: Dict[str, Any]) -> NormalizedDocument:
    """
    Build a document from the pre-extracted format, normalizing line endings.

    Raises:
        UnparseableDocumentError: Not a valid pre-extracted document
    """
    doc_id = str(data.get("doc_id", "")) if isinstance(data, dict) else ""
    if isinstance(data, dict) and isinstance(data.get("pages"), list):
        data = {**data, "pages": [list(p) for p in _coerce_pages(data["pages"])]}
    is_valid, error_msg = validate_document_json(data)
    if not is_valid:
        raise UnparseableDocumentError(doc_id or "<unknown>", error_msg)
    return NormalizedDocument(doc_id=data["doc_id"], byte_size=data["byte_size"],
                              pages=_coerce_pages(data["pages"]))


def document_to_json(doc: NormalizedDocument) -> Dict[str, Any]:
    return {"doc_id": doc.doc_id, "byte_size": doc.byte_size, "pages": [list(p) for p in doc.pages]}


def load_document_json(path: str) -> NormalizedDocument:
    with open(path, "r", encoding="utf-8") as f:
        return document_from_json(json.load(f))


def load_labeled_documents(path: str) -> List[Tuple[str, NormalizedDocument]]:
    """
    Read the classifier training set: JSON lines of {"label", "document"}.

    Raises:
        DataParseError: A line is not JSON or fails validation
    """
    labeled: List[Tuple[str, NormalizedDocument]] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataParseError(path, line_number, f"invalid JSON: {e.msg}")
            is_valid, error_msg = validate_labeled_document(record)
            if not is_valid:
                raise DataParseError(path, line_number, error_msg)
            labeled.append((record["label"], document_from_json(record["document"])))
    logger.debug("Loaded %d labeled documents from %s", len(labeled), path)
    return labeled


def _looks_pre_extracted(data: bytes) -> bool:
    return data.lstrip()[:1] == b"{"


def ingest_document(source: Union[bytes, str, Dict[str, Any]],
                    extractor: Optional[TextExtractor] = None,
                    doc_id: Optional[str] = None) -> NormalizedDocument:
    """
    Normalize raw document bytes (or pre-extracted text) into a NormalizedDocument.

    Pre-extracted JSON input bypasses the extractor; anything else needs one.

    Args:
        source: Raw bytes, pre-extracted JSON text/bytes, or the decoded dict
        extractor: TextExtractor for raw PDF bytes
        doc_id: Identifier used in errors (default: content digest prefix)

    Raises:
        UnparseableDocumentError: Empty source or extraction failure
    """
    if isinstance(source, dict):
        return document_from_json(source)

    data = source.encode("utf-8") if isinstance(source, str) else bytes(source or b"")
    doc_id = doc_id or hashlib.sha256(data).hexdigest()[:16]
    if not data:
        raise UnparseableDocumentError(doc_id, "zero-byte source")

    if _looks_pre_extracted(data):
        try:
            decoded = json.loads(data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise UnparseableDocumentError(doc_id, f"invalid pre-extracted JSON: {e}")
        return document_from_json(decoded)

    if extractor is None:
        raise UnparseableDocumentError(doc_id, "raw document bytes but no text extractor configured")
    try:
        extracted = extractor.extract(data, doc_id)
    except ExtractionError as e:
        raise UnparseableDocumentError(doc_id, str(e))
    extracted = {**extracted, "doc_id": extracted.get("doc_id") or doc_id,
                 "byte_size": len(data)}
    return document_from_json(extracted)


# ==================== Structural Features ====================

ACKNOWLEDGMENT_WORDS = ("acknowledgment", "acknowledgments", "acknowledgement", "acknowledgements")


def _first_heading_index(headings: Sequence[str], words: Sequence[str]) -> int:
    for idx, heading in enumerate(headings):
        for word in words:
            if heading == word or heading.startswith(word + " "):
                return idx
    return -1


def _is_upper(line: str) -> bool:
    letters = [ch for ch in line if ch.isalpha()]
    return bool(letters) and all(ch.isupper() for ch in letters)


def extract_structural_features(doc: NormalizedDocument) -> StructuralFeatures:
    """
    Compute the 24 structural features in FEATURE_NAMES order.

    relpos_* is (index of the section's first heading line) / total_lines, or
    -1 when the section is absent. Degenerate documents give zeros and sentinels.
    """
    lines = doc.content_lines()
    word_counts = [len(line.split()) for line in lines]
    total_lines = len(lines)
    total_words = sum(word_counts)
    page_count = len(doc.pages)
    headings = [_normalize_heading(line) for line in lines]
    text = " ".join(normalize_title(line) for line in lines)
    padded = f" {text} "

    def phrase(p: str) -> float:
        return 1.0 if f" {p} " in padded else 0.0

    def relpos(index: int) -> float:
        return index / total_lines if index >= 0 and total_lines else ABSENT

    intro_idx = _first_heading_index(headings, ("introduction",))
    ack_idx = _first_heading_index(headings, ACKNOWLEDGMENT_WORDS)
    ref_idx = _first_heading_index(headings, ("references", "bibliography"))
    abstract_idx = _first_heading_index(headings, ("abstract",))
    toc = phrase("table of contents") or float(any(h == "contents" for h in headings))
    cv = phrase("curriculum vitae") or float(any(h in ("cv", "resume", "vita") for h in headings))

    values = {
        "byte_size_kb": doc.byte_size / 1024.0,
        "page_count": float(page_count),
        "total_words": float(total_words),
        "total_lines": float(total_lines),
        "avg_words_per_page": total_words / page_count,
        "avg_lines_per_page": total_lines / page_count,
        "frac_short_lines": (sum(1 for c in word_counts if c < SHORT_LINE_WORDS) / total_lines
                             if total_lines else 0.0),
        "frac_upper_lines": (sum(1 for line in lines if _is_upper(line)) / total_lines
                             if total_lines else 0.0),
        "count_numbered_section_headings": float(sum(1 for line in lines if _NUMBERED_HEADING.match(line))),
        "count_bullet_lines": float(sum(1 for line in lines if _BULLET.match(line))),
        "contains_this_paper": phrase("this paper"),
        "contains_this_thesis": phrase("this thesis"),
        "contains_this_book": phrase("this book"),
        "contains_abstract_heading": 1.0 if abstract_idx >= 0 else 0.0,
        "contains_introduction_heading": 1.0 if intro_idx >= 0 else 0.0,
        "contains_acknowledgments": 1.0 if ack_idx >= 0 else 0.0,
        "contains_references_or_bibliography": 1.0 if ref_idx >= 0 else 0.0,
        "contains_cv_marker": float(cv),
        "contains_chapter_marker": 1.0 if any(_CHAPTER.match(h) for h in headings) else 0.0,
        "contains_table_of_contents": float(toc),
        "relpos_introduction": relpos(intro_idx),
        "relpos_acknowledgments": relpos(ack_idx),
        "relpos_references": relpos(ref_idx),
        "count_email_or_url_tokens": float(sum(
            1 for line in lines for word in line.split() if _EMAIL_OR_URL.match(word.strip("()<>,;")))),
    }
    return StructuralFeatures(values=tuple(float(values[name]) for name in FEATURE_NAMES))


# ==================== Titles ====================

def _title_blocks(first_page: Sequence[str]) -> List[List[str]]:
    """Runs of consecutive non-blank lines on page 1, up to the abstract heading."""
    blocks: List[List[str]] = []
    current: List[str] = []
    for line in first_page:
        stripped = line.strip()
        if stripped and normalize_title(stripped) == "abstract":
            break
        if stripped:
            current.append(stripped)
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)
    return blocks


def extract_title_heuristic(doc: NormalizedDocument) -> TitleRecord:
    """
    Take the earliest block of 1-3 consecutive non-blank lines on page 1,
    before the abstract heading, whose joined text has 3-30 words; otherwise
    the first non-blank line.

    Raises:
        NoTitleError: Page 1 has no text
    """
    first_lines = [line.strip() for line in doc.first_page if line.strip()]
    if not first_lines:
        raise NoTitleError(doc.doc_id)

    for block in _title_blocks(doc.first_page):
        if len(block) > TITLE_MAX_LINES:
            continue
        joined = " ".join(block)
        if TITLE_MIN_WORDS <= len(joined.split()) <= TITLE_MAX_WORDS:
            return TitleRecord.from_raw(joined)
    return TitleRecord.from_raw(first_lines[0])


def match_title(doc: NormalizedDocument, title: str, authors: Sequence[str]) -> bool:
    """
    True iff the normalized title occurs in the normalized first-page text and
    at least one author's final name token appears there as a word.

    Raises:
        InvalidInputError: Empty title
    """
    wanted = normalize_title(title)
    if not wanted:
        raise InvalidInputError("title must be non-empty", stage="match")
    page_text = " ".join(normalize_title(line) for line in doc.first_page if line.strip())
    padded = f" {page_text} "
    if f" {wanted} " not in padded:
        return False
    for author in authors:
        tokens = normalize_title(author).split()
        if tokens and f" {tokens[-1]} " in padded:
            return True
    return False


__all__ = [
    "FEATURE_NAMES",
    "ABSENT",
    "NormalizedDocument",
    "StructuralFeatures",
    "TitleRecord",
    "normalize_title",
    "document_from_json",
    "document_to_json",
    "load_document_json",
    "load_labeled_documents",
    "ingest_document",
    "extract_structural_features",
    "extract_title_heuristic",
    "match_title",
]
