"""
Document Model Tests

Ingestion, structural features, the title heuristic and title matching over
the hand-written documents in fixtures/.
"""

import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from doc_model import (
    ABSENT,
    FEATURE_NAMES,
    NormalizedDocument,
    document_from_json,
    extract_structural_features,
    extract_title_heuristic,
    ingest_document,
    load_document_json,
    load_labeled_documents,
    match_title,
    normalize_title,
)
from validators.schema_validators import (
    DataParseError,
    InvalidInputError,
    NoTitleError,
    UnparseableDocumentError,
)

MAXSAT_TITLE = "Maximum Satisfiability using Cores and Correction Sets"


@pytest.fixture
def load(fixtures_dir):
    def _load(name):
        return load_document_json(os.path.join(fixtures_dir, name))
    return _load


# ==================== Ingestion ====================

def test_zero_byte_source_is_unparseable():
    with pytest.raises(UnparseableDocumentError):
        ingest_document(b"")


def test_raw_bytes_without_extractor_are_unparseable():
    with pytest.raises(UnparseableDocumentError):
        ingest_document(b"%PDF-1.4 binary")


def test_pre_extracted_bytes_bypass_extractor(fixtures_dir):
    with open(os.path.join(fixtures_dir, "maxsat_paper.json"), "rb") as f:
        doc = ingest_document(f.read())
    assert doc.doc_id == "maxsat"
    assert len(doc.pages) == 2


def test_line_endings_are_normalized():
    crlf = document_from_json({"doc_id": "d", "byte_size": 10, "pages": [["first\r\nsecond", "third"]]})
    lf = document_from_json({"doc_id": "d", "byte_size": 10, "pages": [["first", "second", "third"]]})
    assert crlf == lf


def test_invalid_document_json():
    with pytest.raises(UnparseableDocumentError):
        document_from_json({"doc_id": "d", "byte_size": -1, "pages": [["x"]]})
    with pytest.raises(UnparseableDocumentError):
        document_from_json({"doc_id": "d", "byte_size": 1, "pages": []})


def test_load_labeled_documents_reports_bad_line(tmp_path):
    good = {"label": "paper", "document": {"doc_id": "a", "byte_size": 1, "pages": [["A title here"]]}}
    bad = {"label": "maybe", "document": good["document"]}
    path = tmp_path / "docs.jsonl"
    path.write_text(json.dumps(good) + "\n" + json.dumps(bad) + "\n", encoding="utf-8")

    with pytest.raises(DataParseError) as excinfo:
        load_labeled_documents(str(path))
    assert excinfo.value.line_number == 2


def test_load_labeled_documents(tmp_path):
    record = {"label": "non_paper", "document": {"doc_id": "a", "byte_size": 1, "pages": [["Slides"]]}}
    path = tmp_path / "docs.jsonl"
    path.write_text(json.dumps(record) + "\n\n", encoding="utf-8")
    labeled = load_labeled_documents(str(path))
    assert [(label, doc.doc_id) for label, doc in labeled] == [("non_paper", "a")]


# ==================== Structural Features ====================

def test_feature_vector_has_fixed_order(load):
    features = extract_structural_features(load("maxsat_paper.json"))
    assert len(FEATURE_NAMES) == 24
    assert list(features.to_dict()) == list(FEATURE_NAMES)


def test_maxsat_paper_features(load):
    features = extract_structural_features(load("maxsat_paper.json"))
    assert features["page_count"] == 2
    assert features["byte_size_kb"] == 200.0
    assert features["total_lines"] == 16
    assert features["contains_this_paper"] == 1.0
    assert features["contains_abstract_heading"] == 1.0
    assert features["contains_introduction_heading"] == 1.0
    assert features["count_numbered_section_headings"] == 3
    assert features["contains_this_thesis"] == 0.0
    assert features["relpos_introduction"] == pytest.approx(0.375)
    assert features["relpos_acknowledgments"] == pytest.approx(0.75)
    assert features["relpos_references"] == pytest.approx(0.875)


def test_relative_positions_are_ordered(load):
    features = extract_structural_features(load("maxsat_paper.json"))
    assert 0 <= features["relpos_introduction"] < features["relpos_acknowledgments"] \
        < features["relpos_references"] < 1


def test_absent_sections_use_sentinel(load):
    features = extract_structural_features(load("slides.json"))
    assert features["relpos_introduction"] == ABSENT
    assert features["relpos_references"] == ABSENT
    assert features["contains_references_or_bibliography"] == 0.0


def test_slides_features(load):
    features = extract_structural_features(load("slides.json"))
    assert features["total_lines"] == 10
    assert features["frac_short_lines"] == pytest.approx(0.8)
    assert features["count_bullet_lines"] == 4
    assert features["contains_this_paper"] == 0.0


def test_thesis_features(load):
    features = extract_structural_features(load("thesis.json"))
    assert features["page_count"] == 5
    assert features["contains_this_thesis"] == 1.0
    assert features["contains_chapter_marker"] == 1.0
    assert features["contains_table_of_contents"] == 1.0
    assert features["contains_references_or_bibliography"] == 1.0


def test_average_words_per_page():
    doc = NormalizedDocument("d", 1000, tuple((" ".join(["word"] * 300),) for _ in range(10)))
    features = extract_structural_features(doc)
    assert features["avg_words_per_page"] == 300
    assert features["avg_lines_per_page"] == 1


def test_empty_text_gives_zeros_and_sentinels():
    features = extract_structural_features(NormalizedDocument("d", 0, (("",),)))
    assert features["total_words"] == 0
    assert features["frac_short_lines"] == 0.0
    assert features["relpos_introduction"] == ABSENT


def test_email_and_url_tokens_are_counted():
    doc = NormalizedDocument("d", 10, (("Contact: ada@x.edu or http://x.edu/~ada", "see www.x.edu"),))
    assert extract_structural_features(doc)["count_email_or_url_tokens"] == 3


# ==================== Titles ====================

def test_single_line_title(load):
    assert extract_title_heuristic(load("maxsat_paper.json")).raw == MAXSAT_TITLE


def test_two_line_title_is_joined(load):
    title = extract_title_heuristic(load("two_line_title.json"))
    assert title.raw == "Learning to Rank Researcher Homepages from Noisy Web Search Results"
    assert title.normalized == "learning to rank researcher homepages from noisy web search results"


def test_thesis_title(load):
    assert extract_title_heuristic(load("thesis.json")).raw == "Probabilistic Models for Document Acquisition"


def test_short_leading_block_is_skipped():
    doc = NormalizedDocument("d", 1, (("Draft", "", "On the Theory of Things", "", "Ada Author"),))
    assert extract_title_heuristic(doc).raw == "On the Theory of Things"


def test_title_falls_back_to_first_line():
    doc = NormalizedDocument("d", 1, (("Alpha beta gamma", "delta epsilon zeta", "eta theta iota",
                                       "kappa lambda mu"),))
    assert extract_title_heuristic(doc).raw == "Alpha beta gamma"


def test_blank_first_page_has_no_title():
    with pytest.raises(NoTitleError):
        extract_title_heuristic(NormalizedDocument("d", 1, (("", "  "), ("Body text here",))))


def test_normalize_title():
    assert normalize_title("  A Study: of   THINGS. ") == "a study of things"
    assert normalize_title("Multi-Agent") == normalize_title("Multiagent") == "multiagent"
    assert normalize_title("O'Brien's  Lemma") == "obriens lemma"


def test_match_title_needs_title_and_author(load):
    doc = load("maxsat_paper.json")
    assert match_title(doc, MAXSAT_TITLE, ["Nina Narodytska", "Nikolaj Bjorner"])
    assert match_title(doc, "maximum satisfiability using cores and correction sets.", ["N. Bjorner"])
    assert not match_title(doc, MAXSAT_TITLE, ["Ada Author"])
    assert not match_title(doc, "A Paper Nobody Has Written", ["Nina Narodytska"])


def test_match_two_line_title(load):
    assert match_title(load("two_line_title.json"),
                       "Learning to Rank Researcher Homepages from Noisy Web Search Results", ["Ada Author"])


def test_match_title_rejects_empty_title(load):
    with pytest.raises(InvalidInputError):
        match_title(load("maxsat_paper.json"), " . ", ["Nina Narodytska"])


def test_match_title_ignores_hyphenation_and_case():
    doc = NormalizedDocument("d", 10, (("A Multiagent Approach to Planning", "Jane Smith"),))
    assert match_title(doc, "A Multi-Agent Approach to Planning", ["Jane Smith"])
    assert match_title(doc, "a MULTIAGENT approach to planning.", ["Jane Smith"])
