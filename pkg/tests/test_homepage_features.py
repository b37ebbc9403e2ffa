"""
Homepage Feature Tests

Tokenization, name-match features, dictionaries, vectors and preference pairs,
mostly on the four-result "John Blitzer" page.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from homepage_features import (
    SPACES,
    build_dictionaries,
    build_preference_pairs,
    dictionaries_from_json,
    dictionaries_to_json,
    feature_names,
    name_match_features,
    name_tokens,
    space_offsets,
    split_url,
    tokenize_url,
    total_dimension,
    vectorize,
)
from search_gateway import LabeledPage, ResultPage, SearchResult, build_author_query, load_labeled_fixture
from validators.schema_validators import InvalidInputError, InvalidLabelingError, InvalidURLError


@pytest.fixture
def blitzer(fixtures_dir):
    return load_labeled_fixture(os.path.join(fixtures_dir, "blitzer_search.jsonl"))[0]


def _space_indices(instance, dicts, space):
    start = space_offsets(dicts)[space]
    end = start + len(dicts[space])
    return {i for i in instance.vector if start <= i < end}


def _tokens_set(instance, dicts, space):
    start = space_offsets(dicts)[space]
    return {dicts[space].tokens[i - start] for i in _space_indices(instance, dicts, space)}


# ==================== Tokenization ====================

def test_tokenize_url_tilde_path():
    assert tokenize_url("www.cse.iitb.ac.in/~soumen") == (["www", "cse", "iitb", "ac", "in"], ["soumen"])


def test_split_url_records_user_directories():
    tokens = split_url("www.cse.unsw.edu.au/~ninan/papers/")
    assert tokens.path == ("ninan", "papers")
    assert tokens.user_dirs == ("ninan",)
    assert split_url("https://john.blitzer.com/").user_dirs == ()


def test_name_match_reports_user_directory_match():
    assert name_match_features("Nina Narodytska", "www.cse.unsw.edu.au/~ninan/").user_dir_match
    assert not name_match_features("John Blitzer", "https://john.blitzer.com").user_dir_match


def test_tokenize_url_no_path():
    assert tokenize_url("https://john.blitzer.com") == (["john", "blitzer", "com"], [])


@pytest.mark.parametrize("url", ["http:///", "", "   "])
def test_tokenize_url_rejects_hostless(url):
    with pytest.raises(InvalidURLError):
        tokenize_url(url)


# ==================== Name Match ====================

@pytest.mark.parametrize("name, url, expected", [
    ("Soumen Chakrabarti", "www.cse.iitb.ac.in/~soumen", (True, 0.5)),
    ("John Blitzer", "https://www.linkedin.com/pub/john-blitzer/5/606/425", (True, 1.0)),
    ("Ada Lovelace", "example.com/page", (False, 0.0)),
    ("Nina Narodytska", "www.cse.unsw.edu.au/~ninan/", (True, 0.5)),
])
def test_name_match_features(name, url, expected):
    features = name_match_features(name, url)
    assert (features.has_match, features.frac_match) == expected


def test_name_match_short_tokens_need_exact_match():
    # "li" is below the substring threshold, so "lisa" does not match it
    assert name_match_features("Li", "www.x.edu/~lisa").frac_match == 0.0
    assert name_match_features("Li", "www.x.edu/~li").frac_match == 1.0


def test_name_tokens_strip_punctuation_inside_words():
    assert name_tokens("Jean-Luc Picard") == ["jeanluc", "picard"]
    assert name_tokens("  Conan O'Brien ") == ["conan", "obrien"]
    assert name_tokens("- .") == []


@pytest.mark.parametrize("name, url, expected", [
    ("Jean-Luc Picard", "example.com/~picard", 0.5),
    ("Conan O'Brien", "www.x.edu/~obrien/", 0.5),
    ("Jean-Luc Picard", "www.x.edu/jeanluc-picard", 1.0),
])
def test_name_match_with_punctuated_names(name, url, expected):
    assert name_match_features(name, url).frac_match == expected


def test_name_match_rejects_empty_name():
    with pytest.raises(InvalidInputError):
        name_match_features("", "www.x.edu/")


# ==================== Dictionaries ====================

def test_domain_dictionary_of_blitzer_page(blitzer):
    dicts = build_dictionaries([blitzer], min_df=1)
    expected = {"research", "google", "com", "john", "blitzer", "linkedin", "dblp", "uni-trier", "de", "www"}
    assert expected <= set(dicts["DOMAIN"].tokens)
    assert dicts["DOMAIN"].doc_freq["com"] == 3


def test_min_df_drops_rare_tokens(blitzer):
    dicts = build_dictionaries([blitzer], min_df=2)
    assert "linkedin" not in dicts["DOMAIN"]
    assert "com" in dicts["DOMAIN"]
    assert "professional" not in dicts["SNIPPET"]


def test_dictionaries_shrink_as_min_df_rises(blitzer):
    previous = build_dictionaries([blitzer], min_df=1)
    for threshold in range(2, 7):
        current = build_dictionaries([blitzer], min_df=threshold)
        for space in SPACES:
            assert set(current[space].tokens) <= set(previous[space].tokens), f"{space} grew at min_df={threshold}"
        previous = current
    assert sum(len(d) for d in previous.values()) < sum(len(d) for d in build_dictionaries([blitzer], min_df=1).values())


def test_default_thresholds_differ_per_space(blitzer):
    dicts = build_dictionaries([blitzer])
    assert dicts["URL"].min_df == 1 and dicts["TITLE"].min_df == 2
    assert "john" in dicts["TITLE"] and "blitzer" in dicts["TITLE"]
    assert "linkedin" not in dicts["TITLE"]


def test_dictionaries_are_deterministic(blitzer):
    assert dictionaries_to_json(build_dictionaries([blitzer])) == dictionaries_to_json(build_dictionaries([blitzer]))


def test_dictionaries_json_round_trip(blitzer):
    dicts = build_dictionaries([blitzer], min_df=1)
    restored = dictionaries_from_json(dictionaries_to_json(dicts))
    assert feature_names(restored) == feature_names(dicts)


def test_empty_corpus_rejected():
    with pytest.raises(InvalidInputError):
        build_dictionaries([])


# ==================== Vectorization ====================

def test_vectorize_homepage_result(blitzer):
    dicts = build_dictionaries([blitzer], min_df=1)
    instance = vectorize(blitzer.page.query, blitzer.page.results[1], dicts, label="homepage")
    dim = total_dimension(dicts)

    assert instance.vector[dim - 2] == 1.0
    assert instance.vector[dim - 1] == 1.0
    assert _tokens_set(instance, dicts, "DOMAIN") == {"john", "blitzer", "com"}
    assert _space_indices(instance, dicts, "URL") == set()
    assert instance.label == "homepage"
    assert instance.result_rank == 2


def test_vectorize_empty_snippet_and_unseen_title(blitzer):
    dicts = build_dictionaries([blitzer], min_df=1)
    query = blitzer.page.query
    result = SearchResult(query.id, 1, "http://www.example.org/", "Quixotic Zephyr", "")
    instance = vectorize(query, result, dicts)
    assert _space_indices(instance, dicts, "SNIPPET") == set()
    assert _space_indices(instance, dicts, "TITLE") == set()


def test_vectorize_needs_author_query(blitzer):
    dicts = build_dictionaries([blitzer], min_df=1)
    from search_gateway import build_title_query
    query = build_title_query("Some Title")
    result = SearchResult(query.id, 1, "http://john.blitzer.com/", "", "")
    with pytest.raises(InvalidInputError):
        vectorize(query, result, dicts)


def test_vector_indices_are_sorted_and_in_range(blitzer):
    dicts = build_dictionaries([blitzer], min_df=1)
    dim = total_dimension(dicts)
    for result in blitzer.page.results:
        vector = vectorize(blitzer.page.query, result, dicts).vector
        assert list(vector) == sorted(vector)
        assert all(0 <= i < dim for i in vector)


# ==================== Preference Pairs ====================

def test_blitzer_preference_pairs(blitzer):
    dicts = build_dictionaries([blitzer], min_df=1)
    pairs = build_preference_pairs(blitzer, dicts)
    assert len(pairs) == 3
    assert {p.preferred.result_rank for p in pairs} == {2}
    assert sorted(p.other.result_rank for p in pairs) == [1, 3, 4]


def test_single_result_page_has_no_pairs(blitzer):
    query = build_author_query("John Blitzer")
    page = ResultPage(query, (SearchResult(query.id, 1, "http://john.blitzer.com/", "Home", ""),))
    labeled = LabeledPage(page=page, author_name="John Blitzer", labels=("homepage",))
    assert build_preference_pairs(labeled, build_dictionaries([labeled], min_df=1)) == []


@pytest.mark.parametrize("labels", [("other",) * 4, ("homepage", "homepage", "other", "other")])
def test_pairs_need_exactly_one_homepage(blitzer, labels):
    relabeled = LabeledPage(page=blitzer.page, author_name=blitzer.author_name, labels=labels)
    with pytest.raises(InvalidLabelingError):
        build_preference_pairs(relabeled, build_dictionaries([blitzer], min_df=1))
