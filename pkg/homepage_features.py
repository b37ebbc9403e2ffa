"""
Homepage Features
=================

Turns (author query, search result) pairs into sparse binary feature vectors
over four term dictionaries plus two name-match features, and builds the
preference pairs the homepage ranker trains on.

Feature layout (global index space):
    [ URL tokens | DOMAIN tokens | TITLE tokens | SNIPPET tokens | has_match | frac_match ]

- URL: path segments split on "/" (leading "~" stripped)
- DOMAIN: host split on "."
- TITLE / SNIPPET: lowercase alphanumeric runs of the page title / snippet
- NAME: has_match (0/1) and frac_match (fraction of name tokens found in the URL)
"""

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union
from urllib.parse import urlsplit

import numpy as np

from search_gateway import LabeledPage, Query, ResultPage, SearchResult
from validators.schema_validators import (
    InvalidInputError,
    InvalidLabelingError,
    InvalidURLError,
)

logger = logging.getLogger(__name__)

SPACES = ("URL", "DOMAIN", "TITLE", "SNIPPET")
NAME_FEATURES = ("has_match", "frac_match")
DEFAULT_MIN_DF = {"URL": 1, "DOMAIN": 1, "TITLE": 2, "SNIPPET": 2}
MIN_SUBSTRING_MATCH = 3
DICTIONARY_FORMAT_VERSION = 1

_TERM = re.compile(r"[^\W_]+", re.UNICODE)
_NAME_PUNCT = re.compile(r"[^\w]+|_", re.UNICODE)


# ==================== Domain Types ====================

@dataclass
class FeatureDictionary:
    """Token -> index map for one feature space; index = position in tokens."""
    space: str
    tokens: List[str] = field(default_factory=list)
    doc_freq: Dict[str, int] = field(default_factory=dict)
    min_df: int = 1

    def __post_init__(self):
        self.token_to_index: Dict[str, int] = {tok: i for i, tok in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    def index(self, token: str) -> Optional[int]:
        return self.token_to_index.get(token)


@dataclass(frozen=True)
class NameMatchFeatures:
    has_match: bool
    frac_match: float
    user_dir_match: bool = False     # a name token matched a "~user" path segment


@dataclass(frozen=True)
class RankInstance:
    """Sparse vector of one result; label is set for training data only."""
    query_id: str
    result_rank: int
    vector: Mapping[int, float]
    label: Optional[str] = None


@dataclass(frozen=True)
class PreferencePair:
    query_id: str
    preferred: RankInstance
    other: RankInstance


Dictionaries = Dict[str, FeatureDictionary]


# ==================== Tokenization ====================

@dataclass(frozen=True)
class UrlTokens:
    """tokenize_url output plus the path tokens that were "~user" directories."""
    domain: Tuple[str, ...]
    path: Tuple[str, ...]
    user_dirs: Tuple[str, ...] = ()


def split_url(url: str) -> UrlTokens:
    """
    Split a URL into domain tokens and path tokens.

    Scheme is stripped, the host split on ".", the path on "/". Tokens are
    lowercased, empty tokens dropped and a leading "~" removed from path tokens;
    the tokens that carried it are kept in user_dirs.

    Args:
        url: URL with or without scheme ("www.cse.iitb.ac.in/~soumen")

    Raises:
        InvalidURLError: No host can be parsed
    """
    if not isinstance(url, str) or not url.strip():
        raise InvalidURLError(str(url), "empty url")
    candidate = url.strip()
    if "://" not in candidate:
        candidate = "http://" + candidate
    try:
        parts = urlsplit(candidate)
        host = parts.hostname
    except ValueError:
        raise InvalidURLError(url)
    if not host:
        raise InvalidURLError(url, "url has no host")

    domain_tokens = [tok for tok in host.lower().split(".") if tok]
    path_tokens: List[str] = []
    user_dirs: List[str] = []
    for segment in parts.path.split("/"):
        segment = segment.lower()
        token = segment.lstrip("~")
        if not token:
            continue
        path_tokens.append(token)
        if segment.startswith("~"):
            user_dirs.append(token)
    return UrlTokens(domain=tuple(domain_tokens), path=tuple(path_tokens), user_dirs=tuple(user_dirs))


def tokenize_url(url: str) -> Tuple[List[str], List[str]]:
    """(domain_tokens, path_tokens) of split_url."""
    tokens = split_url(url)
    return list(tokens.domain), list(tokens.path)


def tokenize_text(text: str) -> List[str]:
    """Lowercase alphanumeric runs; punctuation and whitespace separate tokens."""
    return _TERM.findall((text or "").lower())


def name_tokens(author_name: str) -> List[str]:
    """Whitespace-separated words, lowercased, punctuation removed ("Jean-Luc" -> "jeanluc")."""
    words = (_NAME_PUNCT.sub("", word) for word in (author_name or "").lower().split())
    return [word for word in words if word]


# ==================== Name Match ====================

def _token_matches(name_token: str, url_tokens: Sequence[str]) -> bool:
    for url_token in url_tokens:
        if name_token == url_token:
            return True
        if len(name_token) >= MIN_SUBSTRING_MATCH and name_token in url_token:
            return True
    return False


def name_match_features(author_name: str, url: str) -> NameMatchFeatures:
    """
    Name-match features of a candidate URL.

    A name token matches when it equals a URL token or, being at least three
    characters long, occurs inside one ("nina" matches "ninan").

    Raises:
        InvalidInputError: Name has no tokens
        InvalidURLError: URL cannot be tokenized
    """
    tokens = name_tokens(author_name)
    if not tokens:
        raise InvalidInputError(f"author name has no tokens: {author_name!r}", stage="features")
    url_tokens = split_url(url)
    matched = sum(1 for tok in tokens if _token_matches(tok, url_tokens.domain + url_tokens.path))
    frac = matched / len(tokens)
    user_dir_match = any(_token_matches(tok, url_tokens.user_dirs) for tok in tokens)
    return NameMatchFeatures(has_match=frac > 0, frac_match=frac, user_dir_match=user_dir_match)


# ==================== Dictionaries ====================

def _result_tokens(result: SearchResult) -> Dict[str, List[str]]:
    try:
        domain_tokens, path_tokens = tokenize_url(result.url)
    except InvalidURLError:
        domain_tokens, path_tokens = [], []
    return {
        "URL": path_tokens,
        "DOMAIN": domain_tokens,
        "TITLE": tokenize_text(result.page_title),
        "SNIPPET": tokenize_text(result.snippet),
    }


def _as_result_page(page: Union[LabeledPage, ResultPage]) -> ResultPage:
    return page.page if isinstance(page, LabeledPage) else page


def _resolve_min_df(min_df: Union[None, int, Mapping[str, int]]) -> Dict[str, int]:
    if min_df is None:
        resolved = dict(DEFAULT_MIN_DF)
    elif isinstance(min_df, int):
        resolved = {space: min_df for space in SPACES}
    else:
        resolved = {space: int(min_df.get(space, DEFAULT_MIN_DF[space])) for space in SPACES}
    for space, value in resolved.items():
        if value < 1:
            raise InvalidInputError(f"min_df for {space} must be >= 1, got {value}", stage="features")
    return resolved


def build_dictionaries(training_pages: Sequence[Union[LabeledPage, ResultPage]],
                       min_df: Union[None, int, Mapping[str, int]] = None) -> Dictionaries:
    """
    Build the four term dictionaries from a training corpus.

    Document frequency counts results containing a token. Tokens below the
    space's min_df are dropped; retained tokens are indexed in first-seen order.

    Args:
        training_pages: Labeled (or plain) result pages
        min_df: One threshold for every space, a per-space map, or None for
            the defaults (1 for URL/DOMAIN, 2 for TITLE/SNIPPET)

    Returns:
        Map space -> FeatureDictionary

    Raises:
        InvalidInputError: Empty corpus or min_df < 1
    """
    thresholds = _resolve_min_df(min_df)
    pages = [_as_result_page(p) for p in training_pages]
    if not pages or not any(page.results for page in pages):
        raise InvalidInputError("cannot build dictionaries from an empty corpus", stage="features")

    first_seen: Dict[str, List[str]] = {space: [] for space in SPACES}
    doc_freq: Dict[str, Dict[str, int]] = {space: {} for space in SPACES}
    for page in pages:
        for result in page.results:
            for space, tokens in _result_tokens(result).items():
                counts = doc_freq[space]
                for token in dict.fromkeys(tokens):
                    if token not in counts:
                        counts[token] = 0
                        first_seen[space].append(token)
                    counts[token] += 1

    dicts: Dictionaries = {}
    for space in SPACES:
        kept = [tok for tok in first_seen[space] if doc_freq[space][tok] >= thresholds[space]]
        dicts[space] = FeatureDictionary(
            space=space,
            tokens=kept,
            doc_freq={tok: doc_freq[space][tok] for tok in kept},
            min_df=thresholds[space],
        )
    logger.debug("Built dictionaries: %s", {s: len(d) for s, d in dicts.items()})
    return dicts


def space_offsets(dicts: Dictionaries) -> Dict[str, int]:
    offsets, position = {}, 0
    for space in SPACES:
        offsets[space] = position
        position += len(dicts[space])
    return offsets


def total_dimension(dicts: Dictionaries) -> int:
    """Term dictionary sizes plus the two name-match features."""
    return sum(len(dicts[space]) for space in SPACES) + len(NAME_FEATURES)


def feature_names(dicts: Dictionaries) -> List[str]:
    """Names "SPACE:token" for every index, ending with NAME:has_match, NAME:frac_match."""
    names = [f"{space}:{token}" for space in SPACES for token in dicts[space].tokens]
    return names + [f"NAME:{name}" for name in NAME_FEATURES]


def dictionaries_to_json(dicts: Dictionaries) -> Dict[str, object]:
    return {
        "format_version": DICTIONARY_FORMAT_VERSION,
        **{
            space: {
                "min_df": dicts[space].min_df,
                "tokens": list(dicts[space].tokens),
                "doc_freq": [dicts[space].doc_freq.get(tok, 0) for tok in dicts[space].tokens],
            }
            for space in SPACES
        },
    }


def dictionaries_from_json(data: Mapping[str, object]) -> Dictionaries:
    dicts: Dictionaries = {}
    for space in SPACES:
        entry = data.get(space)
        if not isinstance(entry, dict) or not isinstance(entry.get("tokens"), list):
            raise InvalidInputError(f"dictionary JSON missing space {space!r}", stage="features")
        tokens = [str(tok) for tok in entry["tokens"]]
        freqs = entry.get("doc_freq") or [0] * len(tokens)
        dicts[space] = FeatureDictionary(space=space, tokens=tokens,
                                         doc_freq=dict(zip(tokens, (int(f) for f in freqs))),
                                         min_df=int(entry.get("min_df", 1)))
    return dicts


def save_dictionaries(dicts: Dictionaries, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(dictionaries_to_json(dicts), f, ensure_ascii=False, indent=2)


def load_dictionaries(path: str) -> Dictionaries:
    with open(path, "r", encoding="utf-8") as f:
        return dictionaries_from_json(json.load(f))


# ==================== Vectorization ====================

def vectorize(query: Query, result: SearchResult, dicts: Dictionaries,
              label: Optional[str] = None) -> RankInstance:
    """
    Binary term presence per space plus the two name-match features.
    Out-of-dictionary tokens are ignored.

    Raises:
        InvalidInputError: Query is not an author query
    """
    if query.kind != "author":
        raise InvalidInputError(f"vectorize needs an author query, got {query.kind!r}", stage="features")

    offsets = space_offsets(dicts)
    vector: Dict[int, float] = {}
    for space, tokens in _result_tokens(result).items():
        dictionary = dicts[space]
        for token in tokens:
            idx = dictionary.index(token)
            if idx is not None:
                vector[offsets[space] + idx] = 1.0

    dim = total_dimension(dicts)
    try:
        match = name_match_features(query.raw_text, result.url)
    except (InvalidInputError, InvalidURLError):
        match = NameMatchFeatures(False, 0.0)
    if match.has_match:
        vector[dim - 2] = 1.0
    if match.frac_match > 0:
        vector[dim - 1] = match.frac_match

    return RankInstance(query_id=query.id, result_rank=result.rank,
                        vector=dict(sorted(vector.items())), label=label)


def vectorize_page(page: Union[LabeledPage, ResultPage], dicts: Dictionaries) -> List[RankInstance]:
    """One RankInstance per result, in rank order (labels attached for LabeledPage)."""
    if isinstance(page, LabeledPage):
        return [vectorize(page.page.query, result, dicts, label=label)
                for result, label in zip(page.page.results, page.labels)]
    return [vectorize(page.query, result, dicts) for result in page.results]


def build_preference_pairs(page: LabeledPage, dicts: Dictionaries) -> List[PreferencePair]:
    """
    One pair (homepage, other) per non-homepage result; no preferences are
    expressed among the non-homepages.

    Raises:
        InvalidLabelingError: Page has zero or several homepage labels
    """
    homepage_indices = page.homepage_indices()
    if len(homepage_indices) != 1:
        raise InvalidLabelingError(page.query_id, len(homepage_indices))

    instances = vectorize_page(page, dicts)
    preferred = instances[homepage_indices[0]]
    return [
        PreferencePair(query_id=page.query_id, preferred=preferred, other=instance)
        for i, instance in enumerate(instances)
        if i != homepage_indices[0]
    ]


def build_all_pairs(pages: Iterable[LabeledPage], dicts: Dictionaries) -> List[PreferencePair]:
    pairs: List[PreferencePair] = []
    for page in pages:
        pairs.extend(build_preference_pairs(page, dicts))
    return pairs


def dense_matrix(instances: Sequence[RankInstance], dim: int) -> np.ndarray:
    """Stack sparse instances into a (len(instances), dim) float matrix."""
    matrix = np.zeros((len(instances), dim), dtype=float)
    for row, instance in enumerate(instances):
        for idx, value in instance.vector.items():
            if idx >= dim:
                raise InvalidInputError(f"feature index {idx} >= dim {dim}", stage="features")
            matrix[row, idx] = value
    return matrix


__all__ = [
    "SPACES",
    "NAME_FEATURES",
    "DEFAULT_MIN_DF",
    "LabeledPage",
    "FeatureDictionary",
    "NameMatchFeatures",
    "RankInstance",
    "PreferencePair",
    "UrlTokens",
    "split_url",
    "tokenize_url",
    "name_tokens",
    "tokenize_text",
    "name_match_features",
    "build_dictionaries",
    "space_offsets",
    "total_dimension",
    "feature_names",
    "dictionaries_to_json",
    "dictionaries_from_json",
    "save_dictionaries",
    "load_dictionaries",
    "vectorize",
    "vectorize_page",
    "build_preference_pairs",
    "build_all_pairs",
    "dense_matrix",
]
