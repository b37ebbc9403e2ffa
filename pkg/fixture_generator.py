"""
Fixture Generator
=================

Deterministic desk-scale stand-ins for the datasets the harvester is trained
and evaluated on. generate_fixtures(spec, out_dir) writes:

    homepage_search.jsonl   labeled author-search pages (ranker training data)
    documents.jsonl         labeled pre-extracted documents (classifier data)
    search_fixture.jsonl    title and author queries of the pipeline run
    site_map.json           servable mini-web: homepages, publication pages, PDFs
    titles.txt, names.txt   Path 1 / Path 2 inputs
    targets.jsonl           target titles with authors
    ground_truth.json       expected manifest, crawl oracle and intended set
    pipeline.toml           configuration wired to the files above
    fixture_spec.json       the FixtureSpec that produced them

Noise recipe of the homepage data:
- about one distractor per query carries the author's name in its URL
  (LinkedIn, DBLP, ResearchGate, Facebook)
- homepage titles and snippets draw from a spread vocabulary; distractor
  snippets borrow homepage phrases with probability vocab_noise
- hard_query_ratio of the queries hold a namesake's homepage ranked above the
  true one, built from the same templates (indistinguishable once the
  institution tokens are out of vocabulary)

Documents of the mini-web are clean prototypes; the labeled document set
carries document_noise hard cases per class.
"""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from crawler import canonicalize_url
from doc_model import TitleRecord, normalize_title
from docstore import PATH1, PATH2, DocumentRecord, Provenance, Target, compute_manifest
from search_gateway import (
    SearchResult,
    ResultPage,
    build_author_query,
    build_title_query,
    page_to_record,
)
from validators.schema_validators import InvalidInputError

logger = logging.getLogger(__name__)

HOMEPAGE_FILE = "homepage_search.jsonl"
DOCUMENTS_FILE = "documents.jsonl"
SEARCH_FILE = "search_fixture.jsonl"
SITE_MAP_FILE = "site_map.json"
TITLES_FILE = "titles.txt"
NAMES_FILE = "names.txt"
TARGETS_FILE = "targets.jsonl"
GROUND_TRUTH_FILE = "ground_truth.json"
CONFIG_FILE = "pipeline.toml"
SPEC_FILE = "fixture_spec.json"

MIRROR_HOST = "papers.mirrorarchive.org"
PUBLISHER_HOST = "www.openproceedings.org"
CITESEER_HOST = "citeseerx.ist.psu.edu"
EMPTY_RESULT_NAME = "Nobody Inparticular"

FIRST_NAMES = [
    "john", "maria", "soumen", "nina", "oliver", "amelia", "rahul", "elena", "thomas", "chiara",
    "david", "sophie", "kenji", "laura", "pavel", "ingrid", "miguel", "hannah", "arjun", "clara",
    "peter", "yasmin", "felix", "irene", "samuel", "lucia", "victor", "agnes", "martin", "rosa",
    "daniel", "petra", "hector", "alina", "simon", "greta", "walter", "naomi", "oscar", "julia",
]
LAST_NAMES = [
    "blitzer", "chakrabarti", "novak", "lindqvist", "moreau", "takahashi", "okafor", "petrov",
    "schneider", "fernandes", "kowalski", "haddad", "nakamura", "brennan", "rossi", "andersen",
    "gallagher", "mehta", "dubois", "horvath", "castillo", "weber", "jansen", "tanaka", "marino",
    "svensson", "abbott", "kaplan", "duarte", "ivanova", "lambert", "whitaker", "quinn", "holm",
    "barros", "fischer", "moretti", "sato", "kruger", "vidal",
]
DEPARTMENTS = [
    ("cs", "Computer Science"),
    ("cse", "Computer Science and Engineering"),
    ("ece", "Electrical and Computer Engineering"),
    ("stat", "Statistics"),
    ("math", "Mathematics"),
    ("info", "Information Science"),
]
TOPICS = [
    "machine learning", "information retrieval", "databases", "computer vision",
    "natural language processing", "distributed systems", "program verification",
    "computational biology", "web search", "data mining",
]
SYLLABLES = ["ka", "ri", "mo", "tel", "van", "dor", "lis", "pra", "ne", "sto",
             "bel", "qui", "mar", "zen", "fo", "lu", "gri", "hal", "no", "ves"]

TITLE_ADJECTIVES = ["Adaptive", "Scalable", "Efficient", "Robust", "Probabilistic", "Distributed",
                    "Semantic", "Sparse", "Bayesian", "Structured", "Parallel", "Incremental"]
TITLE_NOUNS = ["Ranking", "Retrieval", "Networks", "Graphs", "Inference", "Optimization",
               "Crawling", "Indexing", "Embeddings", "Queries", "Streams", "Kernels",
               "Compression", "Caching", "Verification", "Synthesis", "Satisfiability", "Clustering"]
TITLE_PATTERNS = ["{A} {N} for {N} {N}", "{N} {N} with {A} {N}", "Towards {A} {N} {N}",
                  "On the {N} of {A} {N}", "{A} {N} and {N} in {A} {N}"]

BODY_WORDS = ["we", "propose", "method", "results", "show", "data", "approach", "evaluate",
              "experiments", "system", "performance", "based", "improves", "study", "analysis",
              "framework", "previous", "work", "these", "using", "large", "set", "problem",
              "present", "describe", "our", "new", "algorithm", "accuracy", "baseline", "compare",
              "that", "can", "each", "which", "over", "while", "both", "also", "many", "several",
              "task", "real", "world", "use", "first", "second", "finally", "example", "shown"]

HOME_TITLE_FORMS = ["{F} {L}", "{F} {L}'s Home Page", "{F} {L} - Homepage", "{F} {L} | {D}",
                    "Welcome to {F} {L}'s page", "{F} {L}, Professor of {D}"]
HOME_TITLE_WEIGHTS = [0.25, 0.2, 0.15, 0.15, 0.1, 0.15]
HOME_SENTENCES = [
    "{F} {L} is an associate professor in the Department of {D} at {U} University.",
    "I am a professor of {D} at {U} University.",
    "My research interests include {T1} and {T2}.",
    "Publications, teaching and current students.",
    "Welcome to my home page.",
    "I lead the {T1} group.",
    "Curriculum vitae and recent talks.",
    "Office hours are listed on the teaching page.",
]
EDU_URL_FORMS = ("tilde_full", "tilde_last", "people", "lab")
URL_FORMS = EDU_URL_FORMS + ("personal_com", "personal_dot")
URL_FORM_WEIGHTS = [0.35, 0.12, 0.13, 0.08, 0.17, 0.15]
HOMEPAGE_RANK_WEIGHTS = np.array([0.35, 0.2, 0.12, 0.08, 0.06, 0.05, 0.04, 0.04, 0.03, 0.03])


# ==================== FixtureSpec ====================

@dataclass
class FixtureSpec:
    seed: int = 7
    n_authors: int = 200
    results_per_query: int = 10
    hard_query_ratio: float = 0.08
    vocab_noise: float = 0.05
    n_documents: int = 420
    paper_ratio: float = 0.5
    document_noise: float = 0.04
    n_pipeline_authors: int = 6
    papers_per_author: Tuple[int, int] = (3, 5)
    n_title_queries: int = 10
    n_unfindable_targets: int = 2
    exclude_domains: Tuple[str, ...] = (CITESEER_HOST,)
    snippet_sentences: Tuple[int, int] = (2, 3)

    def __post_init__(self):
        if self.n_authors < 0 or self.n_documents < 0 or self.n_pipeline_authors < 0:
            raise InvalidInputError("fixture sizes must be >= 0", stage="fixtures")
        if self.results_per_query < 3:
            raise InvalidInputError("results_per_query must be >= 3", stage="fixtures")
        if self.n_authors + self.n_pipeline_authors > len(FIRST_NAMES) * len(LAST_NAMES):
            raise InvalidInputError("not enough distinct author names for the requested sizes", stage="fixtures")
        if not 0.0 <= self.hard_query_ratio <= 1.0 or not 0.0 <= self.vocab_noise <= 1.0:
            raise InvalidInputError("ratios must lie in [0, 1]", stage="fixtures")
        if not 0.0 < self.paper_ratio < 1.0:
            raise InvalidInputError("paper_ratio must lie in (0, 1)", stage="fixtures")
        self.papers_per_author = tuple(self.papers_per_author)
        self.exclude_domains = tuple(self.exclude_domains)
        self.snippet_sentences = tuple(self.snippet_sentences)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ("papers_per_author", "exclude_domains", "snippet_sentences"):
            data[key] = list(data[key])
        return data


@dataclass
class GeneratedFixtures:
    out_dir: str
    files: Dict[str, str]
    ground_truth: Dict[str, Any]


# ==================== Random Helpers ====================

def _pick(rng: np.random.Generator, items: Sequence[Any]) -> Any:
    return items[int(rng.integers(len(items)))]


def _weighted(rng: np.random.Generator, items: Sequence[Any], weights: Sequence[float]) -> Any:
    p = np.asarray(weights, dtype=float)
    return items[int(rng.choice(len(items), p=p / p.sum()))]


def _sentence(rng: np.random.Generator, n_words: int, prefix: str = "") -> str:
    words = [_pick(rng, BODY_WORDS) for _ in range(n_words)]
    text = " ".join(words)
    if prefix:
        return f"{prefix} {text}."
    return text[:1].upper() + text[1:] + "."


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class _Namer:
    """Unique institution names and titles shared by every generator of one run."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self._institutions = set()
        self._titles: List[str] = []
        self._reserved = set(FIRST_NAMES) | set(LAST_NAMES) | set(BODY_WORDS)

    def institution(self) -> str:
        while True:
            n = int(self.rng.integers(2, 4))
            name = "".join(_pick(self.rng, SYLLABLES) for _ in range(n))
            if name not in self._institutions and name not in self._reserved:
                self._institutions.add(name)
                return name

    def title(self) -> str:
        """A paper title; no title is a word-substring of another."""
        while True:
            pattern = _pick(self.rng, TITLE_PATTERNS)
            title = pattern
            while "{A}" in title or "{N}" in title:
                if "{A}" in title:
                    title = title.replace("{A}", _pick(self.rng, TITLE_ADJECTIVES), 1)
                if "{N}" in title:
                    title = title.replace("{N}", _pick(self.rng, TITLE_NOUNS), 1)
            norm = f" {normalize_title(title)} "
            if any(norm in f" {t} " or f" {t} " in norm for t in self._titles):
                continue
            self._titles.append(normalize_title(title))
            return title


# ==================== People & Search Results ====================

@dataclass
class _Person:
    first: str
    last: str
    univ: str
    dept: Tuple[str, str]
    topics: Tuple[str, str]
    url_form: str = "tilde_full"
    title_form: int = 1
    sentences: Tuple[int, ...] = (0, 2)

    @property
    def name(self) -> str:
        return f"{self.first.title()} {self.last.title()}"

    def fill(self, template: str) -> str:
        return template.format(F=self.first.title(), L=self.last.title(), D=self.dept[1],
                               U=self.univ.title(), T1=self.topics[0], T2=self.topics[1])

    def homepage_url(self) -> str:
        code, first, last, univ = self.dept[0], self.first, self.last, self.univ
        return {
            "tilde_full": f"http://www.{code}.{univ}.edu/~{first}{last}/",
            "tilde_last": f"http://www.{code}.{univ}.edu/~{last}/",
            "people": f"https://www.{code}.{univ}.edu/people/{first}-{last}/",
            "lab": f"https://{code}lab.{univ}.edu/people/{last}/",
            "personal_com": f"http://www.{first}{last}.com/",
            "personal_dot": f"https://{first}.{last}.net/",
        }[self.url_form]

    def homepage_result(self) -> Tuple[str, str, str]:
        title = self.fill(HOME_TITLE_FORMS[self.title_form])
        snippet = " ".join(self.fill(HOME_SENTENCES[i]) for i in self.sentences)
        return self.homepage_url(), title, snippet


def _random_person(rng: np.random.Generator, namer: _Namer, name: Tuple[str, str]) -> _Person:
    topics = rng.choice(len(TOPICS), size=2, replace=False)
    return _Person(first=name[0], last=name[1], univ=namer.institution(), dept=_pick(rng, DEPARTMENTS),
                   topics=(TOPICS[int(topics[0])], TOPICS[int(topics[1])]))


def _d_linkedin(p: _Person, rng: np.random.Generator, namer: _Namer) -> Tuple[str, str, str]:
    n = int(rng.integers(10, 999))
    return (f"https://www.linkedin.com/in/{p.first}-{p.last}-{n}",
            f"{p.name} - Senior Engineer - LinkedIn",
            f"View {p.name}'s profile on LinkedIn, the world's largest professional community. "
            f"{p.first.title()} has {n % 9 + 1} jobs listed on their profile.")


def _d_dblp(p: _Person, rng: np.random.Generator, namer: _Namer) -> Tuple[str, str, str]:
    return (f"https://dblp.uni-trier.de/pers/hd/{p.last[0]}/{p.last.title()}:{p.first.title()}",
            f"dblp: {p.name}",
            f"List of computer science publications by {p.name}.")


def _d_researchgate(p: _Person, rng: np.random.Generator, namer: _Namer) -> Tuple[str, str, str]:
    return (f"https://www.researchgate.net/profile/{p.first.title()}_{p.last.title()}",
            f"{p.name} | ResearchGate",
            f"{p.name} on ResearchGate, the professional network for scientists.")


def _d_facebook(p: _Person, rng: np.random.Generator, namer: _Namer) -> Tuple[str, str, str]:
    n = int(rng.integers(100, 9999))
    return (f"https://www.facebook.com/{p.first}.{p.last}.{n}",
            f"{p.name} | Facebook",
            f"{p.name} is on Facebook. Join Facebook to connect with {p.name} and others you may know.")


def _d_scholar(p: _Person, rng: np.random.Generator, namer: _Namer) -> Tuple[str, str, str]:
    user = "".join(_pick(rng, "abcdefghijklmnopqrstuvwxyz") for _ in range(8))
    return (f"https://scholar.google.com/citations?user={user}",
            f"{p.name} - Google Scholar Citations",
            f"{p.name}. {p.topics[0].title()}. Cited by {int(rng.integers(10, 5000))}.")


def _d_wikipedia(p: _Person, rng: np.random.Generator, namer: _Namer) -> Tuple[str, str, str]:
    topic = _pick(rng, TOPICS)
    return (f"https://en.wikipedia.org/wiki/{topic.title().replace(' ', '_')}",
            f"{topic.title()} - Wikipedia",
            f"{topic.capitalize()} is a field of study. Notable contributors include {p.name}.")


def _d_news(p: _Person, rng: np.random.Generator, namer: _Namer) -> Tuple[str, str, str]:
    univ = namer.institution()
    year = int(rng.integers(2005, 2020))
    return (f"https://news.{univ}.edu/{year}/award-{p.topics[0].replace(' ', '-')}",
            f"{univ.title()} News: {p.topics[0]} award",
            f"Professor {p.name} received the {year} award for work on {p.topics[0]}.")


def _d_conference(p: _Person, rng: np.random.Generator, namer: _Namer) -> Tuple[str, str, str]:
    conf = _pick(rng, ["kdd", "sigir", "icml", "vldb", "cikm", "wsdm"])
    year = int(rng.integers(2005, 2020))
    return (f"http://www.{conf}{year}.org/program.html",
            f"{conf.upper()} {year} Program",
            f"Session 4: {p.topics[0]}. Speakers include {p.name} and others.")


def _d_coauthor(p: _Person, rng: np.random.Generator, namer: _Namer) -> Tuple[str, str, str]:
    other = _random_person(rng, namer, (_pick(rng, FIRST_NAMES), _pick(rng, LAST_NAMES)))
    if other.last == p.last or other.first == p.first:
        other.last = "okonkwo" if p.last != "okonkwo" else "lindgren"
    url = f"http://www.{other.dept[0]}.{other.univ}.edu/~{other.first}{other.last}/"
    return (url, f"{other.name}'s Home Page",
            f"{other.name}, professor of {other.dept[1]}. Joint work with {p.name} on {p.topics[0]}.")


def _d_course(p: _Person, rng: np.random.Generator, namer: _Namer) -> Tuple[str, str, str]:
    univ = namer.institution()
    num = int(rng.integers(100, 700))
    return (f"http://www.{univ}.edu/courses/{p.dept[0]}{num}/",
            f"{p.dept[0].upper()} {num}: {p.topics[0].title()}",
            f"Instructor: {p.name}. Lectures, homework and exams for {p.topics[0]}.")


def _d_amazon(p: _Person, rng: np.random.Generator, namer: _Namer) -> Tuple[str, str, str]:
    n = int(rng.integers(1000000, 9999999))
    return (f"https://www.amazon.com/dp/{n}",
            f"Introduction to {p.topics[0].title()}: Amazon.com: Books",
            f"Introduction to {p.topics[0]} by {p.name} and others. Paperback.")


NAME_MATCH_DISTRACTORS = [(_d_linkedin, 0.4), (_d_dblp, 0.35), (_d_researchgate, 0.2), (_d_facebook, 0.1)]
OTHER_DISTRACTORS = [_d_scholar, _d_wikipedia, _d_news, _d_conference, _d_coauthor, _d_course, _d_amazon]


def _distractors(p: _Person, count: int, rng: np.random.Generator, namer: _Namer,
                 vocab_noise: float) -> List[Tuple[str, str, str]]:
    chosen = [make for make, prob in NAME_MATCH_DISTRACTORS if rng.random() < prob][:count]
    while len(chosen) < count:
        chosen.append(_pick(rng, OTHER_DISTRACTORS))
    results = []
    for make in chosen:
        url, title, snippet = make(p, rng, namer)
        if rng.random() < vocab_noise:
            snippet = f"{snippet} {_pick(rng, ['Welcome to my home page.', 'Publications and teaching.'])}"
        results.append((url, title, snippet))
    order = rng.permutation(len(results))
    return [results[int(i)] for i in order]


def _assemble_page(name: str, slots: Dict[int, Tuple[str, str, str]], labels: Dict[int, str],
                   top_k: int) -> Tuple[ResultPage, List[str]]:
    query = build_author_query(name, top_k=top_k)
    results = [SearchResult(query_id=query.id, rank=rank, url=url, page_title=title, snippet=snippet)
               for rank, (url, title, snippet) in sorted(slots.items())]
    page = ResultPage(query=query, results=tuple(results))
    return page, [labels.get(r.rank, "other") for r in results]


def _unique_names(rng: np.random.Generator, count: int, exclude: set) -> List[Tuple[str, str]]:
    names: List[Tuple[str, str]] = []
    seen = set(exclude)
    while len(names) < count:
        name = (_pick(rng, FIRST_NAMES), _pick(rng, LAST_NAMES))
        if name not in seen:
            seen.add(name)
            names.append(name)
    return names


def generate_homepage_pages(spec: FixtureSpec, namer: _Namer,
                            rng: np.random.Generator) -> Tuple[List[Dict[str, Any]], List[str]]:
    """Labeled author-search records plus the ids of the hard (namesake) queries."""
    k = spec.results_per_query
    rank_weights = HOMEPAGE_RANK_WEIGHTS[:k] / HOMEPAGE_RANK_WEIGHTS[:k].sum()
    records: List[Dict[str, Any]] = []
    hard_ids: List[str] = []
    for first, last in _unique_names(rng, spec.n_authors, set()):
        person = _random_person(rng, namer, (first, last))
        person.url_form = _weighted(rng, URL_FORMS, URL_FORM_WEIGHTS)
        person.title_form = int(rng.choice(len(HOME_TITLE_FORMS), p=np.asarray(HOME_TITLE_WEIGHTS)))
        n_sent = int(rng.integers(spec.snippet_sentences[0], spec.snippet_sentences[1] + 1))
        person.sentences = tuple(sorted(int(i) for i in rng.choice(len(HOME_SENTENCES), size=n_sent,
                                                                   replace=False)))
        hard = person.url_form in EDU_URL_FORMS and rng.random() < spec.hard_query_ratio / 0.68

        slots: Dict[int, Tuple[str, str, str]] = {}
        if hard:
            home_rank = int(rng.choice(np.arange(2, k + 1), p=rank_weights[1:] / rank_weights[1:].sum()))
            decoy_rank = int(rng.integers(1, home_rank))
            namesake = _Person(first=first, last=last, univ=namer.institution(), dept=person.dept,
                               topics=person.topics, url_form=person.url_form,
                               title_form=person.title_form, sentences=person.sentences)
            slots[decoy_rank] = namesake.homepage_result()
        else:
            home_rank = int(rng.choice(np.arange(1, k + 1), p=rank_weights))
        slots[home_rank] = person.homepage_result()

        free = [r for r in range(1, k + 1) if r not in slots]
        for rank, result in zip(free, _distractors(person, len(free), rng, namer, spec.vocab_noise)):
            slots[rank] = result
        page, labels = _assemble_page(person.name, slots, {home_rank: "homepage"}, k)
        if hard:
            hard_ids.append(page.query.id)
        records.append(page_to_record(page, labels=labels, name=person.name))
    return records, hard_ids


# ==================== Documents ====================

def _pages_from_lines(lines: List[str], per_page: int) -> List[List[str]]:
    return [lines[i:i + per_page] for i in range(0, len(lines), per_page)] or [[]]


def _references(rng: np.random.Generator, n: int) -> List[str]:
    refs = []
    for i in range(1, n + 1):
        author = f"{_pick(rng, FIRST_NAMES)[0].upper()}. {_pick(rng, LAST_NAMES).title()}"
        refs.append(f"[{i}] {author}. {_sentence(rng, int(rng.integers(4, 8)))} "
                    f"In Proceedings of {_pick(rng, ['KDD', 'SIGIR', 'ICML', 'VLDB'])}, "
                    f"{int(rng.integers(1995, 2020))}.")
    return refs


def paper_document(doc_id: str, title: str, authors: Sequence[str], affiliation: str,
                   rng: np.random.Generator, clean: bool = True, self_reference: str = "paper") -> Dict[str, Any]:
    """A research paper in the pre-extracted format; title alone on the first line of page 1."""
    email = f"{authors[0].split()[-1].lower()}@{affiliation.split()[0].lower()}.edu"
    this_phrase = clean or rng.random() < 0.85
    numbered = clean or rng.random() < 0.9
    with_ack = clean or rng.random() < 0.6
    opening = f"In this {self_reference} we" if this_phrase else "We"
    abstract = [_sentence(rng, int(rng.integers(10, 16)), prefix=opening)]
    abstract += [_sentence(rng, int(rng.integers(10, 16))) for _ in range(3)]

    def heading(n: int, text: str) -> str:
        return f"{n} {text}" if numbered else text

    first_page = [title, "", ", ".join(authors), f"Department of Computer Science, {affiliation}", email, "",
                  "Abstract", *abstract, "", heading(1, "Introduction")]
    first_page += [_sentence(rng, int(rng.integers(10, 16))) for _ in range(8)]

    n_pages = int(rng.integers(6, 11))
    sections = ["Related Work", "Approach", "Experiments", "Results", "Conclusion"]
    body: List[str] = []
    for idx, section in enumerate(sections, start=2):
        body.append(heading(idx, section))
        body += [_sentence(rng, int(rng.integers(10, 16))) for _ in range(int(rng.integers(20, 36)))]
    if with_ack:
        body += ["Acknowledgments", _sentence(rng, 12)]
    body += ["References", *_references(rng, int(rng.integers(8, 16)))]
    per_page = max(10, len(body) // max(1, n_pages - 1) + 1)
    pages = [first_page] + _pages_from_lines(body, per_page)
    return {"doc_id": doc_id, "byte_size": int(rng.integers(150, 700)) * 1024, "pages": pages}


def extended_abstract_document(doc_id: str, title: str, authors: Sequence[str],
                               rng: np.random.Generator) -> Dict[str, Any]:
    """Two-page paper without the usual section structure (a hard positive)."""
    lines = [title, "", ", ".join(authors), ""]
    lines += [_sentence(rng, int(rng.integers(3, 7))) for _ in range(int(rng.integers(15, 30)))]
    return {"doc_id": doc_id, "byte_size": int(rng.integers(40, 120)) * 1024,
            "pages": _pages_from_lines(lines, 20)}


def slides_document(doc_id: str, title: str, author: str, rng: np.random.Generator,
                    clean: bool = True) -> Dict[str, Any]:
    pages = [[title, author, f"{_pick(rng, ['KDD', 'SIGIR', 'ICML'])} {int(rng.integers(2005, 2020))}"]]
    headings = ["Outline", "Motivation", "Introduction", "Problem", "Our Approach", "Results",
                "Evaluation", "Related Work", "Summary", "Future Work"]
    for _ in range(int(rng.integers(12, 30))):
        heading = _pick(rng, headings)
        if rng.random() < 0.3:
            heading = heading.upper()
        bullets = [f"• {_sentence(rng, int(rng.integers(2, 5)))}" for _ in range(int(rng.integers(3, 6)))]
        pages.append([heading, *bullets])
    if not clean and rng.random() < 0.2:
        pages.append(["References", *_references(rng, 3)])
    pages.append(["Thank you", "Questions?"])
    return {"doc_id": doc_id, "byte_size": int(rng.integers(300, 4000)) * 1024, "pages": pages}


def cv_document(doc_id: str, name: str, affiliation: str, rng: np.random.Generator) -> Dict[str, Any]:
    handle = name.split()[-1].lower()
    lines = ["Curriculum Vitae", name, f"Department of Computer Science, {affiliation}",
             f"{handle}@{affiliation.split()[0].lower()}.edu", f"http://www.{affiliation.split()[0].lower()}.edu/~{handle}",
             "", "EDUCATION"]
    for year in sorted(rng.integers(1995, 2015, size=3).tolist()):
        lines.append(f"{year} {_sentence(rng, 5)}")
    lines.append("EMPLOYMENT")
    lines += [f"• {_sentence(rng, int(rng.integers(4, 8)))}" for _ in range(int(rng.integers(3, 6)))]
    lines.append("PUBLICATIONS")
    lines += _references(rng, int(rng.integers(8, 25)))
    lines.append("AWARDS")
    lines += [f"• {_sentence(rng, 4)}" for _ in range(3)]
    return {"doc_id": doc_id, "byte_size": int(rng.integers(40, 200)) * 1024,
            "pages": _pages_from_lines(lines, 18)}


def thesis_document(doc_id: str, title: str, name: str, affiliation: str,
                    rng: np.random.Generator) -> Dict[str, Any]:
    pages = [[title, "", "A Thesis Submitted in Partial Fulfillment of the Requirements",
              "for the Degree of Doctor of Philosophy", "", name, "", affiliation,
              str(int(rng.integers(2000, 2020)))]]
    pages.append(["Acknowledgments", *[_sentence(rng, 12) for _ in range(6)]])
    n_chapters = int(rng.integers(4, 7))
    pages.append(["Table of Contents", *[f"{i} {_pick(rng, ['Introduction', 'Background', 'Methods', 'Evaluation', 'Conclusion'])} {i * 12}"
                                         for i in range(1, n_chapters + 1)]])
    pages.append(["Abstract", _sentence(rng, 14, prefix="This thesis"),
                  *[_sentence(rng, 14) for _ in range(8)]])
    for chapter in range(1, n_chapters + 1):
        lines = [f"Chapter {chapter}", "Introduction" if chapter == 1 else _pick(rng, ["Background", "Methods", "Evaluation"])]
        lines += [_sentence(rng, int(rng.integers(10, 16))) for _ in range(int(rng.integers(60, 110)))]
        pages += _pages_from_lines(lines, 18)
    pages.append(["Bibliography", *_references(rng, int(rng.integers(20, 40)))])
    return {"doc_id": doc_id, "byte_size": int(rng.integers(1000, 5000)) * 1024, "pages": pages}


def syllabus_document(doc_id: str, rng: np.random.Generator) -> Dict[str, Any]:
    dept, dept_name = _pick(rng, DEPARTMENTS)
    topic = _pick(rng, TOPICS)
    lines = [f"{dept.upper()} {int(rng.integers(100, 700))}: {topic.title()}", "Course Syllabus",
             f"Instructor: {_pick(rng, FIRST_NAMES).title()} {_pick(rng, LAST_NAMES).title()}",
             "Office hours: Tuesday 2-4pm", "", "Course Description",
             *[_sentence(rng, 12) for _ in range(5)], "Grading",
             *[f"• {_sentence(rng, 3)}" for _ in range(4)], "Schedule"]
    lines += [f"Week {w}: {_sentence(rng, 4)}" for w in range(1, int(rng.integers(10, 15)))]
    return {"doc_id": doc_id, "byte_size": int(rng.integers(30, 150)) * 1024,
            "pages": _pages_from_lines(lines, 20)}


def poster_document(doc_id: str, title: str, author: str, rng: np.random.Generator) -> Dict[str, Any]:
    lines = [title.upper(), author, "INTRODUCTION", *[_sentence(rng, 8) for _ in range(3)],
             "METHODS", *[f"• {_sentence(rng, 4)}" for _ in range(4)],
             "RESULTS", *[f"• {_sentence(rng, 4)}" for _ in range(4)],
             "REFERENCES", *_references(rng, 3)]
    return {"doc_id": doc_id, "byte_size": int(rng.integers(500, 3000)) * 1024, "pages": [lines]}


NON_PAPER_KINDS = ("slides", "cv", "thesis", "syllabus", "poster")
NON_PAPER_WEIGHTS = (0.3, 0.2, 0.2, 0.15, 0.15)


def generate_labeled_documents(spec: FixtureSpec, namer: _Namer,
                               rng: np.random.Generator) -> List[Dict[str, Any]]:
    """Exactly round(n_documents * paper_ratio) papers; document_noise hard cases per class."""
    n_papers = int(round(spec.n_documents * spec.paper_ratio))
    n_other = spec.n_documents - n_papers
    hard_papers = set(rng.choice(n_papers, size=int(round(n_papers * spec.document_noise)), replace=False).tolist()) \
        if n_papers else set()
    hard_others = set(rng.choice(n_other, size=int(round(n_other * spec.document_noise)), replace=False).tolist()) \
        if n_other else set()

    def person_name() -> str:
        return f"{_pick(rng, FIRST_NAMES).title()} {_pick(rng, LAST_NAMES).title()}"

    records: List[Dict[str, Any]] = []
    for i in range(n_papers):
        doc_id = f"doc-p{i:04d}"
        authors = [person_name() for _ in range(int(rng.integers(1, 4)))]
        title = namer.title()
        if i in hard_papers:
            document, kind = extended_abstract_document(doc_id, title, authors, rng), "extended_abstract"
        else:
            affiliation = f"{namer.institution().title()} University"
            document, kind = paper_document(doc_id, title, authors, affiliation, rng, clean=False), "paper"
        records.append({"label": "paper", "kind": kind, "document": document})

    for i in range(n_other):
        doc_id = f"doc-n{i:04d}"
        affiliation = f"{namer.institution().title()} University"
        if i in hard_others:
            document = paper_document(doc_id, namer.title(), [person_name()], affiliation, rng,
                                      clean=False, self_reference="proposal")
            records.append({"label": "non_paper", "kind": "proposal", "document": document})
            continue
        kind = _weighted(rng, NON_PAPER_KINDS, NON_PAPER_WEIGHTS)
        if kind == "slides":
            document = slides_document(doc_id, namer.title(), person_name(), rng, clean=False)
        elif kind == "cv":
            document = cv_document(doc_id, person_name(), affiliation, rng)
        elif kind == "thesis":
            document = thesis_document(doc_id, namer.title(), person_name(), affiliation, rng)
        elif kind == "syllabus":
            document = syllabus_document(doc_id, rng)
        else:
            document = poster_document(doc_id, namer.title(), person_name(), rng)
        records.append({"label": "non_paper", "kind": kind, "document": document})

    order = rng.permutation(len(records))
    return [records[int(i)] for i in order]


# ==================== Mini-Web ====================

@dataclass
class _WebPaper:
    target_id: str
    title: str
    authors: Tuple[str, ...]
    slug: str
    body: str
    placement: str                      # home | pubs | deep


@dataclass
class _WebAuthor:
    person: _Person
    papers: List[_WebPaper] = field(default_factory=list)
    cv_body: str = ""
    slides_body: str = ""
    slides_paper: int = 0
    thesis_body: str = ""
    mirror_paper: Optional[int] = None
    mirror_body: str = ""
    has_private: bool = True
    namesake: Optional[_Person] = None

    @property
    def base(self) -> str:
        return self.person.homepage_url()

    def paper_url(self, paper: _WebPaper) -> str:
        if paper.placement == "deep":
            return f"{self.base}archive/old-{paper.slug}.pdf"
        return f"{self.base}papers/{paper.slug}.pdf"


def _doc_body(document: Dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, ensure_ascii=False)


def _html(title: str, links: Sequence[Tuple[str, str]], text: str = "") -> str:
    anchors = "\n".join(f'<li><a href="{href}">{label}</a></li>' for href, label in links)
    return (f"<html><head><title>{title}</title></head><body><h1>{title}</h1>"
            f"<p>{text}</p><ul>\n{anchors}\n</ul></body></html>")


def _build_web_authors(spec: FixtureSpec, namer: _Namer, rng: np.random.Generator,
                       exclude_names: set) -> List[_WebAuthor]:
    authors: List[_WebAuthor] = []
    target_counter = 0
    for index, (first, last) in enumerate(_unique_names(rng, spec.n_pipeline_authors, exclude_names)):
        person = _random_person(rng, namer, (first, last))
        person.url_form, person.title_form, person.sentences = "tilde_full", 1, (0, 2)
        author = _WebAuthor(person=person)
        affiliation = f"{person.univ.title()} University"
        n_papers = int(rng.integers(spec.papers_per_author[0], spec.papers_per_author[1] + 1))
        n_home = int(rng.integers(1, 3))
        for j in range(n_papers):
            target_counter += 1
            title = namer.title()
            coauthor = f"{_pick(rng, FIRST_NAMES).title()} {_pick(rng, LAST_NAMES).title()}"
            paper_authors = (person.name, coauthor)
            if j < n_home:
                placement = "home"
            elif j == n_papers - 1 and index % 3 == 2:
                placement = "deep"
            else:
                placement = "pubs"
            slug = f"{normalize_title(title).replace(' ', '-')}"
            document = paper_document(f"web-{target_counter:03d}", title, paper_authors, affiliation, rng)
            author.papers.append(_WebPaper(target_id=f"t{target_counter:03d}", title=title,
                                           authors=paper_authors, slug=slug, body=_doc_body(document),
                                           placement=placement))
        author.cv_body = _doc_body(cv_document(f"cv-{index:02d}", person.name, affiliation, rng))
        author.slides_paper = 0
        author.slides_body = _doc_body(slides_document(f"slides-{index:02d}", author.papers[0].title,
                                                       person.name, rng))
        if index % 2 == 0:
            author.thesis_body = _doc_body(thesis_document(f"thesis-{index:02d}", namer.title(),
                                                           person.name, affiliation, rng))
        if index % 2 == 1:
            author.mirror_paper = 0
            mirror = json.loads(author.papers[0].body)
            mirror["doc_id"] = f"{mirror['doc_id']}-mirror"
            author.mirror_body = _doc_body(mirror)
        author.has_private = index % 3 != 1
        authors.append(author)

    if authors:
        hard = authors[-1]
        hard.namesake = _Person(first=hard.person.first, last=hard.person.last, univ=namer.institution(),
                                dept=hard.person.dept, topics=hard.person.topics, url_form="tilde_full",
                                title_form=1, sentences=(0, 2))
    return authors


def _mirror_url(author: _WebAuthor) -> str:
    return f"http://{MIRROR_HOST}/archive/{author.papers[author.mirror_paper].slug}.pdf"


def _build_site_map(authors: Sequence[_WebAuthor]) -> Dict[str, Any]:
    pages: Dict[str, Dict[str, Any]] = {}
    robots: Dict[str, str] = {}
    pdf = "application/pdf"

    for author in authors:
        base = author.base
        host = base.split("/")[2]
        home_links: List[Tuple[str, str]] = [("publications.html", "Publications")]
        for paper in author.papers:
            pages[author.paper_url(paper)] = {"status": 200, "content_type": pdf, "body": paper.body}
            if paper.placement == "home":
                home_links.append((f"papers/{paper.slug}.pdf", paper.title))
        pages[f"{base}cv.pdf"] = {"status": 200, "content_type": pdf, "body": author.cv_body}
        home_links.append(("cv.pdf", "CV"))
        pages[f"{base}talks/slides.pdf"] = {"status": 200, "content_type": pdf, "body": author.slides_body}
        home_links.append(("talks/slides.pdf", "Talk slides"))
        if author.has_private:
            pages[f"{base}private/draft.pdf"] = {"status": 200, "content_type": pdf, "body": author.cv_body}
            home_links.append(("private/draft.pdf", "Draft"))
            robots[host] = f"User-agent: *\nDisallow: /{base.split('/', 3)[3]}private/\n"
        if author.mirror_paper is not None:
            pages[_mirror_url(author)] = {"status": 200, "content_type": pdf, "body": author.mirror_body}
            home_links.append((_mirror_url(author), "Mirror"))
        home_links += [("https://scholar.google.com/citations?user=x", "Scholar"),
                       ("missing.pdf", "Old link"), (f"mailto:{author.person.last}@example.edu", "Mail"),
                       ("./", "Home")]
        pages[base] = {"status": 200, "content_type": "text/html",
                       "body": _html(f"{author.person.name}'s Home Page", home_links,
                                     author.person.fill(HOME_SENTENCES[0]))}

        pub_links = [(f"papers/{p.slug}.pdf", p.title) for p in author.papers if p.placement == "pubs"]
        if author.thesis_body:
            pages[f"{base}thesis.pdf"] = {"status": 200, "content_type": pdf, "body": author.thesis_body}
            pub_links.append(("thesis.pdf", "PhD thesis"))
        pub_links += [("archive/", "Older papers"), ("./", "Home")]
        pages[f"{base}publications.html"] = {"status": 200, "content_type": "text/html",
                                             "body": _html("Publications", pub_links)}
        deep = [(f"old-{p.slug}.pdf", p.title) for p in author.papers if p.placement == "deep"]
        pages[f"{base}archive/"] = {"status": 200, "content_type": "text/html",
                                    "body": _html("Archive", deep + [("../", "Home")])}

        if author.namesake is not None:
            decoy = author.namesake.homepage_url()
            pages[decoy] = {"status": 200, "content_type": "text/html",
                            "body": _html(f"{author.namesake.name}'s Home Page",
                                          [("teaching.html", "Teaching"),
                                           ("https://www.linkedin.com/in/namesake", "LinkedIn")])}
            pages[f"{decoy}teaching.html"] = {"status": 200, "content_type": "text/html",
                                              "body": _html("Teaching", [("./", "Home")])}

        for paper in author.papers:
            pages[_citeseer_url(paper)] = {"status": 200, "content_type": pdf,
                                           "body": _citeseer_body(paper)}
    return {"pages": dict(sorted(pages.items())), "robots": dict(sorted(robots.items()))}


def _citeseer_url(paper: _WebPaper) -> str:
    return f"http://{CITESEER_HOST}/viewdoc/download?doi=10.1.1.{int(paper.target_id[1:])}&type=pdf"


def _citeseer_body(paper: _WebPaper) -> str:
    document = json.loads(paper.body)
    document["doc_id"] = f"{document['doc_id']}-citeseer"
    return _doc_body(document)


def _excluded(url: str, exclude_domains: Sequence[str]) -> bool:
    host = url.split("/")[2].split(":")[0].lower()
    return any(host == d or host.endswith("." + d) for d in exclude_domains)


# ==================== Pipeline Search Fixture & Ground Truth ====================

@dataclass
class _Acquisition:
    path: str
    origin: str
    query_id: str
    url: str
    body: str
    label: str
    title: str = ""
    target_id: Optional[str] = None


def _title_results(author: _WebAuthor, paper_index: int, citeseer_only: bool) -> List[Tuple[str, str, str]]:
    paper = author.papers[paper_index]
    results = []
    if not citeseer_only:
        results.append((author.paper_url(paper), paper.title, f"{paper.title}. {author.person.name}."))
    results.append((_citeseer_url(paper), paper.title, "CiteSeerX - Scientific documents"))
    if not citeseer_only:
        results.append((f"https://dblp.org/rec/conf/{paper.slug}.html", f"dblp: {paper.title}",
                        "Bibliographic details"))
        if paper_index == author.slides_paper:
            results.append((f"{author.base}talks/slides.pdf", paper.title, "Talk slides"))
        if author.mirror_paper == paper_index:
            results.append((_mirror_url(author), paper.title, "Mirror copy"))
    return results


def _author_page_slots(author: _WebAuthor, rng: np.random.Generator,
                       namer: _Namer) -> Tuple[Dict[int, Tuple[str, str, str]], int]:
    """Clean author-search page; the hard author gets its namesake at rank 1."""
    person = author.person
    slots: Dict[int, Tuple[str, str, str]] = {}
    if author.namesake is not None:
        slots[1] = author.namesake.homepage_result()
        home_rank = 2
    else:
        home_rank = 1 + int(rng.integers(0, 2))
    slots[home_rank] = person.homepage_result()
    distractors = [_d_linkedin(person, rng, namer), _d_dblp(person, rng, namer),
                   _d_scholar(person, rng, namer), _d_wikipedia(person, rng, namer)]
    free = [r for r in range(1, 7) if r not in slots]
    for rank, result in zip(free, distractors):
        slots[rank] = result
    return slots, home_rank


def _crawl_pdfs(author: _WebAuthor) -> List[Tuple[str, str, str]]:
    """(url, body, kind) of the PDFs a depth-2 crawl of the author's true homepage stores, in crawl order."""
    base = author.base
    found: List[Tuple[str, str, str]] = []
    for paper in author.papers:
        if paper.placement == "home":
            found.append((author.paper_url(paper), paper.body, "paper"))
    found.append((f"{base}cv.pdf", author.cv_body, "cv"))
    found.append((f"{base}talks/slides.pdf", author.slides_body, "slides"))
    if author.mirror_paper is not None:
        found.append((_mirror_url(author), author.mirror_body, "paper"))
    for paper in author.papers:
        if paper.placement == "pubs":
            found.append((author.paper_url(paper), paper.body, "paper"))
    if author.thesis_body:
        found.append((f"{base}thesis.pdf", author.thesis_body, "thesis"))
    return found


def _expected_records(acquisitions: Sequence[_Acquisition]) -> List[DocumentRecord]:
    records: Dict[str, DocumentRecord] = {}
    for acq in acquisitions:
        digest = _sha256(acq.body)
        entry = Provenance(acquisition_path=acq.path, origin=acq.origin, source_url=acq.url,
                           query_id=acq.query_id)
        record = records.get(digest)
        if record is None:
            title = TitleRecord.from_raw(acq.title) if acq.title else None
            records[digest] = DocumentRecord(
                content_hash=digest, source_url=acq.url, acquisition_path=acq.path, origin=acq.origin,
                classifier_label=acq.label, classifier_score=None, extracted_title=title,
                matched_target=acq.target_id, stored_at="", provenance=[entry])
        elif entry.key() not in {p.key() for p in record.provenance}:
            record.provenance.append(entry)
    return list(records.values())


def _pipeline_fixtures(spec: FixtureSpec, authors: Sequence[_WebAuthor], namer: _Namer,
                       rng: np.random.Generator) -> Dict[str, Any]:
    search_records: List[Dict[str, Any]] = []
    acquisitions: List[_Acquisition] = []
    query_log: List[Dict[str, str]] = []

    all_papers = [(a, j) for a in authors for j in range(len(a.papers))]
    title_papers = all_papers[:spec.n_title_queries]
    titles: List[str] = []
    for position, (author, j) in enumerate(title_papers):
        paper = author.papers[j]
        query = build_title_query(paper.title)
        titles.append(paper.title)
        query_log.append({"acquisition_path": PATH1})
        citeseer_only = position == len(title_papers) - 1
        results = _title_results(author, j, citeseer_only)
        search_records.append({"q": query.rendered, "results": [
            {"rank": r, "url": url, "title": t, "snippet": s} for r, (url, t, s) in enumerate(results, start=1)]})
        for url, _, _ in results:
            if _excluded(url, spec.exclude_domains) or "dblp.org" in url:
                continue
            if url == _citeseer_url(paper):
                body = _citeseer_body(paper)
            elif url.endswith("talks/slides.pdf"):
                acquisitions.append(_Acquisition(PATH1, query.id, query.id, url, author.slides_body, "non_paper"))
                continue
            elif author.mirror_paper == j and url == _mirror_url(author):
                body = author.mirror_body
            else:
                body = paper.body
            acquisitions.append(_Acquisition(PATH1, query.id, query.id, url, body, "paper",
                                             paper.title, paper.target_id))

    names: List[str] = []
    intended: List[str] = []
    crawl_oracle: Dict[str, Any] = {}
    for author in authors:
        name = author.person.name
        names.append(name)
        query = build_author_query(name)
        query_log.append({"acquisition_path": PATH2})
        slots, home_rank = _author_page_slots(author, rng, namer)
        search_records.append({"q": query.rendered, "name": name, "results": [
            {"rank": r, "url": u, "title": t, "snippet": s} for r, (u, t, s) in sorted(slots.items())]})

        true_seed = canonicalize_url(author.base)
        pdfs = _crawl_pdfs(author)
        by_body = {p.body: p for p in author.papers}
        intended += [_sha256(body) for _, body, kind in pdfs if kind == "paper"]
        crawl_oracle[true_seed] = {
            "pdfs": [url for url, _, _ in pdfs],
            "skipped_robots": [f"{author.base}private/draft.pdf"] if author.has_private else [],
            "never_fetched": [author.paper_url(p) for p in author.papers if p.placement == "deep"],
        }
        if author.namesake is not None:
            continue
        for url, body, kind in pdfs:
            if kind != "paper":
                acquisitions.append(_Acquisition(PATH2, true_seed, query.id, url, body, "non_paper"))
                continue
            source = by_body.get(body) or author.papers[author.mirror_paper]
            acquisitions.append(_Acquisition(PATH2, true_seed, query.id, url, body, "paper",
                                             source.title, source.target_id))

    names.append(EMPTY_RESULT_NAME)
    query_log.append({"acquisition_path": PATH2})
    search_records.append({"q": build_author_query(EMPTY_RESULT_NAME).rendered, "name": EMPTY_RESULT_NAME,
                           "results": []})

    targets = [Target(id=p.target_id, title=p.title, authors=p.authors) for a in authors for p in a.papers]
    for i in range(spec.n_unfindable_targets if authors else 0):
        targets.append(Target(id=f"u{i + 1:03d}", title=namer.title(),
                              authors=(f"{_pick(rng, FIRST_NAMES).title()} {_pick(rng, LAST_NAMES).title()}",)))

    records = _expected_records(acquisitions)
    manifest = compute_manifest(records, query_log, targets)
    path2_papers = {r.content_hash for r in records if r.is_paper and r.provenance_on(PATH2)}
    intended_set = sorted(set(intended))
    recovered = len(path2_papers & set(intended_set))
    return {
        "search_records": search_records,
        "titles": titles,
        "names": names,
        "targets": targets,
        "ground_truth": {
            "manifest": manifest.to_dict(),
            "intended_set": intended_set,
            "intended_recovered": recovered,
            "intended_fraction": recovered / len(intended_set) if intended_set else 0.0,
            "additional_papers": len(path2_papers - set(intended_set)),
            "crawl": crawl_oracle,
            "mispredicted_authors": [a.person.name for a in authors if a.namesake is not None],
            "exclude_domains": list(spec.exclude_domains),
        },
    }


# ==================== Writers ====================

def _write_jsonl(path: str, rows: Sequence[Dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def _write_lines(path: str, lines: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(line + "\n")


def _toml_string(value: str) -> str:
    return json.dumps(value, ensure_ascii=False)


def _write_config(path: str, spec: FixtureSpec) -> None:
    exclude = ", ".join(_toml_string(d) for d in spec.exclude_domains)
    text = f"""# Generated by fixture_generator; paths are relative to this file.

[search]
backend = "fixture"
fixture_path = {_toml_string(SEARCH_FILE)}
top_k = 10

[crawl]
fetcher = "fixture"
site_map = {_toml_string(SITE_MAP_FILE)}
max_depth = 2
per_host_delay_ms = 1000

[store]
root = "store"
logical_clock = true

[models]
ranker_path = "ranker.json"
classifier_path = "classifier.json"
extractor = "fixture"

[fixtures]
dir = "."
titles = {_toml_string(TITLES_FILE)}
names = {_toml_string(NAMES_FILE)}
targets = {_toml_string(TARGETS_FILE)}
labeled_search = {_toml_string(HOMEPAGE_FILE)}
labeled_documents = {_toml_string(DOCUMENTS_FILE)}
ground_truth = {_toml_string(GROUND_TRUTH_FILE)}

[pipeline]
seed = {spec.seed}
exclude_domains = [{exclude}]
"""
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def generate_fixtures(spec: FixtureSpec, out_dir: str) -> GeneratedFixtures:
    """
    Write every fixture file for spec into out_dir (a pure function of spec).

    Returns:
        GeneratedFixtures with file paths and the ground-truth document

    Raises:
        OSError: out_dir not writable
    """
    os.makedirs(out_dir, exist_ok=True)
    namer = _Namer(np.random.default_rng([spec.seed, 0]))

    homepage_records, hard_ids = generate_homepage_pages(spec, namer, np.random.default_rng([spec.seed, 1]))
    documents = generate_labeled_documents(spec, namer, np.random.default_rng([spec.seed, 2]))
    training_names = {tuple(r["name"].lower().split()) for r in homepage_records}
    web_rng = np.random.default_rng([spec.seed, 3])
    authors = _build_web_authors(spec, namer, web_rng, training_names)
    pipeline = _pipeline_fixtures(spec, authors, namer, web_rng)
    site_map = _build_site_map(authors)

    files = {name: os.path.join(out_dir, name) for name in (
        HOMEPAGE_FILE, DOCUMENTS_FILE, SEARCH_FILE, SITE_MAP_FILE, TITLES_FILE, NAMES_FILE,
        TARGETS_FILE, GROUND_TRUTH_FILE, CONFIG_FILE, SPEC_FILE)}

    _write_jsonl(files[HOMEPAGE_FILE], homepage_records)
    _write_jsonl(files[DOCUMENTS_FILE], documents)
    _write_jsonl(files[SEARCH_FILE], pipeline["search_records"])
    with open(files[SITE_MAP_FILE], "w", encoding="utf-8") as f:
        json.dump(site_map, f, ensure_ascii=False, indent=1, sort_keys=True)
    _write_lines(files[TITLES_FILE], pipeline["titles"])
    _write_lines(files[NAMES_FILE], pipeline["names"])
    _write_jsonl(files[TARGETS_FILE], [{"id": t.id, "title": t.title, "authors": list(t.authors)}
                                       for t in pipeline["targets"]])

    n_papers = sum(1 for d in documents if d["label"] == "paper")
    ground_truth = {
        "homepage": {"n_queries": len(homepage_records), "hard_queries": hard_ids},
        "documents": {"n": len(documents), "papers": n_papers, "non_papers": len(documents) - n_papers},
        **pipeline["ground_truth"],
    }
    with open(files[GROUND_TRUTH_FILE], "w", encoding="utf-8") as f:
        json.dump(ground_truth, f, ensure_ascii=False, indent=2, sort_keys=True)
    _write_config(files[CONFIG_FILE], spec)
    with open(files[SPEC_FILE], "w", encoding="utf-8") as f:
        json.dump(spec.to_dict(), f, indent=2, sort_keys=True)

    logger.info("Generated fixtures in %s: %d author queries, %d documents, %d pipeline authors",
                out_dir, len(homepage_records), len(documents), len(authors))
    return GeneratedFixtures(out_dir=out_dir, files=files, ground_truth=ground_truth)


__all__ = [
    "FixtureSpec",
    "GeneratedFixtures",
    "generate_fixtures",
    "generate_homepage_pages",
    "generate_labeled_documents",
    "paper_document",
    "slides_document",
    "cv_document",
    "thesis_document",
    "syllabus_document",
    "poster_document",
]
