"""
Pipeline Configuration
======================

One TOML document configures the whole harvester:

    [search]     backend, fixture_path, endpoint, api_key, timeout_ms,
                 max_retries, queries_per_second, top_k, workers
    [crawl]      fetcher, site_map, site_dir, max_depth, scope,
                 per_host_delay_ms, max_pages, obey_robots, timeout_ms,
                 user_agent, workers
    [store]      root, logical_clock
    [models]     ranker_path, classifier_path, extractor, folds, epochs,
                 learning_rate, regularization, batch_size, n_trees, mtry,
                 max_depth, min_leaf_size
    [fixtures]   dir, titles, names, targets, labeled_search,
                 labeled_documents, ground_truth
    [pipeline]   seed, exclude_domains, workers

Precedence: command-line flag > environment variable > file > default.
Environment variables: SEARCH_BACKEND, SEARCH_ENDPOINT, SEARCH_API_KEY,
FETCHER, TEXT_EXTRACTOR.

Relative paths in the file are resolved against the file's directory.
"""

import logging
import os
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Mapping, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from adapters.live_providers import DEFAULT_USER_AGENT
from validators.schema_validators import InvalidInputError

logger = logging.getLogger(__name__)

BACKENDS = ("fixture", "live", "auto")


@dataclass
class SearchConfig:
    backend: str = "fixture"
    fixture_path: str = ""
    endpoint: str = ""
    api_key: str = ""
    timeout_ms: int = 10000
    max_retries: int = 3
    queries_per_second: float = 3.0
    top_k: int = 10
    workers: int = 4


@dataclass
class CrawlConfig:
    fetcher: str = "fixture"
    site_map: str = ""
    site_dir: str = ""
    max_depth: int = 2
    scope: str = "same_registrable_domain_html"
    per_host_delay_ms: int = 1000
    max_pages: int = 500
    obey_robots: bool = True
    timeout_ms: int = 10000
    user_agent: str = DEFAULT_USER_AGENT
    workers: int = 4


@dataclass
class StoreConfig:
    root: str = "store"
    logical_clock: bool = False


@dataclass
class ModelsConfig:
    ranker_path: str = "models/ranker.json"
    classifier_path: str = "models/classifier.json"
    extractor: str = "fixture"
    folds: int = 5
    epochs: int = 30
    learning_rate: float = 0.1
    regularization: float = 1e-4
    batch_size: int = 8
    n_trees: int = 100
    mtry: Optional[int] = None
    max_depth: Optional[int] = None
    min_leaf_size: int = 1


@dataclass
class FixturesConfig:
    dir: str = "fixtures"
    titles: str = ""
    names: str = ""
    targets: str = ""
    labeled_search: str = ""
    labeled_documents: str = ""
    ground_truth: str = ""


@dataclass
class PipelineSettings:
    seed: int = 7
    exclude_domains: List[str] = field(default_factory=list)
    workers: int = 4


@dataclass
class PipelineConfig:
    search: SearchConfig = field(default_factory=SearchConfig)
    crawl: CrawlConfig = field(default_factory=CrawlConfig)
    store: StoreConfig = field(default_factory=StoreConfig)
    models: ModelsConfig = field(default_factory=ModelsConfig)
    fixtures: FixturesConfig = field(default_factory=FixturesConfig)
    pipeline: PipelineSettings = field(default_factory=PipelineSettings)

    @property
    def seed(self) -> int:
        return self.pipeline.seed


SECTIONS = {
    "search": SearchConfig,
    "crawl": CrawlConfig,
    "store": StoreConfig,
    "models": ModelsConfig,
    "fixtures": FixturesConfig,
    "pipeline": PipelineSettings,
}

PATH_KEYS = {
    "search": ("fixture_path",),
    "crawl": ("site_map", "site_dir"),
    "store": ("root",),
    "models": ("ranker_path", "classifier_path"),
    "fixtures": ("dir", "titles", "names", "targets", "labeled_search", "labeled_documents", "ground_truth"),
}


def _build_section(name: str, values: Mapping[str, Any], base_dir: str) -> Any:
    cls = SECTIONS[name]
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise InvalidInputError(f"unknown key(s) in [{name}]: {', '.join(unknown)}", stage="config")
    resolved = dict(values)
    for key in PATH_KEYS.get(name, ()):
        value = resolved.get(key)
        if isinstance(value, str) and value and not os.path.isabs(value):
            resolved[key] = os.path.normpath(os.path.join(base_dir, value))
    try:
        return cls(**resolved)
    except TypeError as e:
        raise InvalidInputError(f"invalid [{name}] table: {e}", stage="config")


def config_from_dict(data: Mapping[str, Any], base_dir: str = ".") -> PipelineConfig:
    """Build a PipelineConfig from parsed TOML tables."""
    unknown = sorted(set(data) - set(SECTIONS))
    if unknown:
        raise InvalidInputError(f"unknown table(s): {', '.join(unknown)}", stage="config")
    sections = {name: _build_section(name, data.get(name, {}), base_dir) for name in SECTIONS}
    return PipelineConfig(**sections)


def apply_env_overrides(config: PipelineConfig, env: Optional[Mapping[str, str]] = None) -> PipelineConfig:
    env = os.environ if env is None else env
    search = config.search
    if env.get("SEARCH_BACKEND"):
        search = replace(search, backend=env["SEARCH_BACKEND"].lower())
    if env.get("SEARCH_ENDPOINT"):
        search = replace(search, endpoint=env["SEARCH_ENDPOINT"])
    if env.get("SEARCH_API_KEY"):
        search = replace(search, api_key=env["SEARCH_API_KEY"])
    crawl = replace(config.crawl, fetcher=env["FETCHER"].lower()) if env.get("FETCHER") else config.crawl
    models = (replace(config.models, extractor=env["TEXT_EXTRACTOR"].lower())
              if env.get("TEXT_EXTRACTOR") else config.models)
    return replace(config, search=search, crawl=crawl, models=models)


def load_config(path: Optional[str] = None, env: Optional[Mapping[str, str]] = None) -> PipelineConfig:
    """
    Load configuration from a TOML file (optional) and the environment.

    Args:
        path: TOML file; None gives defaults
        env: Environment mapping (default: os.environ)

    Returns:
        PipelineConfig

    Raises:
        InvalidInputError: Missing file, TOML syntax error, unknown table or key
    """
    if path is None:
        return apply_env_overrides(PipelineConfig(), env)
    if not os.path.isfile(path):
        raise InvalidInputError(f"config file not found: {path}", stage="config")
    with open(path, "rb") as f:
        try:
            data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise InvalidInputError(f"{path}: {e}", stage="config")
    config = config_from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))
    logger.debug("Loaded config from %s", path)
    return apply_env_overrides(config, env)


def with_cli_overrides(config: PipelineConfig, seed: Optional[int] = None,
                       backend: Optional[str] = None, store_root: Optional[str] = None) -> PipelineConfig:
    """Apply --seed / --backend / --out. --backend selects both search backend and fetcher."""
    if backend is not None and backend not in BACKENDS:
        raise InvalidInputError(f"backend must be one of {BACKENDS}", stage="config")
    pipeline = replace(config.pipeline, seed=seed) if seed is not None else config.pipeline
    search = replace(config.search, backend=backend) if backend else config.search
    crawl = replace(config.crawl, fetcher=backend) if backend else config.crawl
    store = replace(config.store, root=store_root) if store_root else config.store
    return replace(config, pipeline=pipeline, search=search, crawl=crawl, store=store)


def require_paths(**paths: str) -> None:
    """
    Raises:
        InvalidInputError: A named path is unset or does not exist
    """
    for name, path in paths.items():
        if not path:
            raise InvalidInputError(f"{name} is not configured", stage="config")
        if not os.path.exists(path):
            raise InvalidInputError(f"{name} does not exist: {path}", stage="config")


def config_for_fixture_dir(fixture_dir: str, store_root: Optional[str] = None, seed: int = 7) -> PipelineConfig:
    """
    Configuration wired to the files generate_fixtures writes into fixture_dir.

    The generated pipeline.toml is used when present.
    """
    generated = os.path.join(fixture_dir, "pipeline.toml")
    if os.path.isfile(generated):
        return with_cli_overrides(load_config(generated, env={}), seed=seed, store_root=store_root)

    def p(name: str) -> str:
        return os.path.join(fixture_dir, name)

    return PipelineConfig(
        search=SearchConfig(fixture_path=p("search_fixture.jsonl")),
        crawl=CrawlConfig(site_map=p("site_map.json")),
        store=StoreConfig(root=store_root or p("store"), logical_clock=True),
        models=ModelsConfig(ranker_path=p("ranker.json"), classifier_path=p("classifier.json")),
        fixtures=FixturesConfig(
            dir=fixture_dir,
            titles=p("titles.txt"),
            names=p("names.txt"),
            targets=p("targets.jsonl"),
            labeled_search=p("homepage_search.jsonl"),
            labeled_documents=p("documents.jsonl"),
            ground_truth=p("ground_truth.json"),
        ),
        pipeline=PipelineSettings(seed=seed, exclude_domains=["citeseerx.ist.psu.edu"]),
    )


__all__ = [
    "SearchConfig",
    "CrawlConfig",
    "StoreConfig",
    "ModelsConfig",
    "FixturesConfig",
    "PipelineSettings",
    "PipelineConfig",
    "config_from_dict",
    "apply_env_overrides",
    "load_config",
    "with_cli_overrides",
    "require_paths",
    "config_for_fixture_dir",
]
