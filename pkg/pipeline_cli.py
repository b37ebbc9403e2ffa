"""
Harvest CLI
===========

Command-line entry point (console script "harvest").

Subcommands:
    generate-fixtures   write the deterministic fixture set
    train-ranker        k-fold evaluate and train the homepage ranker
    train-classifier    evaluate and train the paper classifier
    search              run one query
    crawl               crawl one seed
    classify            classify one document
    run-path1           title search → fetch → classify → store
    run-path2           author search → rank → crawl → classify → store
    eval                ranker | classifier | pipeline
    report              export the store's manifest as TSV and JSON

Common flags: --config, --seed, --out, --backend {live,fixture}, --verbose.
Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 backend error.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from adapters import get_fetcher, get_search_backend
from adapters.interfaces import ProviderError
from crawler import CrawlJob, crawl
from doc_model import FEATURE_NAMES, extract_structural_features, load_labeled_documents
from docstore import PATH1, PATH2, Manifest, export_report, load_targets, report_rows
from fixture_generator import FixtureSpec, generate_fixtures
from forest import (
    ClassifierEvalReport,
    ForestConfig,
    cross_validate_forest,
    evaluate_classifier,
    load_forest,
    rank_features,
    save_forest,
    train_forest,
    train_test_split,
)
from homepage_features import build_dictionaries
from ltr_models import (
    ComparisonRow,
    RankEvalReport,
    TrainConfig,
    compare_methods,
    cross_validate_ranker,
    evaluate_ranker,
    load_ranker,
    save_ranker,
    train_method,
)
from pipeline_config import (
    PipelineConfig,
    config_for_fixture_dir,
    load_config,
    require_paths,
    with_cli_overrides,
)
from search_crawl_run import (
    build_harvester,
    classify_document,
    open_store,
    print_counters,
    read_lines,
    run_path1,
    run_path2,
)
from search_gateway import build_author_query, build_title_query, execute, load_labeled_fixture
from validators.schema_validators import ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3

TEST_FRACTION = 0.3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


# ==================== Config ====================

def resolve_config(args: argparse.Namespace, store_root: Optional[str] = None) -> PipelineConfig:
    """--config file, else --fixtures dir, else defaults; then --seed/--backend/store overrides."""
    if getattr(args, "config", None):
        config = load_config(args.config)
    elif getattr(args, "fixtures", None):
        config = config_for_fixture_dir(args.fixtures)
    else:
        config = load_config(None)
    return with_cli_overrides(config, seed=args.seed, backend=args.backend, store_root=store_root)


def train_config_from(config: PipelineConfig) -> TrainConfig:
    m = config.models
    return TrainConfig(epochs=m.epochs, learning_rate=m.learning_rate, regularization=m.regularization,
                       seed=config.seed, batch_size=m.batch_size)


def forest_config_from(config: PipelineConfig) -> ForestConfig:
    m = config.models
    return ForestConfig(n_trees=m.n_trees, max_depth=m.max_depth, mtry=m.mtry,
                        min_leaf_size=m.min_leaf_size, seed=config.seed)


def _feature_matrix(labeled) -> np.ndarray:
    if not labeled:
        return np.zeros((0, len(FEATURE_NAMES)))
    return np.vstack([extract_structural_features(doc).as_array() for _, doc in labeled])


# ==================== Training ====================

@dataclass
class RankerTrainingResult:
    report: RankEvalReport
    comparison: List[ComparisonRow] = field(default_factory=list)
    model_path: str = ""


def train_ranker_cmd(data_path: str, model_path: str, config: Optional[TrainConfig] = None,
                     folds: int = 5, seed: int = 7, compare: bool = False) -> RankerTrainingResult:
    """
    Cross-validate RankSVM on labeled author-search pages, then train on all of them.

    Raises:
        DataParseError: Malformed data line
        InvalidLabelingError: A query without exactly one homepage
    """
    config = config or TrainConfig(seed=seed)
    pages = load_labeled_fixture(data_path)
    report = cross_validate_ranker(pages, k=folds, method="rank_svm", config=config, seed=seed)
    comparison = compare_methods(pages, k=folds, config=config, seed=seed) if compare else []

    dicts = build_dictionaries(pages)
    model = train_method("rank_svm", pages, dicts, config)
    os.makedirs(os.path.dirname(os.path.abspath(model_path)), exist_ok=True)
    save_ranker(model_path, model, dicts)
    logger.info("Saved ranker to %s", model_path)
    return RankerTrainingResult(report=report, comparison=comparison, model_path=model_path)


@dataclass
class ClassifierTrainingResult:
    test_report: ClassifierEvalReport
    fold_f1: List[float]
    top_features: List
    model_path: str = ""


def train_classifier_cmd(data_path: str, model_path: str, config: Optional[ForestConfig] = None,
                         folds: int = 5, seed: int = 7,
                         test_fraction: float = TEST_FRACTION) -> ClassifierTrainingResult:
    """
    Split the labeled documents, cross-validate on the training part, train on it
    and evaluate on the held-out part.
    """
    config = config or ForestConfig(seed=seed)
    labeled = load_labeled_documents(data_path)
    labels = [label for label, _ in labeled]
    X = _feature_matrix(labeled)
    train_idx, test_idx = train_test_split(labels, test_fraction=test_fraction, seed=seed)
    y_train = [labels[i] for i in train_idx]

    fold_reports = cross_validate_forest(X[train_idx], y_train, config, k=folds, seed=seed)
    model = train_forest(X[train_idx], y_train, config, feature_names=FEATURE_NAMES)
    test_report = evaluate_classifier(model, X[test_idx], [labels[i] for i in test_idx])
    ranking = rank_features(X, labels, FEATURE_NAMES)

    os.makedirs(os.path.dirname(os.path.abspath(model_path)), exist_ok=True)
    save_forest(model, model_path)
    logger.info("Saved classifier to %s", model_path)
    return ClassifierTrainingResult(
        test_report=test_report,
        fold_f1=[r.per_class["paper"].f1 for r in fold_reports],
        top_features=ranking.top(10),
        model_path=model_path,
    )


# ==================== Evaluation ====================

@dataclass
class RankerEvalResult:
    held_out: RankEvalReport   # k-fold; dictionaries and model retrained per fold
    training: RankEvalReport   # saved model scored on its own training pages


@dataclass
class PipelineEvalReport:
    manifest: Dict[str, Any]
    expected: Dict[str, Any]
    mismatches: List[str]
    intended_total: int
    intended_recovered: int
    additional_papers: int
    expected_intended_fraction: float

    @property
    def intended_fraction(self) -> float:
        return self.intended_recovered / self.intended_total if self.intended_total else 0.0

    @property
    def matches(self) -> bool:
        return not self.mismatches


def _diff(expected: Any, actual: Any, prefix: str = "") -> List[str]:
    if isinstance(expected, dict) and isinstance(actual, dict):
        out: List[str] = []
        for key in sorted(set(expected) | set(actual)):
            out += _diff(expected.get(key), actual.get(key), f"{prefix}{key}.")
        return out
    if expected != actual:
        return [f"{prefix.rstrip('.')}: expected {expected!r}, got {actual!r}"]
    return []


def evaluate_pipeline(config: PipelineConfig) -> PipelineEvalReport:
    """
    Compare the store's rebuilt manifest against the fixture ground truth, and
    the Path 2 papers against the intended set (papers reachable from the
    true homepages).
    """
    require_paths(ground_truth=config.fixtures.ground_truth, store_root=config.store.root)
    with open(config.fixtures.ground_truth, "r", encoding="utf-8") as f:
        truth = json.load(f)
    targets = load_targets(config.fixtures.targets) if config.fixtures.targets else []
    store = open_store(config, targets)
    manifest = store.rebuild_manifest()
    actual = manifest.to_dict()

    intended = set(truth.get("intended_set", []))
    path2_papers = {r.content_hash for r in store.records() if r.is_paper and r.provenance_on(PATH2)}
    return PipelineEvalReport(
        manifest=actual,
        expected=truth.get("manifest", {}),
        mismatches=_diff(truth.get("manifest", {}), actual),
        intended_total=len(intended),
        intended_recovered=len(path2_papers & intended),
        additional_papers=len(path2_papers - intended),
        expected_intended_fraction=float(truth.get("intended_fraction", 0.0)),
    )


def eval_cmd(kind: str, config: PipelineConfig) -> Any:
    """
    Returns:
        RankerEvalResult, ClassifierEvalReport or PipelineEvalReport

    Raises:
        InvalidInputError: Missing model or data file
    """
    if kind == "ranker":
        require_paths(ranker_path=config.models.ranker_path, labeled_search=config.fixtures.labeled_search)
        model, dicts = load_ranker(config.models.ranker_path)
        pages = load_labeled_fixture(config.fixtures.labeled_search)
        held_out = cross_validate_ranker(pages, k=config.models.folds, method="rank_svm",
                                         config=train_config_from(config), seed=config.seed)
        return RankerEvalResult(held_out=held_out, training=evaluate_ranker(pages, model, dicts))
    if kind == "classifier":
        require_paths(classifier_path=config.models.classifier_path,
                      labeled_documents=config.fixtures.labeled_documents)
        model = load_forest(config.models.classifier_path)
        labeled = load_labeled_documents(config.fixtures.labeled_documents)
        labels = [label for label, _ in labeled]
        _, test_idx = train_test_split(labels, test_fraction=TEST_FRACTION, seed=config.seed)
        X = _feature_matrix(labeled)
        return evaluate_classifier(model, X[test_idx], [labels[i] for i in test_idx])
    if kind == "pipeline":
        return evaluate_pipeline(config)
    raise UsageError(f"unknown eval kind {kind!r}")


# ==================== Printing ====================

def _banner(title: str) -> None:
    print("=" * 60)
    print(title)
    print("=" * 60)


def print_classifier_report(report: ClassifierEvalReport) -> None:
    print(f"  {'class':<12}{'precision':>10}{'recall':>10}{'f1':>10}")
    for name, m in list(report.per_class.items()) + [("weighted", report.weighted)]:
        print(f"  {name:<12}{m.precision:>10.4f}{m.recall:>10.4f}{m.f1:>10.4f}")
    print(f"  confusion: {report.confusion}")


def print_manifest(manifest: Manifest) -> None:
    for row in report_rows(manifest):
        print("  " + "\t".join(row))
    for path in (PATH1, PATH2):
        print(f"  {path} papers/query: {manifest.paths[path].papers_per_query:.2f}")
    histogram = sorted(manifest.domain_histogram.items(), key=lambda item: (-item[1], item[0]))
    print("  domains: " + ", ".join(f"{tld}={n}" for tld, n in histogram[:20]))


# ==================== Subcommands ====================

def _cmd_generate(args: argparse.Namespace) -> int:
    out_dir = args.out or "fixtures"
    spec = FixtureSpec(seed=args.seed if args.seed is not None else 7,
                       n_authors=args.n_authors, n_documents=args.n_documents)
    print(f"[Fixtures] Generating into {out_dir} (seed={spec.seed})...")
    generated = generate_fixtures(spec, out_dir)
    truth = generated.ground_truth
    print(f"✓ Fixtures Complete: {truth['homepage']['n_queries']} author queries, "
          f"{truth['documents']['n']} documents, {len(generated.files)} files")
    return EXIT_OK


def _cmd_train_ranker(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    data = args.data or config.fixtures.labeled_search
    require_paths(labeled_search=data)
    model_path = args.out or config.models.ranker_path
    print(f"[Ranker] {config.models.folds}-fold cross-validation on {data}...")
    result = train_ranker_cmd(data, model_path, train_config_from(config), folds=config.models.folds,
                              seed=config.seed, compare=args.compare)
    print(f"  rank-1 accuracy: {result.report.accuracy:.4f} "
          f"(P={result.report.precision:.4f} R={result.report.recall:.4f} F1={result.report.f1:.4f})")
    for row in result.comparison:
        print(f"  {row.method:<12} P={row.precision:.4f} R={row.recall:.4f} F1={row.f1:.4f}")
    print(f"✓ Ranker Complete: {model_path}")
    return EXIT_OK


def _cmd_train_classifier(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    data = args.data or config.fixtures.labeled_documents
    require_paths(labeled_documents=data)
    model_path = args.out or config.models.classifier_path
    print(f"[Classifier] Training random forest on {data}...")
    result = train_classifier_cmd(data, model_path, forest_config_from(config),
                                  folds=config.models.folds, seed=config.seed)
    print(f"  cross-validated paper F1: {np.mean(result.fold_f1):.4f}")
    print_classifier_report(result.test_report)
    print("  top features: " + ", ".join(f"{name} ({gain:.3f})" for name, gain in result.top_features[:5]))
    print(f"✓ Classifier Complete: {model_path}")
    return EXIT_OK


def _cmd_search(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    build = build_title_query if args.kind == "title" else build_author_query
    query = build(args.text, top_k=config.search.top_k)
    backend = get_search_backend(config.search.backend, fixture_path=config.search.fixture_path,
                                 endpoint=config.search.endpoint, api_key=config.search.api_key,
                                 timeout_ms=config.search.timeout_ms, max_retries=config.search.max_retries,
                                 queries_per_second=config.search.queries_per_second)
    page = execute(query, backend)
    print(f"[Search] {query.rendered} ({query.id}): {len(page.results)} results")
    for result in page.results:
        print(f"  {result.rank:>2}. {result.url}  {result.page_title}")
    return EXIT_OK


def _cmd_crawl(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    fetcher = get_fetcher(config.crawl.fetcher, site_map=config.crawl.site_map,
                          site_dir=config.crawl.site_dir, user_agent=config.crawl.user_agent)
    job = CrawlJob(seeds=[args.seed_url], max_depth=args.depth if args.depth is not None else config.crawl.max_depth,
                   scope=config.crawl.scope, per_host_delay_ms=config.crawl.per_host_delay_ms,
                   max_pages=config.crawl.max_pages, obey_robots=config.crawl.obey_robots,
                   timeout=config.crawl.timeout_ms / 1000.0, user_agent=config.crawl.user_agent,
                   workers=config.crawl.workers)
    records = crawl(job, fetcher)
    print(f"[Crawl] {args.seed_url}: {len(records)} records")
    for record in records:
        print(f"  d{record.depth} {record.status:<15} {record.url}")
    return EXIT_OK


def _cmd_classify(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    require_paths(classifier_path=config.models.classifier_path, document=args.document)
    targets = load_targets(config.fixtures.targets) if config.fixtures.targets and \
        os.path.exists(config.fixtures.targets) else []
    with open(args.document, "rb") as f:
        data = f.read()
    result = classify_document(data, load_forest(config.models.classifier_path), targets)
    score = f"{result.score:.3f}" if result.score is not None else "-"
    title = result.title.raw if result.title else "-"
    print(f"[Classify] {args.document}: {result.label} (score {score})")
    print(f"  title: {title}")
    print(f"  matched target: {result.matched_target or '-'}")
    return EXIT_OK


def _cmd_run_path1(args: argparse.Namespace) -> int:
    config = resolve_config(args, store_root=args.out)
    titles_path = args.titles or config.fixtures.titles
    require_paths(titles=titles_path)
    titles = read_lines(titles_path)
    print(f"[Path 1] Searching {len(titles)} titles...")
    run = run_path1(titles, config)
    print_counters("Path 1", run.counters)
    print(f"✓ Path 1 Complete: store at {config.store.root}")
    return EXIT_OK


def _cmd_run_path2(args: argparse.Namespace) -> int:
    config = resolve_config(args, store_root=args.out)
    names_path = args.names or config.fixtures.names
    require_paths(names=names_path)
    names = read_lines(names_path)
    print(f"[Path 2] Searching {len(names)} names and crawling homepages...")
    run = run_path2(names, config, build_harvester(config, need_ranker=True))
    print_counters("Path 2", run.counters)
    for query_id, reason in run.skipped.items():
        print(f"  skipped {query_id}: {reason}")
    print(f"✓ Path 2 Complete: store at {config.store.root}")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    config = resolve_config(args, store_root=args.out)
    report = eval_cmd(args.kind, config)
    _banner(f"Evaluation: {args.kind}")
    if isinstance(report, RankerEvalResult):
        held, train = report.held_out, report.training
        print(f"  held-out ({len(held.fold_accuracies)}-fold) queries: {len(held.per_query)}")
        print(f"  held-out P={held.precision:.4f} R={held.recall:.4f} F1={held.f1:.4f}")
        print(f"  fold accuracies: {', '.join(f'{a:.4f}' for a in held.fold_accuracies)}")
        print(f"  training set (saved model) P={train.precision:.4f} R={train.recall:.4f} F1={train.f1:.4f}")
    elif isinstance(report, ClassifierEvalReport):
        print_classifier_report(report)
    else:
        print(f"  manifest matches ground truth: {report.matches}")
        for line in report.mismatches:
            print(f"    {line}")
        print(f"  intended set recovered: {report.intended_recovered}/{report.intended_total} "
              f"({report.intended_fraction:.2%}; expected {report.expected_intended_fraction:.2%})")
        print(f"  additional papers: {report.additional_papers}")
        combined = report.manifest.get("combined", {})
        print(f"  targets recovered: {combined.get('targets_recovered', 0)}/{combined.get('targets_total', 0)} "
              f"({combined.get('recovered_fraction', 0.0):.2%})")
        return EXIT_OK if report.matches else EXIT_DATA
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    targets = load_targets(config.fixtures.targets) if config.fixtures.targets and \
        os.path.exists(config.fixtures.targets) else []
    manifest = open_store(config, targets).rebuild_manifest()
    prefix = args.out or os.path.join(config.store.root, "report")
    paths = export_report(manifest, prefix)
    _banner("Yield Report")
    print_manifest(manifest)
    print(f"✓ Report written: {', '.join(paths)}")
    return EXIT_OK


# ==================== Parser ====================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML configuration file")
    common.add_argument("--fixtures", help="fixture directory written by generate-fixtures")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", help="output path (directory, model file, store root or report prefix)")
    common.add_argument("--backend", choices=["live", "fixture", "auto"], default=None)
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = _Parser(prog="harvest", description="Search-driven research document acquisition")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate-fixtures", parents=[common], help="write the fixture set")
    gen.add_argument("--n-authors", type=int, default=200)
    gen.add_argument("--n-documents", type=int, default=420)
    gen.set_defaults(handler=_cmd_generate)

    ranker = sub.add_parser("train-ranker", parents=[common], help="train the homepage ranker")
    ranker.add_argument("--data", help="labeled author-search JSONL")
    ranker.add_argument("--compare", action="store_true", help="also cross-validate the pointwise baselines")
    ranker.set_defaults(handler=_cmd_train_ranker)

    classifier = sub.add_parser("train-classifier", parents=[common], help="train the paper classifier")
    classifier.add_argument("--data", help="labeled documents JSONL")
    classifier.set_defaults(handler=_cmd_train_classifier)

    search = sub.add_parser("search", parents=[common], help="run one query")
    search.add_argument("text")
    search.add_argument("--kind", choices=["title", "author"], default="author")
    search.set_defaults(handler=_cmd_search)

    crawl_parser = sub.add_parser("crawl", parents=[common], help="crawl one seed")
    crawl_parser.add_argument("seed_url")
    crawl_parser.add_argument("--depth", type=int, default=None)
    crawl_parser.set_defaults(handler=_cmd_crawl)

    classify = sub.add_parser("classify", parents=[common], help="classify one document")
    classify.add_argument("document")
    classify.set_defaults(handler=_cmd_classify)

    path1 = sub.add_parser("run-path1", parents=[common], help="title search and fetch")
    path1.add_argument("--titles", help="file with one title per line")
    path1.set_defaults(handler=_cmd_run_path1)

    path2 = sub.add_parser("run-path2", parents=[common], help="author search, rank and crawl")
    path2.add_argument("--names", help="file with one name per line")
    path2.set_defaults(handler=_cmd_run_path2)

    evaluate = sub.add_parser("eval", parents=[common], help="evaluate a model or a pipeline run")
    evaluate.add_argument("kind", choices=["ranker", "classifier", "pipeline"])
    evaluate.set_defaults(handler=_cmd_eval)

    report = sub.add_parser("report", parents=[common], help="export the yield report")
    report.set_defaults(handler=_cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(str(e), file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except UsageError as e:
        print(f"Usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as e:
        print()
        _banner("Validation Error")
        print(f"Stage: {e.stage}")
        print(f"Error: {e.message}")
        return EXIT_DATA
    except ProviderError as e:
        print()
        _banner("Backend Error")
        print(f"Error: {e}")
        return EXIT_BACKEND
    except OSError as e:
        print()
        _banner("I/O Error")
        print(f"Error: {e}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
