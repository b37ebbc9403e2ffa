"""
Learning-to-Rank Models
=======================

Homepage ranking models and their evaluation.

Models:
- RankSVM (LinearRankModel): pairwise hinge loss over preference pairs,
  minimized by seeded mini-batch stochastic subgradient descent
- Pointwise baselines (PointwiseModel): Bernoulli Naive Bayes, L2 logistic
  regression (MaxEnt) and binary linear SVM

Evaluation:
- predict_homepage: argmax score per query, ties to the lower search rank
- evaluate_ranker: per-query precision / recall / F1
- cross_validate_ranker, grid_search_lambda, compare_methods

Serialization is JSON tagged with MODEL_FORMAT_VERSION.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from homepage_features import (
    Dictionaries,
    LabeledPage,
    PreferencePair,
    RankInstance,
    build_all_pairs,
    build_dictionaries,
    dense_matrix,
    dictionaries_from_json,
    dictionaries_to_json,
    total_dimension,
    vectorize_page,
)
from search_gateway import ResultPage, SearchResult
from validators.schema_validators import (
    DegenerateTrainingError,
    InvalidInputError,
    InvalidLabelingError,
)

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
POINTWISE_KINDS = ("naive_bayes", "logistic", "linear_svm")
METHODS = ("naive_bayes", "logistic", "linear_svm", "rank_svm")


# ==================== Configuration ====================

@dataclass
class TrainConfig:
    """
    Training hyperparameters.

    regularization is the L2 weight lambda (plays the role of 1/C for SVMs).
    """
    epochs: int = 30
    learning_rate: float = 0.1
    regularization: float = 1e-4
    seed: int = 7
    shuffle: bool = True
    batch_size: int = 8

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidInputError(f"epochs must be >= 1, got {self.epochs}", stage="training")
        if self.learning_rate <= 0:
            raise InvalidInputError("learning_rate must be > 0", stage="training")
        if self.regularization < 0:
            raise InvalidInputError("regularization must be >= 0", stage="training")
        if self.batch_size < 1:
            raise InvalidInputError("batch_size must be >= 1", stage="training")

    def with_regularization(self, value: float) -> "TrainConfig":
        return TrainConfig(**{**asdict(self), "regularization": value})


# ==================== Models ====================

def _sparse_dot(weights: np.ndarray, vector: Dict[int, float]) -> float:
    total = 0.0
    for idx, value in vector.items():
        total += weights[idx] * value
    return float(total)


@dataclass
class LinearRankModel:
    """RankSVM weights over the full feature space."""
    weights: np.ndarray
    config: TrainConfig = field(default_factory=TrainConfig)
    loss_history: List[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])

    def score(self, instance: RankInstance) -> float:
        return _sparse_dot(self.weights, instance.vector)


@dataclass
class PointwiseModel:
    """
    Pointwise homepage/other classifier used as a ranker via its decision value.

    naive_bayes keeps count tables (class_counts, feature_counts); logistic
    and linear_svm keep weights + bias.
    """
    kind: str
    dim: int
    weights: Optional[np.ndarray] = None
    bias: float = 0.0
    class_counts: Optional[np.ndarray] = None      # [other, homepage]
    feature_counts: Optional[np.ndarray] = None    # shape (2, dim)
    config: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.kind not in POINTWISE_KINDS:
            raise InvalidInputError(f"unknown pointwise kind {self.kind!r}", stage="training")
        if self.kind == "naive_bayes":
            self._prepare_naive_bayes()

    def _prepare_naive_bayes(self) -> None:
        counts = np.asarray(self.feature_counts, dtype=float)
        totals = np.asarray(self.class_counts, dtype=float)
        # add-one smoothing over the two values of each Bernoulli feature
        p_present = (counts + 1.0) / (totals[:, None] + 2.0)
        self.log_present = np.log(p_present)
        self.log_absent = np.log1p(-p_present)
        self.log_prior = np.log(totals / totals.sum())
        absent_diff = self.log_absent[1] - self.log_absent[0]
        self._nb_base = float(self.log_prior[1] - self.log_prior[0] + absent_diff.sum())
        self._nb_delta = (self.log_present[1] - self.log_present[0]) - absent_diff

    def score(self, instance: RankInstance) -> float:
        """Decision value; positive favours homepage."""
        if self.kind == "naive_bayes":
            total = self._nb_base
            for idx, value in instance.vector.items():
                if value > 0:
                    total += self._nb_delta[idx]
            return float(total)
        return _sparse_dot(self.weights, instance.vector) + self.bias

    def predict_proba(self, instance: RankInstance) -> float:
        """P(homepage | x); for linear_svm a squashed margin, not a calibrated probability."""
        return 1.0 / (1.0 + math.exp(-max(min(self.score(instance), 500.0), -500.0)))

    def predict_label(self, instance: RankInstance) -> str:
        return "homepage" if self.score(instance) > 0 else "other"


Ranker = Union[LinearRankModel, PointwiseModel]


# ==================== RankSVM ====================

def _check_indices(instances: Sequence[RankInstance], dim: int) -> None:
    for instance in instances:
        for idx in instance.vector:
            if idx < 0 or idx >= dim:
                raise InvalidInputError(
                    f"feature index {idx} of {instance.query_id}/{instance.result_rank} "
                    f"out of range for dim {dim}", stage="training")


def _pair_differences(pairs: Sequence[PreferencePair], dim: int) -> np.ndarray:
    _check_indices([p.preferred for p in pairs] + [p.other for p in pairs], dim)
    preferred = dense_matrix([p.preferred for p in pairs], dim)
    other = dense_matrix([p.other for p in pairs], dim)
    return preferred - other


def _batches(n: int, config: TrainConfig, rng: np.random.Generator) -> List[np.ndarray]:
    order = rng.permutation(n) if config.shuffle else np.arange(n)
    return [order[i:i + config.batch_size] for i in range(0, n, config.batch_size)]


def pairwise_hinge_loss(weights: np.ndarray, differences: np.ndarray, regularization: float) -> float:
    """Mean of max(0, 1 - w.(x_pref - x_other)) plus lambda * ||w||^2."""
    margins = differences @ weights
    return float(np.maximum(0.0, 1.0 - margins).mean() + regularization * float(weights @ weights))


def train_rank_svm(pairs: Sequence[PreferencePair], dim: int,
                   config: Optional[TrainConfig] = None) -> LinearRankModel:
    """
    Train a linear ranker on preference pairs.

    Minimizes (1/|pairs|) * sum max(0, 1 - w.(x_pref - x_other)) + lambda*||w||^2
    with mini-batch subgradient steps at a fixed learning rate. The averaged
    loss after every epoch is kept in loss_history.

    Args:
        pairs: Preference pairs (homepage preferred over another result)
        dim: Feature-space dimension
        config: Hyperparameters (seeded)

    Returns:
        LinearRankModel

    Raises:
        InvalidInputError: No pairs, or a feature index >= dim
    """
    config = config or TrainConfig()
    if not pairs:
        raise InvalidInputError("cannot train a ranker on an empty pair list", stage="training")
    if dim < 1:
        raise InvalidInputError(f"dim must be >= 1, got {dim}", stage="training")

    differences = _pair_differences(pairs, dim)
    rng = np.random.default_rng(config.seed)
    weights = np.zeros(dim, dtype=float)
    lr, lam = config.learning_rate, config.regularization
    history: List[float] = []

    for epoch in range(config.epochs):
        for batch in _batches(len(pairs), config, rng):
            block = differences[batch]
            violated = (block @ weights) < 1.0
            gradient = 2.0 * lam * weights
            if violated.any():
                gradient = gradient - block[violated].sum(axis=0) / len(batch)
            weights = weights - lr * gradient
        history.append(pairwise_hinge_loss(weights, differences, lam))
        logger.debug("rank_svm epoch %d loss %.6f", epoch + 1, history[-1])

    if not np.all(np.isfinite(weights)):
        raise InvalidInputError("training diverged (non-finite weights); lower learning_rate",
                                stage="training")
    return LinearRankModel(weights=weights, config=config, loss_history=history)


def violated_pairs(model: Ranker, pairs: Sequence[PreferencePair]) -> int:
    """Pairs whose preferred instance does not score strictly higher."""
    return sum(1 for p in pairs if model.score(p.preferred) <= model.score(p.other))


# ==================== Pointwise Baselines ====================

def _labels_to_targets(instances: Sequence[RankInstance]) -> np.ndarray:
    labels = [inst.label for inst in instances]
    if any(label not in ("homepage", "other") for label in labels):
        raise InvalidInputError("pointwise training needs labeled instances", stage="training")
    if len(set(labels)) < 2:
        raise DegenerateTrainingError(
            f"training data has a single class ({labels[0] if labels else 'none'})")
    return np.array([1.0 if label == "homepage" else -1.0 for label in labels])


def train_pointwise(instances: Sequence[RankInstance], kind: str, dim: int,
                    config: Optional[TrainConfig] = None) -> PointwiseModel:
    """
    Train a pointwise baseline.

    Args:
        instances: Labeled instances (homepage / other)
        kind: "naive_bayes", "logistic" or "linear_svm"
        dim: Feature-space dimension
        config: Hyperparameters; naive_bayes ignores all but the data

    Raises:
        DegenerateTrainingError: Only one label present
        InvalidInputError: Unknown kind or index out of range
    """
    config = config or TrainConfig()
    if kind not in POINTWISE_KINDS:
        raise InvalidInputError(f"unknown pointwise kind {kind!r}", stage="training")
    y = _labels_to_targets(instances)
    _check_indices(instances, dim)
    X = dense_matrix(instances, dim)

    if kind == "naive_bayes":
        present = (X > 0).astype(float)
        positive = y > 0
        class_counts = np.array([float((~positive).sum()), float(positive.sum())])
        feature_counts = np.vstack([present[~positive].sum(axis=0), present[positive].sum(axis=0)])
        return PointwiseModel(kind=kind, dim=dim, class_counts=class_counts,
                              feature_counts=feature_counts, config=config)

    rng = np.random.default_rng(config.seed)
    weights = np.zeros(dim, dtype=float)
    bias = 0.0
    lr, lam = config.learning_rate, config.regularization
    for _ in range(config.epochs):
        for batch in _batches(len(y), config, rng):
            xb, yb = X[batch], y[batch]
            margins = yb * (xb @ weights + bias)
            if kind == "logistic":
                coef = -yb / (1.0 + np.exp(np.clip(margins, -500.0, 500.0)))
            else:
                coef = np.where(margins < 1.0, -yb, 0.0)
            weights = weights - lr * (xb.T @ coef / len(batch) + 2.0 * lam * weights)
            bias = bias - lr * float(coef.mean())

    return PointwiseModel(kind=kind, dim=dim, weights=weights, bias=float(bias), config=config)


# ==================== Prediction & Evaluation ====================

@dataclass
class RankEvalReport:
    """Per-query homepage prediction quality."""
    precision: float
    recall: float
    f1: float
    per_query: List[Tuple[str, int, int]] = field(default_factory=list)  # (query_id, predicted, true)
    fold_accuracies: List[float] = field(default_factory=list)

    @property
    def accuracy(self) -> float:
        if not self.per_query:
            return 0.0
        return sum(1 for _, pred, true in self.per_query if pred == true) / len(self.per_query)


def predict_homepage(page: ResultPage, instances: Sequence[RankInstance], model: Ranker) -> SearchResult:
    """
    Pick the result whose instance scores highest; ties go to the lower search rank.

    Raises:
        InvalidInputError: Empty page, or instances not 1:1 with results
    """
    if not page.results:
        raise InvalidInputError(f"cannot predict a homepage on empty page {page.query.id!r}",
                                stage="ranking")
    if len(instances) != len(page.results):
        raise InvalidInputError(
            f"{len(instances)} instances for {len(page.results)} results", stage="ranking")

    by_rank = {inst.result_rank: inst for inst in instances}
    best: Optional[SearchResult] = None
    best_score = -math.inf
    for result in sorted(page.results, key=lambda r: r.rank):
        instance = by_rank.get(result.rank)
        if instance is None:
            raise InvalidInputError(f"no instance for rank {result.rank}", stage="ranking")
        score = model.score(instance)
        if best is None or score > best_score:
            best, best_score = result, score
    return best


def _true_rank(page: LabeledPage) -> int:
    indices = page.homepage_indices()
    if len(indices) != 1:
        raise InvalidLabelingError(page.query_id, len(indices))
    return page.page.results[indices[0]].rank


def _report_from_predictions(per_query: List[Tuple[str, int, int]]) -> RankEvalReport:
    correct = sum(1 for _, pred, true in per_query if pred == true)
    n_predictions = len(per_query)
    n_truths = len(per_query)
    precision = correct / n_predictions if n_predictions else 0.0
    recall = correct / n_truths if n_truths else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return RankEvalReport(precision=precision, recall=recall, f1=f1, per_query=per_query)


def evaluate_ranker(pages: Sequence[LabeledPage], model: Ranker, dicts: Dictionaries) -> RankEvalReport:
    """
    Evaluate one prediction per query against the single labeled homepage.

    Raises:
        InvalidLabelingError: A page does not have exactly one homepage
    """
    per_query = []
    for page in pages:
        true_rank = _true_rank(page)
        instances = vectorize_page(page.page, dicts)
        predicted = predict_homepage(page.page, instances, model)
        per_query.append((page.query_id, predicted.rank, true_rank))
    return _report_from_predictions(per_query)


def train_method(method: str, pages: Sequence[LabeledPage], dicts: Dictionaries,
                 config: Optional[TrainConfig] = None) -> Ranker:
    """Train "rank_svm" or one of the pointwise kinds on labeled pages."""
    config = config or TrainConfig()
    dim = total_dimension(dicts)
    if method == "rank_svm":
        return train_rank_svm(build_all_pairs(pages, dicts), dim, config)
    if method in POINTWISE_KINDS:
        for page in pages:
            _true_rank(page)
        instances = [inst for page in pages for inst in vectorize_page(page, dicts)]
        return train_pointwise(instances, method, dim, config)
    raise InvalidInputError(f"unknown method {method!r}; expected one of {METHODS}", stage="training")


def assign_folds(n: int, k: int, seed: int) -> List[np.ndarray]:
    """Seeded partition of range(n) into k folds of near-equal size."""
    if k < 2 or k > n:
        raise InvalidInputError(f"k must be in [2, {n}], got {k}", stage="evaluation")
    permutation = np.random.default_rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(permutation, k)]


def cross_validate_ranker(pages: Sequence[LabeledPage], k: int = 5, method: str = "rank_svm",
                          config: Optional[TrainConfig] = None, seed: int = 7,
                          min_df: Union[None, int, Dict[str, int]] = None) -> RankEvalReport:
    """
    k-fold cross-validation; dictionaries are rebuilt from each training fold.

    Returns:
        RankEvalReport over all held-out queries, with per-fold accuracies
    """
    folds = assign_folds(len(pages), k, seed)
    per_query: List[Tuple[str, int, int]] = []
    fold_accuracies: List[float] = []
    for fold_index, test_idx in enumerate(folds):
        test_set = set(int(i) for i in test_idx)
        train_pages = [p for i, p in enumerate(pages) if i not in test_set]
        test_pages = [pages[i] for i in sorted(test_set)]
        dicts = build_dictionaries(train_pages, min_df=min_df)
        model = train_method(method, train_pages, dicts, config)
        report = evaluate_ranker(test_pages, model, dicts)
        per_query.extend(report.per_query)
        fold_accuracies.append(report.accuracy)
        logger.info("%s fold %d/%d accuracy %.4f", method, fold_index + 1, k, report.accuracy)

    combined = _report_from_predictions(per_query)
    combined.fold_accuracies = fold_accuracies
    return combined


def grid_search_lambda(pages: Sequence[LabeledPage], lambdas: Sequence[float], k: int = 5,
                       method: str = "rank_svm", config: Optional[TrainConfig] = None,
                       seed: int = 7) -> Tuple[float, List[Tuple[float, float]]]:
    """
    Cross-validated F1 for each lambda; the first best value in grid order wins.

    Returns:
        (best_lambda, [(lambda, f1), ...])
    """
    if not lambdas:
        raise InvalidInputError("lambda grid is empty", stage="evaluation")
    config = config or TrainConfig()
    scores = []
    for lam in lambdas:
        report = cross_validate_ranker(pages, k, method, config.with_regularization(lam), seed)
        scores.append((float(lam), report.f1))
    best_lambda, _ = max(scores, key=lambda item: item[1])
    return best_lambda, scores


@dataclass
class ComparisonRow:
    method: str
    precision: float
    recall: float
    f1: float


def compare_methods(pages: Sequence[LabeledPage], k: int = 5, config: Optional[TrainConfig] = None,
                    seed: int = 7, methods: Sequence[str] = METHODS) -> List[ComparisonRow]:
    """Cross-validated P/R/F1 of each method on identical folds."""
    rows = []
    for method in methods:
        report = cross_validate_ranker(pages, k, method, config, seed)
        rows.append(ComparisonRow(method, report.precision, report.recall, report.f1))
    return rows


# ==================== Serialization ====================

def model_to_json(model: Ranker) -> Dict[str, Any]:
    if isinstance(model, LinearRankModel):
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "type": "rank_svm",
            "dim": model.dim,
            "weights": model.weights.tolist(),
            "config": asdict(model.config),
            "loss_history": list(model.loss_history),
        }
    data: Dict[str, Any] = {
        "format_version": MODEL_FORMAT_VERSION,
        "type": "pointwise",
        "kind": model.kind,
        "dim": model.dim,
        "config": asdict(model.config),
    }
    if model.kind == "naive_bayes":
        data["class_counts"] = model.class_counts.tolist()
        data["feature_counts"] = model.feature_counts.tolist()
    else:
        data["weights"] = model.weights.tolist()
        data["bias"] = model.bias
    return data


def model_from_json(data: Dict[str, Any]) -> Ranker:
    """
    Raises:
        InvalidInputError: Unknown format version or type, or weights != dim
    """
    if data.get("format_version") != MODEL_FORMAT_VERSION:
        raise InvalidInputError(f"unsupported model format version {data.get('format_version')!r}",
                                stage="model")
    config = TrainConfig(**data.get("config", {}))
    dim = int(data["dim"])
    if data.get("type") == "rank_svm":
        weights = np.asarray(data["weights"], dtype=float)
        if weights.shape != (dim,):
            raise InvalidInputError(f"weights length {weights.shape[0]} != dim {dim}", stage="model")
        return LinearRankModel(weights=weights, config=config,
                               loss_history=[float(x) for x in data.get("loss_history", [])])
    if data.get("type") == "pointwise":
        if data["kind"] == "naive_bayes":
            return PointwiseModel(kind="naive_bayes", dim=dim, config=config,
                                  class_counts=np.asarray(data["class_counts"], dtype=float),
                                  feature_counts=np.asarray(data["feature_counts"], dtype=float))
        return PointwiseModel(kind=data["kind"], dim=dim, config=config,
                              weights=np.asarray(data["weights"], dtype=float),
                              bias=float(data["bias"]))
    raise InvalidInputError(f"unknown model type {data.get('type')!r}", stage="model")


def save_ranker(path: str, model: Ranker, dicts: Dictionaries) -> None:
    """Write the model together with the dictionaries it was trained on."""
    payload = model_to_json(model)
    payload["dictionaries"] = dictionaries_to_json(dicts)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f)


def load_ranker(path: str) -> Tuple[Ranker, Dictionaries]:
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    if "dictionaries" not in payload:
        raise InvalidInputError(f"{path} has no dictionaries section", stage="model")
    dicts = dictionaries_from_json(payload["dictionaries"])
    model = model_from_json(payload)
    if model.dim != total_dimension(dicts):
        raise InvalidInputError(f"{path}: model dim {model.dim} does not match dictionaries",
                                stage="model")
    return model, dicts


__all__ = [
    "MODEL_FORMAT_VERSION",
    "POINTWISE_KINDS",
    "METHODS",
    "TrainConfig",
    "LinearRankModel",
    "PointwiseModel",
    "RankEvalReport",
    "ComparisonRow",
    "pairwise_hinge_loss",
    "train_rank_svm",
    "violated_pairs",
    "train_pointwise",
    "predict_homepage",
    "evaluate_ranker",
    "train_method",
    "assign_folds",
    "cross_validate_ranker",
    "grid_search_lambda",
    "compare_methods",
    "model_to_json",
    "model_from_json",
    "save_ranker",
    "load_ranker",
]
