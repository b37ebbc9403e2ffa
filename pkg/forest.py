"""
Random Forest Paper Classifier
==============================

Binary paper / non-paper random forest over structural feature vectors, plus
information-gain feature ranking and classifier evaluation.

- Trees: greedy Gini splits over mtry sampled features, midpoint thresholds
  between sorted distinct values, left branch is x <= threshold
- Forest: seeded bootstrap per tree; tree i draws from the stream (seed, i),
  so training is identical for any n_jobs
- Prediction: majority leaf class per tree; score = fraction of trees voting
  paper; label paper iff score >= 0.5
- info_gain uses base-2 entropy; rank_features binarizes numeric columns at
  the median (binary columns are used as they are)
"""

import json
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np

from validators.schema_validators import DegenerateTrainingError, InvalidInputError

logger = logging.getLogger(__name__)

FOREST_FORMAT_VERSION = 1
PAPER = "paper"
NON_PAPER = "non_paper"
CLASS_NAMES = (NON_PAPER, PAPER)  # index = encoded label


# ==================== Configuration ====================

@dataclass
class ForestConfig:
    n_trees: int = 100
    max_depth: Optional[int] = None
    mtry: Optional[int] = None  # None: ceil(sqrt(d)); >= d: every feature
    min_leaf_size: int = 1
    bootstrap: bool = True
    seed: int = 7
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_trees < 1:
            raise InvalidInputError("n_trees must be >= 1", stage="training")
        if self.min_leaf_size < 1:
            raise InvalidInputError("min_leaf_size must be >= 1", stage="training")
        if self.max_depth is not None and self.max_depth < 0:
            raise InvalidInputError("max_depth must be >= 0", stage="training")
        if self.mtry is not None and self.mtry < 1:
            raise InvalidInputError("mtry must be >= 1", stage="training")

    def features_per_split(self, dim: int) -> int:
        if self.mtry is None:
            return max(1, math.ceil(math.sqrt(dim)))
        return min(self.mtry, dim)


# ==================== Label Encoding ====================

def encode_labels(labels: Sequence[Union[str, int, bool]]) -> np.ndarray:
    """Map paper/non_paper (or 1/0, True/False) to 1/0."""
    encoded = []
    for label in labels:
        if label == PAPER or (not isinstance(label, str) and label in (1, True)):
            encoded.append(1)
        elif label == NON_PAPER or (not isinstance(label, str) and label in (0, False)):
            encoded.append(0)
        else:
            raise InvalidInputError(f"unknown class label {label!r}", stage="training")
    return np.asarray(encoded, dtype=int)


def _as_matrix(X: Any) -> np.ndarray:
    rows = [row.as_array() if hasattr(row, "as_array") else row for row in X]
    matrix = np.asarray(rows, dtype=float)
    if matrix.ndim != 2:
        raise InvalidInputError("X must be a 2-D collection of feature vectors", stage="training")
    return matrix


# ==================== Decision Tree ====================

@dataclass
class DecisionTree:
    """
    Array-encoded binary tree; node 0 is the root.

    feature[i] == -1 marks a leaf; counts[i] is [non_paper, paper] of the
    training samples that reached node i.
    """
    feature: List[int] = field(default_factory=list)
    threshold: List[float] = field(default_factory=list)
    left: List[int] = field(default_factory=list)
    right: List[int] = field(default_factory=list)
    counts: List[List[int]] = field(default_factory=list)

    def _add_node(self, counts: Sequence[int]) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.counts.append([int(counts[0]), int(counts[1])])
        return len(self.feature) - 1

    def leaf_for(self, x: np.ndarray) -> int:
        node = 0
        while self.feature[node] != -1:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return node

    def vote(self, x: np.ndarray) -> int:
        """Majority class of the leaf; equal counts vote paper."""
        non_paper, paper = self.counts[self.leaf_for(x)]
        return 1 if paper >= non_paper else 0

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


def _gini(positives: np.ndarray, n: np.ndarray) -> np.ndarray:
    p = positives / n
    q = (n - positives) / n
    return 1.0 - p * p - q * q


def _best_split_for_feature(column: np.ndarray, y: np.ndarray,
                            min_leaf_size: int) -> Optional[Tuple[float, float]]:
    """(weighted gini, threshold) of the best split on one column, or None."""
    n = len(y)
    if n < 2:
        return None
    order = np.argsort(column, kind="stable")
    xs, ys = column[order], y[order]
    left_n = np.arange(1, n, dtype=float)
    right_n = n - left_n
    left_pos = np.cumsum(ys)[:-1].astype(float)
    right_pos = float(ys.sum()) - left_pos

    valid = (xs[:-1] < xs[1:]) & (left_n >= min_leaf_size) & (right_n >= min_leaf_size)
    if not valid.any():
        return None
    weighted = (left_n * _gini(left_pos, left_n) + right_n * _gini(right_pos, right_n)) / n
    weighted = np.where(valid, weighted, np.inf)
    i = int(np.argmin(weighted))
    return float(weighted[i]), float((xs[i] + xs[i + 1]) / 2.0)


def _choose_split(X: np.ndarray, y: np.ndarray, config: ForestConfig,
                  rng: np.random.Generator) -> Optional[Tuple[int, float]]:
    dim = X.shape[1]
    mtry = config.features_per_split(dim)
    if mtry >= dim:
        candidates = list(range(dim))
        extra: List[int] = []
    else:
        permutation = [int(i) for i in rng.permutation(dim)]
        candidates, extra = sorted(permutation[:mtry]), permutation[mtry:]

    best: Optional[Tuple[float, int, float]] = None
    for f in candidates:
        found = _best_split_for_feature(X[:, f], y, config.min_leaf_size)
        if found is not None and (best is None or found[0] < best[0]):
            best = (found[0], f, found[1])
    # all sampled features constant here: keep drawing until one can split
    for f in extra:
        if best is not None:
            break
        found = _best_split_for_feature(X[:, f], y, config.min_leaf_size)
        if found is not None:
            best = (found[0], f, found[1])
    if best is None:
        return None
    return best[1], best[2]


def build_tree(X: np.ndarray, y: np.ndarray, config: ForestConfig,
               rng: np.random.Generator) -> DecisionTree:
    tree = DecisionTree()
    root = tree._add_node((int((y == 0).sum()), int((y == 1).sum())))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        ys = y[idx]
        positives = int(ys.sum())
        if positives == 0 or positives == len(ys):
            continue
        if config.max_depth is not None and depth >= config.max_depth:
            continue
        if len(ys) < 2 * config.min_leaf_size:
            continue
        split = _choose_split(X[idx], ys, config, rng)
        if split is None:
            continue
        feature, threshold = split
        goes_left = X[idx, feature] <= threshold
        left_idx, right_idx = idx[goes_left], idx[~goes_left]
        tree.feature[node] = feature
        tree.threshold[node] = threshold
        tree.left[node] = tree._add_node((int((y[left_idx] == 0).sum()), int((y[left_idx] == 1).sum())))
        tree.right[node] = tree._add_node((int((y[right_idx] == 0).sum()), int((y[right_idx] == 1).sum())))
        stack.append((tree.right[node], right_idx, depth + 1))
        stack.append((tree.left[node], left_idx, depth + 1))
    return tree


# ==================== Forest ====================

@dataclass
class RandomForestModel:
    trees: List[DecisionTree]
    config: ForestConfig
    dim: int
    feature_names: List[str] = field(default_factory=list)


def _train_one_tree(X: np.ndarray, y: np.ndarray, config: ForestConfig, tree_index: int) -> DecisionTree:
    rng = np.random.default_rng([config.seed, tree_index])
    if config.bootstrap:
        sample = rng.integers(0, len(y), size=len(y))
        return build_tree(X[sample], y[sample], config, rng)
    return build_tree(X, y, config, rng)


def train_forest(X: Any, y: Sequence[Union[str, int, bool]], config: Optional[ForestConfig] = None,
                 feature_names: Optional[Sequence[str]] = None) -> RandomForestModel:
    """
    Train a binary random forest.

    Args:
        X: Feature vectors (arrays, lists or objects with as_array())
        y: Labels paper/non_paper (or 1/0)
        config: ForestConfig (seeded)
        feature_names: Optional column names kept with the model

    Returns:
        RandomForestModel with config.n_trees trees

    Raises:
        InvalidInputError: Fewer than 2 samples or |X| != |y|
        DegenerateTrainingError: Only one class present
    """
    config = config or ForestConfig()
    matrix = _as_matrix(X)
    labels = encode_labels(y)
    if matrix.shape[0] != len(labels):
        raise InvalidInputError(f"|X|={matrix.shape[0]} but |y|={len(labels)}", stage="training")
    if len(labels) < 2:
        raise InvalidInputError("need at least 2 samples", stage="training")
    if len(set(labels.tolist())) < 2:
        raise DegenerateTrainingError(f"training data has a single class ({CLASS_NAMES[labels[0]]})")

    indices = list(range(config.n_trees))
    if config.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=config.n_jobs) as pool:
            trees = list(pool.map(lambda i: _train_one_tree(matrix, labels, config, i), indices))
    else:
        trees = [_train_one_tree(matrix, labels, config, i) for i in indices]

    logger.debug("Trained %d trees on %d samples x %d features", len(trees), *matrix.shape)
    return RandomForestModel(trees=trees, config=config, dim=matrix.shape[1],
                             feature_names=list(feature_names or []))


def predict(model: RandomForestModel, x: Any) -> Tuple[str, float]:
    """
    Returns:
        (label, score) where score is the fraction of trees voting paper

    Raises:
        InvalidInputError: x does not have the model's dimensionality
    """
    vector = np.asarray(x.as_array() if hasattr(x, "as_array") else x, dtype=float)
    if vector.shape != (model.dim,):
        raise InvalidInputError(f"expected a {model.dim}-dim vector, got shape {vector.shape}",
                                stage="predict")
    votes = sum(tree.vote(vector) for tree in model.trees)
    score = votes / len(model.trees)
    return (PAPER if score >= 0.5 else NON_PAPER), score


def predict_many(model: RandomForestModel, X: Any) -> List[Tuple[str, float]]:
    return [predict(model, row) for row in _as_matrix(X)]


# ==================== Information Gain ====================

def entropy(labels: Sequence[Hashable]) -> float:
    """Base-2 entropy of a label sequence (0 log 0 = 0)."""
    n = len(labels)
    if n == 0:
        return 0.0
    total = 0.0
    for count in Counter(labels).values():
        p = count / n
        total -= p * math.log2(p)
    return total


def info_gain(values: Sequence[Hashable], labels: Sequence[Hashable]) -> float:
    """
    IG = H(Y) - sum_v P(v) H(Y | v).

    Raises:
        InvalidInputError: Length mismatch or empty input
    """
    if len(values) != len(labels):
        raise InvalidInputError(f"|values|={len(values)} but |labels|={len(labels)}", stage="info_gain")
    if len(values) == 0:
        raise InvalidInputError("info_gain needs at least one sample", stage="info_gain")
    n = len(labels)
    groups: Dict[Hashable, List[Hashable]] = {}
    for value, label in zip(values, labels):
        groups.setdefault(value, []).append(label)
    conditional = sum(len(group) / n * entropy(group) for group in groups.values())
    return max(0.0, entropy(labels) - conditional)


@dataclass
class InfoGainReport:
    entries: List[Tuple[str, float]]

    def top(self, n: int) -> List[Tuple[str, float]]:
        return self.entries[:n]

    def position(self, name: str) -> int:
        """0-based rank of a feature."""
        for idx, (entry_name, _) in enumerate(self.entries):
            if entry_name == name:
                return idx
        raise KeyError(name)


def binarize_column(column: np.ndarray) -> np.ndarray:
    """Binary 0/1 columns unchanged; numeric columns become x > median."""
    distinct = set(np.unique(column).tolist())
    if distinct <= {0.0, 1.0}:
        return column.astype(int)
    return (column > np.median(column)).astype(int)


def rank_features(X: Any, labels: Sequence[Hashable], feature_names: Sequence[str]) -> InfoGainReport:
    """Information gain per feature, descending; ties by feature name."""
    matrix = _as_matrix(X)
    if matrix.shape[1] != len(feature_names):
        raise InvalidInputError(
            f"{len(feature_names)} names for {matrix.shape[1]} columns", stage="info_gain")
    label_list = list(labels)
    entries = []
    for j, name in enumerate(feature_names):
        gain = info_gain(binarize_column(matrix[:, j]).tolist(), label_list)
        entries.append((name, gain))
    entries.sort(key=lambda item: (-item[1], item[0]))
    return InfoGainReport(entries=entries)


# ==================== Evaluation ====================

@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class ClassifierEvalReport:
    per_class: Dict[str, ClassMetrics]
    weighted: ClassMetrics
    confusion: Dict[str, int]  # tp / fp / fn / tn with paper as positive

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_class": {name: asdict(m) for name, m in self.per_class.items()},
            "weighted": asdict(self.weighted),
            "confusion": dict(self.confusion),
        }


def _metrics(tp: int, fp: int, fn: int) -> Tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def classification_report(y_true: Sequence[Union[str, int]], y_pred: Sequence[Union[str, int]]) -> ClassifierEvalReport:
    """Per-class and support-weighted P/R/F1 from the 2x2 confusion matrix."""
    truth, predicted = encode_labels(y_true), encode_labels(y_pred)
    if len(truth) != len(predicted):
        raise InvalidInputError("y_true and y_pred differ in length", stage="evaluation")
    tp = int(((truth == 1) & (predicted == 1)).sum())
    fp = int(((truth == 0) & (predicted == 1)).sum())
    fn = int(((truth == 1) & (predicted == 0)).sum())
    tn = int(((truth == 0) & (predicted == 0)).sum())

    per_class = {
        PAPER: ClassMetrics(*_metrics(tp, fp, fn), support=tp + fn),
        NON_PAPER: ClassMetrics(*_metrics(tn, fn, fp), support=tn + fp),
    }
    total = len(truth)
    weighted = ClassMetrics(
        precision=sum(m.precision * m.support for m in per_class.values()) / total if total else 0.0,
        recall=sum(m.recall * m.support for m in per_class.values()) / total if total else 0.0,
        f1=sum(m.f1 * m.support for m in per_class.values()) / total if total else 0.0,
        support=total,
    )
    return ClassifierEvalReport(per_class=per_class, weighted=weighted,
                                confusion={"tp": tp, "fp": fp, "fn": fn, "tn": tn})


def evaluate_classifier(model: RandomForestModel, X: Any, y: Sequence[Union[str, int]]) -> ClassifierEvalReport:
    """
    Raises:
        InvalidInputError: Empty test set
    """
    matrix = _as_matrix(X)
    if matrix.shape[0] == 0:
        raise InvalidInputError("test set is empty", stage="evaluation")
    predictions = [label for label, _ in predict_many(model, matrix)]
    return classification_report(list(y), predictions)


def train_test_split(labels: Sequence[Union[str, int]], test_fraction: float = 0.3,
                     seed: int = 7) -> Tuple[np.ndarray, np.ndarray]:
    """Stratified, seeded split; returns sorted (train_indices, test_indices)."""
    if not 0.0 < test_fraction < 1.0:
        raise InvalidInputError("test_fraction must be in (0, 1)", stage="evaluation")
    encoded = encode_labels(labels)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in (0, 1):
        members = np.flatnonzero(encoded == cls)
        members = members[rng.permutation(len(members))]
        n_test = int(round(len(members) * test_fraction))
        test.extend(members[:n_test].tolist())
        train.extend(members[n_test:].tolist())
    return np.array(sorted(train), dtype=int), np.array(sorted(test), dtype=int)


def cross_validate_forest(X: Any, y: Sequence[Union[str, int]], config: Optional[ForestConfig] = None,
                          k: int = 5, seed: int = 7) -> List[ClassifierEvalReport]:
    """Seeded k-fold reports (one per fold) for tuning on a training split."""
    matrix = _as_matrix(X)
    labels = list(y)
    n = len(labels)
    if k < 2 or k > n:
        raise InvalidInputError(f"k must be in [2, {n}], got {k}", stage="evaluation")
    folds = np.array_split(np.random.default_rng(seed).permutation(n), k)
    reports = []
    for fold in folds:
        held_out = set(int(i) for i in fold)
        train_idx = [i for i in range(n) if i not in held_out]
        test_idx = sorted(held_out)
        model = train_forest(matrix[train_idx], [labels[i] for i in train_idx], config)
        reports.append(evaluate_classifier(model, matrix[test_idx], [labels[i] for i in test_idx]))
    return reports


# ==================== Serialization ====================

def forest_to_json(model: RandomForestModel) -> Dict[str, Any]:
    return {
        "format_version": FOREST_FORMAT_VERSION,
        "dim": model.dim,
        "feature_names": list(model.feature_names),
        "config": asdict(model.config),
        "trees": [asdict(tree) for tree in model.trees],
    }


def forest_from_json(data: Dict[str, Any]) -> RandomForestModel:
    if data.get("format_version") != FOREST_FORMAT_VERSION:
        raise InvalidInputError(f"unsupported forest format version {data.get('format_version')!r}",
                                stage="model")
    trees = [DecisionTree(feature=[int(v) for v in t["feature"]],
                          threshold=[float(v) for v in t["threshold"]],
                          left=[int(v) for v in t["left"]],
                          right=[int(v) for v in t["right"]],
                          counts=[[int(a), int(b)] for a, b in t["counts"]])
             for t in data["trees"]]
    return RandomForestModel(trees=trees, config=ForestConfig(**data["config"]),
                             dim=int(data["dim"]), feature_names=list(data.get("feature_names", [])))


def save_forest(model: RandomForestModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(forest_to_json(model), f)


def load_forest(path: str) -> RandomForestModel:
    with open(path, "r", encoding="utf-8") as f:
        return forest_from_json(json.load(f))


__all__ = [
    "FOREST_FORMAT_VERSION",
    "PAPER",
    "NON_PAPER",
    "ForestConfig",
    "DecisionTree",
    "RandomForestModel",
    "InfoGainReport",
    "ClassMetrics",
    "ClassifierEvalReport",
    "encode_labels",
    "build_tree",
    "train_forest",
    "predict",
    "predict_many",
    "entropy",
    "info_gain",
    "binarize_column",
    "rank_features",
    "classification_report",
    "evaluate_classifier",
    "train_test_split",
    "cross_validate_forest",
    "forest_to_json",
    "forest_from_json",
    "save_forest",
    "load_forest",
]
