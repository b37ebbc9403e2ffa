"""
Ranking Model Tests

RankSVM training, pointwise baselines, homepage prediction, evaluation
metrics and model serialization.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from homepage_features import PreferencePair, RankInstance, build_dictionaries, vectorize_page
from ltr_models import (
    LinearRankModel,
    TrainConfig,
    _report_from_predictions,
    assign_folds,
    evaluate_ranker,
    grid_search_lambda,
    load_ranker,
    model_from_json,
    model_to_json,
    predict_homepage,
    save_ranker,
    train_method,
    train_pointwise,
    train_rank_svm,
    violated_pairs,
)
from search_gateway import ResultPage, SearchResult, build_author_query, load_labeled_fixture
from validators.schema_validators import DegenerateTrainingError, InvalidInputError


def _instance(vector, rank=1, label=None):
    return RankInstance(query_id="q", result_rank=rank, vector=vector, label=label)


def _page(n):
    query = build_author_query("Ada Lovelace")
    results = tuple(SearchResult(query.id, i + 1, f"http://site{i}.edu/", f"t{i}", "") for i in range(n))
    return ResultPage(query, results)


@pytest.fixture
def blitzer(fixtures_dir):
    return load_labeled_fixture(os.path.join(fixtures_dir, "blitzer_search.jsonl"))[0]


# ==================== RankSVM ====================

def test_rank_svm_separable_one_dimensional():
    pairs = [PreferencePair("q", _instance({0: 1.0}, rank=1), _instance({}, rank=2 + i)) for i in range(5)]
    model = train_rank_svm(pairs, dim=1)
    assert model.weights[0] > 0, "positive feature must get positive weight"
    assert violated_pairs(model, pairs) == 0


def test_rank_svm_loss_never_increases_on_separable_pairs():
    pairs = [PreferencePair("q", _instance({0: 1.0, 1: 1.0}), _instance({1: 1.0}, rank=2)),
             PreferencePair("q", _instance({0: 1.0}), _instance({2: 1.0}, rank=3))]
    model = train_rank_svm(pairs, dim=3, config=TrainConfig(epochs=50))
    assert len(model.loss_history) == 50
    assert model.loss_history[-1] <= model.loss_history[0]
    history = model.loss_history
    rises = [(i, a, b) for i, (a, b) in enumerate(zip(history, history[1:])) if b > a + 1e-12]
    assert not rises, f"loss rose between epochs: {rises}"
    assert violated_pairs(model, pairs) == 0, "separable pairs must all be ordered after training"


def test_rank_svm_is_seeded():
    pairs = [PreferencePair("q", _instance({0: 1.0}), _instance({1: 1.0}, rank=2 + i)) for i in range(20)]
    a = train_rank_svm(pairs, dim=2, config=TrainConfig(seed=3, batch_size=4))
    b = train_rank_svm(pairs, dim=2, config=TrainConfig(seed=3, batch_size=4))
    np.testing.assert_array_equal(a.weights, b.weights)


def test_rank_svm_rejects_empty_pairs():
    with pytest.raises(InvalidInputError):
        train_rank_svm([], dim=4)


def test_rank_svm_rejects_index_out_of_range():
    pairs = [PreferencePair("q", _instance({5: 1.0}), _instance({}, rank=2))]
    with pytest.raises(InvalidInputError):
        train_rank_svm(pairs, dim=3)


@pytest.mark.parametrize("kwargs", [{"epochs": 0}, {"learning_rate": 0}, {"regularization": -1},
                                    {"batch_size": 0}])
def test_train_config_validation(kwargs):
    with pytest.raises(InvalidInputError):
        TrainConfig(**kwargs)


def test_rank_svm_learns_blitzer_page(blitzer):
    dicts = build_dictionaries([blitzer])
    model = train_method("rank_svm", [blitzer], dicts)
    predicted = predict_homepage(blitzer.page, vectorize_page(blitzer.page, dicts), model)
    assert predicted.url == "http://john.blitzer.com/"


# ==================== Pointwise Baselines ====================

def test_naive_bayes_two_examples():
    model = train_pointwise([_instance({0: 1.0}, label="homepage"), _instance({}, rank=2, label="other")],
                            "naive_bayes", dim=1)
    assert model.predict_proba(_instance({0: 1.0})) > 0.5
    assert model.predict_label(_instance({})) == "other"


def test_pointwise_single_class_is_degenerate():
    instances = [_instance({0: 1.0}, rank=i + 1, label="homepage") for i in range(3)]
    with pytest.raises(DegenerateTrainingError):
        train_pointwise(instances, "naive_bayes", dim=1)


@pytest.mark.parametrize("kind", ["logistic", "linear_svm"])
def test_linear_baselines_separate_simple_data(kind):
    instances = [_instance({0: 1.0}, rank=2 * i + 1, label="homepage") for i in range(5)]
    instances += [_instance({1: 1.0}, rank=2 * i + 2, label="other") for i in range(5)]
    model = train_pointwise(instances, kind, dim=2, config=TrainConfig(epochs=50))
    assert model.predict_label(_instance({0: 1.0})) == "homepage"
    assert model.predict_label(_instance({1: 1.0})) == "other"


def test_unknown_method_rejected(blitzer):
    with pytest.raises(InvalidInputError):
        train_method("gradient_boosting", [blitzer], build_dictionaries([blitzer]))


# ==================== Prediction ====================

def test_predict_homepage_argmax():
    model = LinearRankModel(weights=np.array([1.0]))
    instances = [_instance({0: s}, rank=i + 1) for i, s in enumerate([0.1, 0.9, 0.3, 0.2])]
    assert predict_homepage(_page(4), instances, model).rank == 2


@pytest.mark.parametrize("scale", [0.01, 0.5, 3.0, 1000.0])
def test_predict_homepage_ignores_positive_weight_scaling(scale, blitzer):
    dicts = build_dictionaries([blitzer])
    model = train_method("rank_svm", [blitzer], dicts)
    instances = vectorize_page(blitzer.page, dicts)
    scaled = LinearRankModel(weights=model.weights * scale)
    assert predict_homepage(blitzer.page, instances, scaled) == predict_homepage(blitzer.page, instances, model)

    rng = np.random.default_rng(11)
    for _ in range(20):
        weights = rng.normal(0, 1, 5)
        page_instances = [_instance({int(j): float(rng.uniform(0, 1)) for j in rng.choice(5, 3, replace=False)},
                                    rank=i + 1) for i in range(6)]
        base = predict_homepage(_page(6), page_instances, LinearRankModel(weights=weights))
        assert predict_homepage(_page(6), page_instances, LinearRankModel(weights=weights * scale)) == base


def test_predict_homepage_ties_go_to_lower_rank():
    model = LinearRankModel(weights=np.array([1.0]))
    instances = [_instance({0: 0.5}, rank=i + 1) for i in range(4)]
    assert predict_homepage(_page(4), instances, model).rank == 1


def test_predict_homepage_empty_page():
    with pytest.raises(InvalidInputError):
        predict_homepage(_page(0), [], LinearRankModel(weights=np.array([1.0])))


# ==================== Evaluation ====================

def test_report_nine_of_ten_correct():
    per_query = [(f"q{i}", 1, 1) for i in range(9)] + [("q9", 2, 1)]
    report = _report_from_predictions(per_query)
    assert report.precision == pytest.approx(0.9)
    assert report.recall == pytest.approx(0.9)
    assert report.f1 == pytest.approx(0.9)
    assert report.accuracy == pytest.approx(0.9)


def test_evaluate_ranker_on_training_page(blitzer):
    dicts = build_dictionaries([blitzer])
    model = train_method("rank_svm", [blitzer], dicts)
    report = evaluate_ranker([blitzer], model, dicts)
    assert report.per_query == [(blitzer.query_id, 2, 2)]
    assert report.f1 == 1.0


def test_assign_folds_partitions_indices():
    folds = assign_folds(23, 5, seed=7)
    assert len(folds) == 5
    combined = sorted(int(i) for fold in folds for i in fold)
    assert combined == list(range(23))
    assert max(len(f) for f in folds) - min(len(f) for f in folds) <= 1
    assert [f.tolist() for f in folds] == [f.tolist() for f in assign_folds(23, 5, seed=7)]


@pytest.mark.parametrize("n, k", [(10, 1), (3, 4)])
def test_assign_folds_rejects_bad_k(n, k):
    with pytest.raises(InvalidInputError):
        assign_folds(n, k, seed=7)


def test_grid_search_rejects_empty_grid(blitzer):
    with pytest.raises(InvalidInputError):
        grid_search_lambda([blitzer], [])


# ==================== Serialization ====================

def test_rank_model_json_preserves_scores(blitzer):
    dicts = build_dictionaries([blitzer])
    model = train_method("rank_svm", [blitzer], dicts)
    restored = model_from_json(model_to_json(model))
    for instance in vectorize_page(blitzer.page, dicts):
        assert restored.score(instance) == pytest.approx(model.score(instance))


def test_naive_bayes_json_preserves_scores():
    instances = [_instance({0: 1.0}, label="homepage"), _instance({1: 1.0}, rank=2, label="other")]
    model = train_pointwise(instances, "naive_bayes", dim=2)
    restored = model_from_json(model_to_json(model))
    assert restored.score(instances[0]) == pytest.approx(model.score(instances[0]))


def test_save_and_load_ranker(tmp_path, blitzer):
    dicts = build_dictionaries([blitzer])
    model = train_method("rank_svm", [blitzer], dicts)
    path = str(tmp_path / "ranker.json")
    save_ranker(path, model, dicts)

    loaded, loaded_dicts = load_ranker(path)
    assert loaded_dicts["DOMAIN"].tokens == dicts["DOMAIN"].tokens
    np.testing.assert_allclose(loaded.weights, model.weights)


def test_model_from_json_rejects_unknown_version():
    with pytest.raises(InvalidInputError):
        model_from_json({"format_version": 99, "type": "rank_svm", "dim": 1, "weights": [0.0]})
