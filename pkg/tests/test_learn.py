import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minutekit.errors import (
    DimensionMismatch,
    EmptyDataset,
    LengthMismatch,
    SingleClassData,
    TooFewRows,
    TrainingDiverged,
)
from minutekit.learn import (
    CVEnsembleClassifier,
    LinearClassifier,
    Metrics,
    Scaler,
    classification_metrics,
    hyperparam_search,
    majority_baseline,
    predict_ensemble,
    stratified_folds,
)


def separable(n=60, seed=0, dims=3):
    rng = np.random.RandomState(seed)
    y = np.arange(n) % 2
    X = rng.normal(size=(n, dims))
    X[:, 0] += np.where(y == 1, 4.0, -4.0)
    return X, y


def logit(p):
    return math.log(p / (1 - p))


def constant_ensemble(probs, n_features=2):
    """Ensemble whose fold models output the given constant probabilities."""
    return CVEnsembleClassifier.from_dict({
        "params": CVEnsembleClassifier(n_splits=len(probs)).get_params(),
        "scaler": {"mean": [0.0] * n_features, "scale": [1.0] * n_features},
        "models": [{"weights": [0.0] * n_features, "bias": logit(p)} for p in probs],
        "cv_metrics": {"accuracy": 1.0, "precision": None, "recall": None, "f1": None},
    })


def test_scaler_examples():
    s = Scaler().fit([[0.0, 5.0], [2.0, 5.0]])
    assert s.transform([[0.0, 5.0], [2.0, 5.0]]).tolist() == [[-1.0, 0.0], [1.0, 0.0]]
    X = np.random.RandomState(1).normal(3, 7, size=(50, 4))
    assert np.abs(Scaler().fit_transform(X).mean(axis=0)).max() < 1e-9
    with pytest.raises(EmptyDataset):
        Scaler().fit(np.zeros((0, 3)))
    with pytest.raises(DimensionMismatch):
        s.transform([[1.0, 2.0, 3.0]])


def test_scaler_round_trip():
    s = Scaler().fit([[1.0, 2.0], [3.0, 5.0]])
    t = Scaler.from_dict(s.to_dict())
    assert np.array_equal(t.transform([[2.0, 2.0]]), s.transform([[2.0, 2.0]]))


@pytest.mark.parametrize("loss", ["logistic", "hinge"])
def test_separable_one_dimension(loss):
    m = LinearClassifier(loss=loss).fit([[-1.0], [1.0]], [0, 1])
    assert m.predict([[2.0]]).tolist() == [1]
    assert m.predict([[-2.0]]).tolist() == [0]


@pytest.mark.parametrize("loss", ["logistic", "hinge"])
def test_symmetric_data_gives_zero_weight(loss):
    m = LinearClassifier(loss=loss).fit([[-1.0], [1.0], [-1.0], [1.0]], [1, 1, 0, 0])
    assert abs(m.coef_[0]) < 1e-6
    assert m.predict_proba([[3.0]])[0, 1] == pytest.approx(0.5, abs=1e-6)


def test_training_is_bitwise_deterministic():
    X, y = separable()
    a = LinearClassifier().fit(X, y)
    b = LinearClassifier().fit(X, y)
    assert a.coef_.tobytes() == b.coef_.tobytes() and a.intercept_ == b.intercept_


def test_single_class_rejected():
    with pytest.raises(SingleClassData):
        LinearClassifier().fit([[0.0], [1.0]], [1, 1])


def test_loss_curve_non_increasing():
    X, y = separable(seed=3)
    curve = LinearClassifier(loss="logistic", learning_rate=1e-2, epochs=200).fit(X, y).loss_curve_
    assert all(b <= a + 1e-12 for a, b in zip(curve, curve[1:]))


def test_hinge_curve_descends_until_the_kink():
    # subgradient steps may jitter once margins sit on the hinge kink
    X, y = separable(seed=3)
    curve = np.array(LinearClassifier(loss="hinge", learning_rate=1e-2, epochs=200).fit(X, y).loss_curve_)
    first_rise = np.flatnonzero(np.diff(curve) > 0)
    assert first_rise.size == 0 or curve[first_rise[0]] < 0.01 * curve[0]
    assert curve[-1] < 0.01 * curve[0]


def test_stratified_folds_balance_classes():
    y = np.array([0] * 7 + [1] * 3)
    folds = stratified_folds(y, 3, seed=4)
    for f in range(3):
        assert 2 <= (folds == f).sum() <= 4
    assert np.array_equal(folds, stratified_folds(y, 3, seed=4))


def test_cv_two_folds_on_four_rows():
    X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    y = np.array([0, 0, 1, 1])
    ens = CVEnsembleClassifier(n_splits=2).fit(X, y)
    assert len(ens.models_) == 2
    assert [(ens.folds_ != f).sum() for f in range(2)] == [2, 2]


def test_cv_separable_is_perfect():
    X, y = separable(n=80)
    ens = CVEnsembleClassifier(n_splits=10).fit(X, y)
    assert ens.cv_metrics_.accuracy == 1.0
    assert len(ens.models_) == 10


def test_cv_errors():
    with pytest.raises(TooFewRows):
        CVEnsembleClassifier(n_splits=5).fit([[0.0], [1.0], [2.0]], [0, 1, 0])
    with pytest.raises(SingleClassData):
        CVEnsembleClassifier(n_splits=2).fit([[0.0], [1.0], [2.0]], [1, 1, 1])


def test_ensemble_serialization_round_trip():
    X, y = separable(n=40)
    ens = CVEnsembleClassifier(n_splits=4).fit(X, y)
    clone = CVEnsembleClassifier.from_dict(ens.to_dict())
    assert np.array_equal(clone.predict_proba(X), ens.predict_proba(X))


def test_predict_ensemble_examples():
    score, label = predict_ensemble(constant_ensemble([0.9] * 10), [0.3, -1.0])
    assert score == pytest.approx(0.9) and label
    score, label = predict_ensemble(constant_ensemble([0.2, 0.8] * 5), [0.0, 0.0])
    assert score == pytest.approx(0.5) and label
    with pytest.raises(DimensionMismatch):
        predict_ensemble(constant_ensemble([0.9]), [1.0, 2.0, 3.0])


def test_identical_fold_models_match_single_model():
    single = constant_ensemble([0.7])
    many = constant_ensemble([0.7] * 10)
    x = [[0.5, -0.5]]
    assert many.predict_proba(x)[0, 1] == pytest.approx(single.predict_proba(x)[0, 1])


def test_hyperparam_search_examples():
    X, y = separable(n=40)
    one = hyperparam_search(X, y, budget=1, seed=5, n_splits=4, epochs=50)
    assert set(one) == {"alpha", "learning_rate"}
    assert 1e-4 <= one["alpha"] <= 1e2 and 1e-3 <= one["learning_rate"] <= 1
    fixed = hyperparam_search(X, y, {"alpha": (0.1, 0.1), "learning_rate": (0.2, 0.2)}, budget=3, n_splits=4, epochs=50)
    assert fixed == {"alpha": 0.1, "learning_rate": 0.2}
    assert hyperparam_search(X, y, budget=4, seed=9, n_splits=4, epochs=50) == \
        hyperparam_search(X, y, budget=4, seed=9, n_splits=4, epochs=50)
    with pytest.raises(ValueError):
        hyperparam_search(X, y, budget=0)


def test_metrics_examples():
    assert classification_metrics([1, 0, 1], [1, 0, 1]).accuracy == 1.0
    m = classification_metrics([0] * 10, [0] * 9 + [1])
    assert m == Metrics(0.9, None, 0.0, None)
    m = classification_metrics([1, 1, 0, 0], [1, 0, 1, 0])
    assert (m.precision, m.recall, m.f1) == (0.5, 0.5, 0.5)
    with pytest.raises(LengthMismatch):
        classification_metrics([1], [1, 0])


def test_majority_baseline():
    golds = [True] * 56 + [False] * 944
    assert majority_baseline(golds).accuracy == pytest.approx(0.944)
    assert majority_baseline([True, True]).accuracy == 0.0
    assert majority_baseline([False, False]).accuracy == 1.0


@given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=40))
def test_metrics_match_confusion_oracle(pairs):
    preds = [p for p, _ in pairs]
    golds = [g for _, g in pairs]
    cells = {(p, g): 0 for p in (True, False) for g in (True, False)}
    for pair in pairs:
        cells[pair] += 1
    tp, fp, fn, tn = cells[True, True], cells[True, False], cells[False, True], cells[False, False]
    m = classification_metrics(preds, golds)
    assert m.accuracy == pytest.approx((tp + tn) / len(pairs))
    assert m.precision == (tp / (tp + fp) if tp + fp else None)
    assert m.recall == (tp / (tp + fn) if tp + fn else None)
    if m.precision is not None and m.recall is not None and tp:
        assert m.f1 == pytest.approx(2 * tp / (2 * tp + fp + fn))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2), st.floats(0.01, 100), st.floats(-50, 50))
def test_affine_rescaling_keeps_labels(dim, scale, shift):
    X, y = separable(n=40, seed=2)
    Xt = X.copy()
    Xt[:, dim] = Xt[:, dim] * scale + shift
    a = CVEnsembleClassifier(n_splits=4, epochs=100).fit(X, y)
    b = CVEnsembleClassifier(n_splits=4, epochs=100).fit(Xt, y)
    probe = np.random.RandomState(7).normal(size=(20, 3)) * 3
    probe_t = probe.copy()
    probe_t[:, dim] = probe_t[:, dim] * scale + shift
    sa, sb = a.predict_proba(probe)[:, 1], b.predict_proba(probe_t)[:, 1]
    assert np.allclose(sa, sb, atol=1e-6)
    clear = np.abs(sa - 0.5) > 1e-6
    assert np.array_equal(a.predict(probe)[clear], b.predict(probe_t)[clear])


def test_divergent_step_size_is_reported():
    X, y = separable(n=20)
    with pytest.raises(TrainingDiverged):
        LinearClassifier(alpha=100.0, learning_rate=1.0, epochs=300).fit(X * 1e3, y)


def test_search_skips_divergent_points():
    X, y = separable(n=40)
    space = {"alpha": (50.0, 100.0), "learning_rate": (0.9, 1.0)}
    with pytest.raises(TrainingDiverged):
        hyperparam_search(X * 1e3, y, space, budget=2, n_splits=4, epochs=300)
