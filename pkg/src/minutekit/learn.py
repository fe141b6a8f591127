"""Pair classifiers: standardization, linear models, k-fold ensembles, metrics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import DimensionMismatch, EmptyDataset, LengthMismatch, SingleClassData, TooFewRows, TrainingDiverged

STD_FLOOR = 1e-12
LOSSES = ("logistic", "hinge")


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _check_features(est, X) -> np.ndarray:
    X = check_array(X, dtype=float)
    if X.shape[1] != est.n_features_in_:
        raise DimensionMismatch(f"expected {est.n_features_in_} features, got {X.shape[1]}")
    return X


class Scaler(BaseEstimator, TransformerMixin):
    """Per-column standardization with a floored standard deviation."""

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise EmptyDataset("cannot fit a scaler on an empty dataset")
        X = check_array(X, dtype=float)
        self.mean_ = X.mean(axis=0)
        self.scale_ = np.maximum(X.std(axis=0), STD_FLOOR)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        return (_check_features(self, X) - self.mean_) / self.scale_

    def to_dict(self) -> dict:
        return {"mean": self.mean_.tolist(), "scale": self.scale_.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Scaler":
        obj = cls()
        obj.mean_ = np.asarray(d["mean"], dtype=float)
        obj.scale_ = np.asarray(d["scale"], dtype=float)
        obj.n_features_in_ = len(obj.mean_)
        return obj


class LinearClassifier(BaseEstimator, ClassifierMixin):
    """Binary linear model trained by full-batch gradient descent.

    Minimizes ``mean(loss) + alpha / 2 * ||w||^2`` with log loss or hinge loss,
    starting from zero weights, so training is deterministic. Labels are 0/1
    (or booleans); probabilities are the sigmoid of the margin for both losses.
    """

    def __init__(self, loss: str = "logistic", alpha: float = 1e-2, learning_rate: float = 0.1,
                 epochs: int = 300, seed: int = 0):
        self.loss = loss
        self.alpha = alpha
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed

    def _objective(self, X, t, w, b) -> float:
        m = X @ w + b
        if self.loss == "logistic":
            data = np.logaddexp(0.0, -t * m).mean()
        else:
            data = np.maximum(0.0, 1.0 - t * m).mean()
        return float(data + 0.5 * self.alpha * w @ w)

    def fit(self, X, y):
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        X, y = check_X_y(X, y, dtype=float)
        y = y.astype(int)
        if len(np.unique(y)) < 2:
            raise SingleClassData("training data must contain both classes")
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        t = 2.0 * y - 1.0
        n = len(y)
        w = np.zeros(X.shape[1])
        b = 0.0
        curve = [self._objective(X, t, w, b)]
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(self.epochs):
                m = X @ w + b
                if self.loss == "logistic":
                    g = -t * sigmoid(-t * m)
                else:
                    g = np.where(t * m < 1.0, -t, 0.0)
                w = w - self.learning_rate * (X.T @ g / n + self.alpha * w)
                b = b - self.learning_rate * float(g.sum() / n)
                curve.append(self._objective(X, t, w, b))
                if not np.isfinite(curve[-1]):
                    raise TrainingDiverged(
                        f"training diverged (learning_rate={self.learning_rate:g}, alpha={self.alpha:g})"
                    )
        self.coef_ = w
        self.intercept_ = b
        self.loss_curve_ = curve
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        return _check_features(self, X) @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(int)

    def to_dict(self) -> dict:
        return {"weights": self.coef_.tolist(), "bias": float(self.intercept_)}

    @classmethod
    def from_dict(cls, d: dict, **params) -> "LinearClassifier":
        obj = cls(**params)
        obj.coef_ = np.asarray(d["weights"], dtype=float)
        obj.intercept_ = float(d["bias"])
        obj.classes_ = np.array([0, 1])
        obj.n_features_in_ = len(obj.coef_)
        return obj


@dataclass
class Metrics:
    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def classification_metrics(preds, golds) -> Metrics:
    """Accuracy/precision/recall/F1 with TRUE as the positive class.

    Precision or recall is ``None`` when its denominator is zero; F1 then too.
    """
    preds = np.asarray(preds, dtype=bool)
    golds = np.asarray(golds, dtype=bool)
    if preds.shape != golds.shape:
        raise LengthMismatch(f"{preds.size} predictions for {golds.size} gold labels")
    if preds.size == 0:
        raise LengthMismatch("metrics need at least one prediction")
    tp = int(np.sum(preds & golds))
    fp = int(np.sum(preds & ~golds))
    fn = int(np.sum(~preds & golds))
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    f1 = None
    if precision is not None and recall is not None:
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(float(np.mean(preds == golds)), precision, recall, f1)


def majority_baseline(golds) -> Metrics:
    """Scores of the constant all-FALSE predictor."""
    golds = np.asarray(golds, dtype=bool)
    return classification_metrics(np.zeros_like(golds), golds)


def _mean_metrics(rows: list[Metrics]) -> Metrics:
    def avg(name):
        vals = [getattr(r, name) for r in rows if getattr(r, name) is not None]
        return float(np.mean(vals)) if vals else None

    return Metrics(avg("accuracy"), avg("precision"), avg("recall"), avg("f1"))


def stratified_folds(y, k: int, seed: int = 0) -> np.ndarray:
    """Fold id per row; each class is shuffled and dealt round-robin over the folds."""
    y = np.asarray(y)
    rng = np.random.RandomState(seed)
    folds = np.empty(len(y), dtype=int)
    offset = 0
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        folds[idx] = (np.arange(len(idx)) + offset) % k
        offset += len(idx)
    return folds


class CVEnsembleClassifier(BaseEstimator, ClassifierMixin):
    """k-fold cross-validation that keeps all k fold models and averages them.

    ``fit`` standardizes with one scaler fit on all rows, trains one
    ``LinearClassifier`` per held-out fold, and records the mean validation
    metrics in ``cv_metrics_``. Prediction averages the fold probabilities.
    """

    def __init__(self, n_splits: int = 10, loss: str = "logistic", alpha: float = 1e-2,
                 learning_rate: float = 0.1, epochs: int = 300, seed: int = 0, threshold: float = 0.5):
        self.n_splits = n_splits
        self.loss = loss
        self.alpha = alpha
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed
        self.threshold = threshold

    def _model_params(self) -> dict:
        return {"loss": self.loss, "alpha": self.alpha, "learning_rate": self.learning_rate,
                "epochs": self.epochs, "seed": self.seed}

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        if X.size == 0:
            raise EmptyDataset("no training rows")
        X, y = check_X_y(X, y, dtype=float)
        y = y.astype(int)
        if len(y) < self.n_splits:
            raise TooFewRows(f"{len(y)} rows cannot be split into {self.n_splits} folds")
        if len(np.unique(y)) < 2:
            raise SingleClassData("training data must contain both classes")
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        self.scaler_ = Scaler().fit(X)
        Z = self.scaler_.transform(X)
        self.folds_ = stratified_folds(y, self.n_splits, self.seed)
        self.models_ = []
        fold_metrics = []
        oof = np.zeros(len(y))
        for f in range(self.n_splits):
            train, valid = self.folds_ != f, self.folds_ == f
            model = LinearClassifier(**self._model_params()).fit(Z[train], y[train])
            self.models_.append(model)
            if valid.any():
                p = model.predict_proba(Z[valid])[:, 1]
                oof[valid] = p
                fold_metrics.append(classification_metrics(p >= self.threshold, y[valid] == 1))
        self.fold_metrics_ = fold_metrics
        self.cv_metrics_ = _mean_metrics(fold_metrics)
        self.oof_scores_ = oof
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "models_")
        Z = self.scaler_.transform(X)
        p = np.mean([m.predict_proba(Z)[:, 1] for m in self.models_], axis=0)
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= self.threshold).astype(int)

    def to_dict(self) -> dict:
        return {
            "params": self.get_params(),
            "scaler": self.scaler_.to_dict(),
            "models": [m.to_dict() for m in self.models_],
            "cv_metrics": self.cv_metrics_.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CVEnsembleClassifier":
        obj = cls(**d["params"])
        obj.scaler_ = Scaler.from_dict(d["scaler"])
        obj.models_ = [LinearClassifier.from_dict(m, **obj._model_params()) for m in d["models"]]
        obj.n_features_in_ = obj.scaler_.n_features_in_
        obj.classes_ = np.array([0, 1])
        obj.cv_metrics_ = Metrics(**d["cv_metrics"])
        return obj


def predict_ensemble(ens: CVEnsembleClassifier, fv) -> tuple[float, bool]:
    fv = np.asarray(fv, dtype=float).reshape(1, -1)
    score = float(ens.predict_proba(fv)[0, 1])
    return score, score >= ens.threshold


DEFAULT_SPACE = {"alpha": (1e-4, 1e2), "learning_rate": (1e-3, 1.0)}


def _log_uniform(rng, lo: float, hi: float) -> float:
    if lo == hi:
        return float(lo)
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def hyperparam_search(X, y, space: dict | None = None, budget: int = 10, seed: int = 0,
                      n_splits: int = 10, loss: str = "logistic", epochs: int = 300) -> dict:
    """Seeded random search; returns the point with the best mean CV F1 (first wins ties).

    Points whose training diverges are skipped; if every point diverges the
    last ``TrainingDiverged`` is raised.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    space = {**DEFAULT_SPACE, **(space or {})}
    rng = np.random.RandomState(seed)
    best, best_f1, diverged = None, -1.0, None
    for _ in range(budget):
        hp = {name: _log_uniform(rng, *space[name]) for name in ("alpha", "learning_rate")}
        try:
            ens = CVEnsembleClassifier(n_splits=n_splits, loss=loss, epochs=epochs, seed=seed, **hp).fit(X, y)
        except TrainingDiverged as exc:
            diverged = exc
            continue
        f1 = ens.cv_metrics_.f1 or 0.0
        if f1 > best_f1:
            best, best_f1 = hp, f1
    if best is None:
        raise diverged
    return best
