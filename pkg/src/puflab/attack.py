"""Logistic-regression modeling attacks on collected CRP data.

Plain full-batch gradient descent on the cross-entropy loss, written directly
against numpy.  A response word with w bits is attacked as w independent
binary problems; they are trained side by side as the columns of one weight
matrix so every epoch costs two matrix products, and a column freezes on its
own as soon as an epoch stops improving its loss.

The sigmoid and the loss are evaluated in overflow-safe forms, the analytic
gradient is exposed separately so it can be checked against finite
differences, and every fit records its loss trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crp import CrpSet, split_crps
from .features import FeatureKind, feature_matrix

__all__ = [
    "sigmoid",
    "cross_entropy",
    "gradient",
    "LrModel",
    "train_logistic",
    "predict",
    "predict_bits",
    "prediction_rate",
    "attack_dataset",
    "AttackReport",
]

DEFAULT_LR = 0.05
DEFAULT_EPOCHS = 500
DEFAULT_TOL = 1e-7


def sigmoid(z):
    """Numerically stable logistic function, exact at 0 and safe at |z| ~ 1000."""
    z = np.asarray(z, dtype=np.float64)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out[0] if scalar else out


def _check_xy(X, y, binary=False):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a non-empty (m, d) matrix")
    if y.shape[:1] != X.shape[:1]:
        raise ValueError("X and y must agree on the number of rows")
    if y.ndim not in (1, 2):
        raise ValueError("y must be (m,) labels or an (m, k) label matrix")
    if binary and y.size and not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("labels must be 0 or 1")
    return X, y


def cross_entropy(weights, X, y, l2: float = 0.0) -> float:
    """Mean cross-entropy of sigmoid(X @ weights) against 0/1 labels.

    The optional ridge term penalises every weight except the bias (last
    entry) and is scaled by 1 / rows like the data term.  Computed as
    logaddexp(0, z) - y * z, which never overflows.
    """
    X, y = _check_xy(X, y)
    weights = np.asarray(weights, dtype=np.float64)
    z = X @ weights
    m = X.shape[0]
    loss = np.mean(np.logaddexp(0.0, z) - y * z, axis=0)
    if l2:
        loss = loss + 0.5 * l2 * np.sum(weights[:-1] ** 2, axis=0) / m
    return float(loss) if np.ndim(loss) == 0 else loss


def gradient(weights, X, y, l2: float = 0.0) -> np.ndarray:
    """Analytic gradient of ``cross_entropy`` with respect to the weights."""
    X, y = _check_xy(X, y)
    weights = np.asarray(weights, dtype=np.float64)
    m = X.shape[0]
    g = X.T @ (sigmoid(X @ weights) - y) / m
    if l2:
        g = g.copy()
        g[:-1] += l2 * weights[:-1] / m
    return g


def _descend(X, Y, lr, epochs, l2, tol):
    """Batched gradient descent; returns (theta, updates per column, loss history).

    ``history[t, j]`` is column j's loss after min(t, updates[j]) steps: row 0
    is the loss of the zero vector and frozen columns carry their last value
    forward, so every column's trace is the full loss trajectory of its own
    independent descent.
    """
    if lr <= 0 or epochs < 1 or tol < 0:
        raise ValueError("need lr > 0, epochs >= 1, tol >= 0")
    m, d = X.shape
    k = Y.shape[1]
    theta = np.zeros((d, k))
    active = np.ones(k, dtype=bool)
    updates = np.zeros(k, dtype=np.int64)
    prev = np.full(k, np.inf)
    history = []
    for _ in range(epochs):
        cols = np.flatnonzero(active)
        if cols.size == 0:
            break
        Ta = theta[:, cols]
        Ya = Y[:, cols]
        Z = X @ Ta
        cur = np.mean(np.logaddexp(0.0, Z) - Ya * Z, axis=0)
        if l2:
            cur = cur + 0.5 * l2 * np.sum(Ta[:-1] ** 2, axis=0) / m
        row = prev.copy()
        row[cols] = cur
        history.append(row)
        stalled = (prev[cols] - cur) < tol
        prev[cols] = cur
        if stalled.any():
            active[cols[stalled]] = False
            keep = ~stalled
            cols, Ta, Ya, Z = cols[keep], Ta[:, keep], Ya[:, keep], Z[:, keep]
            if cols.size == 0:
                break
        G = X.T @ (sigmoid(Z) - Ya) / m
        if l2:
            G[:-1] += l2 * Ta[:-1] / m
        theta[:, cols] = Ta - lr * G
        updates[cols] += 1
    final = cross_entropy(theta, X, Y, l2=l2)
    history.append(np.atleast_1d(np.asarray(final, dtype=np.float64)))
    return theta, updates, np.vstack(history)


@dataclass(frozen=True)
class LrModel:
    """A fitted model for one response bit, plus how its training went.

    ``theta`` has n + 1 entries (bias last) for an n-bit challenge;
    ``feature_map`` names the encoding the model was trained on and is the one
    ``predict`` applies.  ``loss_history`` starts at the all-zero weights and
    ends at the final loss.
    """

    theta: np.ndarray
    feature_map: str
    n_bits: int
    epochs_run: int
    final_loss: float
    loss_history: tuple

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64)
        if theta.ndim != 1 or theta.shape[0] != self.n_bits + 1:
            raise ValueError("theta must have n_bits + 1 entries")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    def predict(self, challenges):
        return predict(self, challenges)


def train_logistic(X, y, lr: float = DEFAULT_LR, epochs: int = DEFAULT_EPOCHS,
                   l2: float = 0.0, tol: float = DEFAULT_TOL,
                   feature_map=FeatureKind.PARITY) -> LrModel:
    """Fit one response bit on an (m, d) feature matrix by gradient descent.

    Weights start at zero and update for at most ``epochs`` full-batch steps;
    training stops early once an epoch improves the loss by less than
    ``tol``.  ``feature_map`` is recorded on the model so predictions encode
    challenges the same way the training rows were encoded.
    """
    X, y = _check_xy(X, y, binary=True)
    if y.ndim != 1:
        raise ValueError("train_logistic fits one bit; use attack_dataset for words")
    theta, updates, history = _descend(X, y[:, None], lr, epochs, l2, tol)
    return LrModel(
        theta=theta[:, 0],
        feature_map=str(FeatureKind(feature_map)),
        n_bits=X.shape[1] - 1,
        epochs_run=int(updates[0]),
        final_loss=float(history[-1, 0]),
        loss_history=tuple(float(v) for v in history[:, 0]),
    )


def predict(model: LrModel, challenges):
    """Model output for challenges: (bit, probability).

    A single challenge gives plain ``(int, float)``; a batch gives two
    arrays.  The bit is 1 exactly when the probability exceeds 0.5, so a
    probability of exactly 0.5 maps to 0 like a dead-heat race.
    """
    bits = np.asarray(challenges)
    single = bits.ndim == 1
    if bits.shape[-1] != model.n_bits:
        raise ValueError(f"challenge has {bits.shape[-1]} bits, "
                         f"model expects {model.n_bits}")
    z = feature_matrix(bits, model.feature_map) @ model.theta
    prob = sigmoid(z)
    bit = (z > 0).astype(np.uint8)
    if single:
        return int(bit[0]), float(prob[0])
    return bit, prob


def predict_bits(weights, X) -> np.ndarray:
    """Hard 0/1 predictions on ready-made feature rows."""
    X = np.asarray(X, dtype=np.float64)
    return (X @ np.asarray(weights, dtype=np.float64) > 0).astype(np.uint8)


def prediction_rate(actual, predicted) -> float:
    """Fraction of predicted bits that match, e.g. 3 of 4 right -> 0.75."""
    actual = np.asarray(actual)
    predicted = np.asarray(predicted)
    if actual.shape != predicted.shape:
        raise ValueError("shape mismatch between actual and predicted bits")
    if actual.size == 0:
        raise ValueError("need at least one bit to score")
    return float(np.mean(actual == predicted))


@dataclass(frozen=True)
class AttackReport:
    """Outcome of one train/test attack run."""

    crp_count: int
    test_fraction: float
    feature_map: str
    per_bit_rate: tuple
    mean_rate: float
    word_exact_rate: float
    seed: object = None

    CSV_HEADER = "crps,test_fraction,feature_map,mean_rate,word_exact_rate"

    def csv_row(self) -> str:
        return (f"{self.crp_count},{self.test_fraction:g},{self.feature_map},"
                f"{self.mean_rate:.4f},{self.word_exact_rate:.4f}")


def attack_dataset(crps: CrpSet, test_fraction: float = 0.15,
                   feature: FeatureKind = FeatureKind.PARITY,
                   lr: float = DEFAULT_LR, epochs: int = DEFAULT_EPOCHS,
                   l2: float = 0.0, tol: float = DEFAULT_TOL,
                   seed=None) -> AttackReport:
    """Split a dataset, fit one model per response bit, score on the held-out part.

    Only the split consumes randomness (via ``seed``); given the dataset and
    hyperparameters the rest is deterministic.  ``mean_rate`` averages the
    per-bit prediction rates; ``word_exact_rate`` is the fraction of test rows
    whose whole response word is reproduced.
    """
    feature = FeatureKind(feature)
    train, test = split_crps(crps, test_fraction, seed=seed)
    X_train = feature_matrix(train.challenges, feature)
    X_test = feature_matrix(test.challenges, feature)
    theta, _, _ = _descend(X_train, train.responses.astype(np.float64),
                           lr, epochs, l2, tol)
    predicted = predict_bits(theta, X_test)
    actual = test.responses
    per_bit = np.mean(predicted == actual, axis=0)
    word_exact = np.mean(np.all(predicted == actual, axis=1))
    return AttackReport(
        crp_count=len(crps),
        test_fraction=test_fraction,
        feature_map=str(feature),
        per_bit_rate=tuple(float(r) for r in per_bit),
        mean_rate=float(per_bit.mean()),
        word_exact_rate=float(word_exact),
        seed=seed,
    )
