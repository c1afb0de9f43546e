"""Nearest-neighbour classifiers: plain NN, Dudani distance-weighted NN and FRNN-OWA.

All three produce a per-class score vector for each query. Distance ties are
broken by ascending training-row index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distance import max_record_distance, pairwise_distances
from .encoding import EncodedMatrix
from .errors import ClassTooSmall, DomainError, EmptyModel, LengthMismatch

UNIFORM = "uniform"
DUDANI = "dudani"
FRNN_OWA = "frnn-owa"

DEFAULT_K = {UNIFORM: 5, DUDANI: 5, FRNN_OWA: 20}


@dataclass(frozen=True, eq=False)
class NeighborModel:
    train: np.ndarray
    labels: np.ndarray
    n_classes: int
    k: int
    p: float = 1
    weighting: str = UNIFORM
    # distance that maps to similarity 0 in FRNN
    max_distance: float = 2.0

    @property
    def effective_k(self) -> int:
        return min(self.k, self.train.shape[0])


def fit_neighbors(
    matrix: EncodedMatrix | np.ndarray,
    labels,
    k: Optional[int] = None,
    p: float = 1,
    weighting: str = UNIFORM,
    n_classes: Optional[int] = None,
) -> NeighborModel:
    """Build a :class:`NeighborModel`.

    ``k`` is capped at the number of training rows. For FRNN-OWA the maximal
    record distance of the encoded layout defines similarity 0; a bare array
    is treated as a single polar-encoded attribute (maximal distance 2).
    """
    if weighting not in DEFAULT_K:
        raise ValueError(f"unknown weighting {weighting!r}")
    if p not in (1, 2):
        raise DomainError("neighbour models support p = 1 or p = 2")
    if isinstance(matrix, EncodedMatrix):
        train = matrix.values
        max_distance = max_record_distance(matrix.groups, p)
    else:
        train = np.atleast_2d(np.asarray(matrix, dtype=float))
        max_distance = 2.0
    labels = np.asarray(labels, dtype=np.int64)
    if train.shape[0] == 0:
        raise EmptyModel("no training rows")
    if labels.shape[0] != train.shape[0]:
        raise LengthMismatch("labels do not match training rows")
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    k = DEFAULT_K[weighting] if k is None else int(k)
    if k < 1:
        raise ValueError("k must be positive")
    if weighting == FRNN_OWA:
        counts = np.bincount(labels, minlength=n_classes)
        if np.any(counts == 0):
            raise ClassTooSmall(f"classes {np.flatnonzero(counts == 0).tolist()} have no training rows")
    return NeighborModel(train, labels, n_classes, k, p, weighting, max_distance or 1.0)


def _distances(model: NeighborModel, query) -> np.ndarray:
    query = np.asarray(query, dtype=float).reshape(1, -1)
    if query.shape[1] != model.train.shape[1]:
        raise LengthMismatch(f"query has {query.shape[1]} columns, model has {model.train.shape[1]}")
    return pairwise_distances(query, model.train, model.p)[0]


def _nearest(model: NeighborModel, d: np.ndarray) -> np.ndarray:
    return np.argsort(d, kind="stable")[: model.effective_k]


def knn_scores(model: NeighborModel, query) -> np.ndarray:
    d = _distances(model, query)
    idx = _nearest(model, d)
    return np.bincount(model.labels[idx], minlength=model.n_classes) / idx.size


def dudani_weights(d_sorted: np.ndarray) -> np.ndarray:
    """Weights ``(d_k - d_i) / (d_k - d_1)``, or all ones if the nearest and farthest tie."""
    d1, dk = d_sorted[0], d_sorted[-1]
    if dk == d1:
        return np.ones_like(d_sorted)
    return (dk - d_sorted) / (dk - d1)


def knn_weighted_scores(model: NeighborModel, query) -> np.ndarray:
    d = _distances(model, query)
    idx = _nearest(model, d)
    w = dudani_weights(d[idx])
    scores = np.bincount(model.labels[idx], weights=w, minlength=model.n_classes)
    return scores / scores.sum()


def linear_owa_weights(n: int) -> np.ndarray:
    """Additive OWA weights ``2(n + 1 - i) / (n(n + 1))`` for ``i = 1..n``."""
    i = np.arange(1, n + 1)
    return 2.0 * (n + 1 - i) / (n * (n + 1))


def owa_upper(sims: np.ndarray, k: int) -> float:
    """Soft maximum: linear OWA over the ``k`` largest values, largest weighted most."""
    if sims.size == 0:
        return 0.0
    top = np.sort(sims)[::-1][:k]
    return float(np.dot(linear_owa_weights(top.size), top))


def owa_lower(values: np.ndarray, k: int) -> float:
    """Soft minimum: linear OWA over the ``k`` smallest values, smallest weighted most."""
    if values.size == 0:
        return 1.0
    low = np.sort(values)[:k]
    return float(np.dot(linear_owa_weights(low.size), low))


def frnn_approximations(model: NeighborModel, query) -> tuple[np.ndarray, np.ndarray]:
    """Upper and lower approximation memberships of ``query`` for every class."""
    d = _distances(model, query)
    sims = np.clip(1.0 - d / model.max_distance, 0.0, 1.0)
    upper = np.empty(model.n_classes)
    lower = np.empty(model.n_classes)
    for c in range(model.n_classes):
        in_class = model.labels == c
        upper[c] = owa_upper(sims[in_class], model.k)
        lower[c] = owa_lower(1.0 - sims[~in_class], model.k)
    return upper, lower


def frnn_owa_scores(model: NeighborModel, query) -> np.ndarray:
    upper, lower = frnn_approximations(model, query)
    return (upper + lower) / 2


_SCORERS = {UNIFORM: knn_scores, DUDANI: knn_weighted_scores, FRNN_OWA: frnn_owa_scores}


def predict_scores(model: NeighborModel, queries) -> np.ndarray:
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    scorer = _SCORERS[model.weighting]
    out = np.empty((queries.shape[0], model.n_classes))
    for i, q in enumerate(queries):
        out[i] = scorer(model, q)
    return out


class NeighborClassifier:
    """Estimator wrapper used by the benchmark harness."""

    def __init__(self, weighting: str = UNIFORM, k: Optional[int] = None, p: float = 1):
        self.weighting = weighting
        self.k = k
        self.p = p
        self.model_: Optional[NeighborModel] = None
        self.classes_: Optional[np.ndarray] = None

    def fit(self, matrix, labels, n_classes: Optional[int] = None) -> "NeighborClassifier":
        labels = np.asarray(labels, dtype=np.int64)
        n_classes = int(labels.max()) + 1 if n_classes is None else n_classes
        # FRNN needs every modelled class to have rows; absent classes score 0
        self.classes_ = np.unique(labels)
        local = np.searchsorted(self.classes_, labels)
        self.n_classes_ = n_classes
        self.model_ = fit_neighbors(
            matrix, local, k=self.k, p=self.p, weighting=self.weighting, n_classes=self.classes_.size
        )
        return self

    def predict_scores(self, matrix) -> np.ndarray:
        if self.model_ is None:
            raise EmptyModel("classifier has not been fitted")
        values = matrix.values if isinstance(matrix, EncodedMatrix) else matrix
        local = predict_scores(self.model_, values)
        out = np.zeros((local.shape[0], self.n_classes_))
        out[:, self.classes_] = local
        return out
