"""Minkowski norms and distances, and the distance-to-similarity transform."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .encoding import ColumnGroup, INDICATOR, IMPUTED, ONEHOT, POLAR_POS
from .errors import DomainError, LengthMismatch


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1:
        raise DomainError(f"Minkowski p must be >= 1, got {p}")
    return p


def norm(x, p: float = 1) -> float:
    x = np.abs(np.asarray(x, dtype=float).reshape(-1))
    p = _check_p(p)
    if p == 1:
        return float(x.sum())
    if p == 2:
        return float(np.sqrt(np.dot(x, x)))
    if np.isinf(p):
        return float(x.max(initial=0.0))
    return float((x**p).sum() ** (1 / p))


def dist(x, y, p: float = 1) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise LengthMismatch(f"vectors of length {x.size} and {y.size}")
    return norm(x - y, p)


def similarity(d: float) -> float:
    """``1 - d/2``; only meaningful for distances from Boscovich polar geometry."""
    if d < 0 or d > 2 + 1e-12:
        raise DomainError(f"similarity is defined for distances in [0, 2], got {d}")
    return min(max(1.0 - d / 2, 0.0), 1.0)


def record_distance(a, b, p: float = 1, groups: Sequence[ColumnGroup] | None = None) -> float:
    a = np.asarray(a, dtype=float).reshape(-1)
    if groups is not None:
        width = sum(g.span for g in groups)
        if a.size != width:
            raise LengthMismatch(f"row has {a.size} columns, layout has {width}")
    return dist(a, b, p)


def pairwise_distances(queries: np.ndarray, reference: np.ndarray, p: float = 1) -> np.ndarray:
    """Brute-force distance matrix of shape (n_queries, n_reference).

    Each entry is computed by the same row-wise reduction regardless of how
    the queries are batched, so results do not depend on the batching.
    """
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    reference = np.atleast_2d(np.asarray(reference, dtype=float))
    if queries.shape[1] != reference.shape[1]:
        raise LengthMismatch(
            f"queries have {queries.shape[1]} columns, reference has {reference.shape[1]}"
        )
    p = _check_p(p)
    out = np.empty((queries.shape[0], reference.shape[0]))
    for i, q in enumerate(queries):
        diff = np.abs(reference - q)
        if p == 1:
            out[i] = diff.sum(axis=1)
        elif p == 2:
            out[i] = np.sqrt((diff * diff).sum(axis=1))
        else:
            out[i] = (diff**p).sum(axis=1) ** (1 / p)
    return out


def max_record_distance(groups: Sequence[ColumnGroup], p: float = 1) -> float:
    """Largest possible distance between two rows of an encoded layout.

    A polar pair or a one-hot block of arity >= 2 can differ in two unit
    coordinates; a single-column one-hot block, an imputed numeric column and
    an indicator column in one.
    """
    p = _check_p(p)
    units = 0
    for g in groups:
        roles = list(g.roles)
        if POLAR_POS in roles:
            units += 2
        n_onehot = roles.count(ONEHOT)
        if n_onehot:
            units += 2 if n_onehot > 1 else 1
        units += roles.count(IMPUTED) + roles.count(INDICATOR)
    return float(units ** (1 / p))
