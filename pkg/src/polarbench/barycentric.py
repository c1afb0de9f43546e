"""Barycentric values, their normalised and compact representations, and fuzzy partitions.

A barycentric value is a non-negative coefficient vector considered up to
positive scaling. The all-zero vector is admitted and stands for a missing
value; its normalised representation is the zero vector.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, LengthMismatch, MissingNotRepresentable

EQUALITY_TOL = 1e-9
ROW_SUM_TOL = 1e-9


def _as_coeffs(v) -> np.ndarray:
    coeffs = np.asarray(v.coeffs if isinstance(v, BarycentricValue) else v, dtype=float)
    if coeffs.ndim != 1:
        raise DomainError("barycentric coefficients must form a vector")
    if not np.all(np.isfinite(coeffs)):
        raise DomainError("barycentric coefficients must be finite")
    if np.any(coeffs < 0):
        raise DomainError("barycentric coefficients must be non-negative")
    return coeffs


@dataclass(frozen=True, eq=False)
class BarycentricValue:
    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = _as_coeffs(np.asarray(self.coeffs, dtype=float))
        if coeffs.size < 1:
            raise DomainError("a barycentric value needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in coeffs))

    @property
    def is_missing(self) -> bool:
        return not any(self.coeffs)

    def normalized(self) -> np.ndarray:
        return normalize(self)

    def __eq__(self, other):
        if not isinstance(other, BarycentricValue):
            return NotImplemented
        if len(self.coeffs) != len(other.coeffs):
            return False
        # all-zero normalises to zero, so it only matches itself
        return bool(np.allclose(normalize(self), normalize(other), rtol=0.0, atol=EQUALITY_TOL))

    __hash__ = None


def normalize(v) -> np.ndarray:
    """Divide the coefficients by their sum; the zero vector stays zero."""
    coeffs = _as_coeffs(v)
    s = coeffs.sum()
    if s == 0:
        return np.zeros_like(coeffs)
    return coeffs / s


def compact(v) -> np.ndarray:
    """Drop the redundant last coordinate of a normalised value."""
    v = np.asarray(v, dtype=float)
    if v.size and not np.any(v):
        raise MissingNotRepresentable("the zero vector has no compact representation")
    if v.size == 0:
        raise DomainError("empty vector")
    return v[:-1].copy()


def expand(v) -> np.ndarray:
    """Rebuild the full normalised value by appending ``1 - sum(v)``."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if np.any(v < 0):
        raise DomainError("compact coordinates must be non-negative")
    s = v.sum()
    if s > 1 + 1e-12:
        raise DomainError(f"compact coordinates sum to {s} > 1")
    return np.append(v, max(1.0 - s, 0.0))


@dataclass(frozen=True, eq=False)
class FuzzyPartitionMatrix:
    """Records as rows, partition classes as columns; each row sums to 1 (or 0 if missing)."""

    memberships: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.memberships, dtype=float)
        if m.ndim != 2:
            raise DomainError("memberships must be a matrix")
        if np.any((m < 0) | (m > 1)) or not np.all(np.isfinite(m)):
            raise DomainError("membership degrees must lie in [0, 1]")
        sums = m.sum(axis=1)
        bad = ~((np.abs(sums - 1) <= ROW_SUM_TOL) | (np.abs(sums) <= ROW_SUM_TOL))
        if np.any(bad):
            raise DomainError(f"rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        object.__setattr__(self, "memberships", m)

    @property
    def shape(self):
        return self.memberships.shape

    def fuzzy_sets(self) -> list[np.ndarray]:
        """The partition classes as membership vectors over the records."""
        return [self.memberships[:, k].copy() for k in range(self.memberships.shape[1])]

    def is_crisp(self) -> bool:
        m = self.memberships
        return bool(np.all((m == 0) | (m == 1)))

    def to_csv(self, path: str | Path, class_names: Sequence[str] | None = None, delimiter=",") -> None:
        names = list(class_names) if class_names is not None else [
            f"class{k}" for k in range(self.shape[1])
        ]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
            writer.writerow(names)
            for row in self.memberships:
                writer.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path: str | Path, delimiter=",") -> tuple["FuzzyPartitionMatrix", list[str]]:
        with open(path, newline="") as fh:
            reader = csv.reader(fh, delimiter=delimiter)
            names = next(reader)
            rows = [[float(t) for t in r] for r in reader if r]
        return cls(np.array(rows).reshape(len(rows), len(names))), names


def partition_from_attribute(rows: Sequence, m: int) -> FuzzyPartitionMatrix:
    """Stack the normalised representations of a barycentric attribute's values."""
    out = np.zeros((len(rows), m))
    for i, v in enumerate(rows):
        coeffs = normalize(v)
        if coeffs.size != m:
            raise LengthMismatch(f"row {i} has {coeffs.size} coefficients, expected {m}")
        out[i] = coeffs
    return FuzzyPartitionMatrix(out)
