"""Polar encoding, one-hot encoding and the imputation + missing-indicator baseline."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, MissingNotRepresentable, SchemaMismatch
from .ingest import AttributeSchema, Dataset, ScalingParams, apply_scaling, fit_scaling

BOSCOVICH = "boscovich"
EUCLIDEAN = "euclidean"

# column role tags
POLAR_POS = "polar-pos"
POLAR_NEG = "polar-neg"
ONEHOT = "onehot"
INDICATOR = "indicator"
IMPUTED = "imputed"


def is_missing(x) -> bool:
    return x is None or (isinstance(x, (float, np.floating)) and math.isnan(x))


def _check_unit(x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"polar encoding is defined on [0, 1], got {x!r}")


def polar_encode_boscovich(x) -> np.ndarray:
    """Map ``x`` in [0, 1] to ``<x, 1 - x>`` and a missing value to ``<0, 0>``."""
    if is_missing(x):
        return np.zeros(2)
    _check_unit(x)
    return np.array([x, 1.0 - x])


def polar_encode_euclidean(x) -> np.ndarray:
    """Map ``x`` in [0, 1] onto the Euclidean unit quarter circle, missing to the origin."""
    if is_missing(x):
        return np.zeros(2)
    _check_unit(x)
    angle = x * math.pi / 2
    return np.array([math.sin(angle), math.cos(angle)])


def polar_columns(column: np.ndarray, variant: str = BOSCOVICH) -> np.ndarray:
    """Vectorised polar map of a column with ``NaN`` for missing; returns shape (n, 2)."""
    column = np.asarray(column, dtype=float)
    present = ~np.isnan(column)
    x = column[present]
    if np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("polar encoding is defined on [0, 1]")
    out = np.zeros((column.shape[0], 2))
    if variant == BOSCOVICH:
        out[present, 0] = x
        out[present, 1] = 1.0 - x
    elif variant == EUCLIDEAN:
        angle = x * (math.pi / 2)
        out[present, 0] = np.sin(angle)
        out[present, 1] = np.cos(angle)
    else:
        raise ValueError(f"unknown polar variant {variant!r}")
    return out


def one_hot_redundant(c, arity: int) -> np.ndarray:
    if arity < 1:
        raise DomainError("arity must be positive")
    out = np.zeros(arity)
    if is_missing(c):
        return out
    c = int(c)
    if not 0 <= c < arity:
        raise DomainError(f"category index {c} out of range for arity {arity}")
    out[c] = 1.0
    return out


def one_hot_compact(c, arity: int) -> np.ndarray:
    """Compact one-hot: the last category maps to the zero vector.

    Missing values cannot be represented, since zero already means the last
    category.
    """
    if is_missing(c):
        raise MissingNotRepresentable("compact one-hot encoding cannot represent a missing value")
    return one_hot_redundant(c, arity)[:-1]


def one_hot_columns(column: np.ndarray, arity: int) -> np.ndarray:
    column = np.asarray(column, dtype=float)
    out = np.zeros((column.shape[0], arity))
    present = ~np.isnan(column)
    idx = column[present].astype(int)
    if idx.size and (idx.min() < 0 or idx.max() >= arity):
        raise DomainError("category index out of range")
    out[np.flatnonzero(present), idx] = 1.0
    return out


@dataclass(frozen=True)
class ColumnGroup:
    """The encoded columns ``[start, stop)`` produced from one source attribute."""

    attribute: str
    start: int
    stop: int
    roles: tuple[str, ...]
    labels: tuple[str, ...]

    @property
    def span(self) -> int:
        return self.stop - self.start

    @property
    def column_names(self) -> list[str]:
        return [self.attribute + lab for lab in self.labels]


@dataclass(eq=False)
class EncodedMatrix:
    values: np.ndarray
    groups: tuple[ColumnGroup, ...]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.groups = tuple(self.groups)
        if self.values.ndim != 2:
            raise SchemaMismatch("encoded values must be a matrix")
        width = sum(g.span for g in self.groups)
        if width != self.values.shape[1]:
            raise SchemaMismatch(f"groups span {width} columns, matrix has {self.values.shape[1]}")

    @property
    def shape(self):
        return self.values.shape

    @property
    def column_names(self) -> list[str]:
        return [name for g in self.groups for name in g.column_names]

    def group(self, attribute: str) -> ColumnGroup:
        for g in self.groups:
            if g.attribute == attribute:
                return g
        raise KeyError(attribute)

    def take(self, rows) -> "EncodedMatrix":
        return EncodedMatrix(self.values[np.asarray(rows)], self.groups)


class _GroupBuilder:
    def __init__(self):
        self.blocks: list[np.ndarray] = []
        self.groups: list[ColumnGroup] = []
        self.width = 0

    def add(self, attribute: str, block: np.ndarray, roles: Sequence[str], labels: Sequence[str]):
        block = np.asarray(block, dtype=float).reshape(block.shape[0], len(roles))
        self.blocks.append(block)
        self.groups.append(
            ColumnGroup(attribute, self.width, self.width + block.shape[1], tuple(roles), tuple(labels))
        )
        self.width += block.shape[1]

    def build(self, n_rows: int) -> EncodedMatrix:
        values = np.hstack(self.blocks) if self.blocks else np.zeros((n_rows, 0))
        return EncodedMatrix(values, tuple(self.groups))


def encode_polar(data: Dataset, variant: str = BOSCOVICH) -> EncodedMatrix:
    """Polar-encode every attribute of an already rescaled dataset.

    Numeric attributes become two columns, categorical attributes a redundant
    one-hot block; missing cells become zero vectors in both cases.
    """
    builder = _GroupBuilder()
    for j, attr in enumerate(data.schema):
        col = data.values[:, j]
        if attr.is_numeric:
            builder.add(attr.name, polar_columns(col, variant), (POLAR_POS, POLAR_NEG), (".pos", ".neg"))
        else:
            builder.add(
                attr.name,
                one_hot_columns(col, attr.arity),
                (ONEHOT,) * attr.arity,
                tuple(f"={c}" for c in attr.categories),
            )
    return builder.build(len(data))


@dataclass(frozen=True)
class ImputationParams:
    """Mean (numeric) or mode (categorical) per attribute, and whether it was ever missing."""

    schema: tuple[AttributeSchema, ...]
    fill: tuple[float, ...]
    has_missing: tuple[bool, ...]


def fit_imputation(train: Dataset) -> ImputationParams:
    fill = []
    has_missing = []
    for j, attr in enumerate(train.schema):
        col = train.values[:, j]
        present = col[~np.isnan(col)]
        has_missing.append(bool(present.size < col.size))
        if attr.is_numeric:
            fill.append(float(present.mean()) if present.size else 0.5)
        else:
            if present.size:
                counts = np.bincount(present.astype(int), minlength=attr.arity)
                fill.append(float(np.argmax(counts)))  # argmax returns the lowest index on ties
            else:
                fill.append(0.0)
    return ImputationParams(train.schema, tuple(fill), tuple(has_missing))


def encode_baseline(data: Dataset, params: ImputationParams, indicators: bool = True) -> EncodedMatrix:
    """Mean/mode imputation, one-hot for categoricals, plus missing-indicator columns.

    Indicator columns are only emitted for attributes that had at least one
    missing value in the data the parameters were fitted on.
    """
    if data.schema != params.schema:
        raise SchemaMismatch("imputation parameters were fitted on a different schema")
    builder = _GroupBuilder()
    for j, attr in enumerate(data.schema):
        col = data.values[:, j]
        missing = np.isnan(col)
        filled = np.where(missing, params.fill[j], col)
        if attr.is_numeric:
            blocks = [filled[:, None]]
            roles = [IMPUTED]
            labels = [""]
        else:
            blocks = [one_hot_columns(filled, attr.arity)]
            roles = [ONEHOT] * attr.arity
            labels = [f"={c}" for c in attr.categories]
        if indicators and params.has_missing[j]:
            blocks.append(missing.astype(float)[:, None])
            roles.append(INDICATOR)
            labels.append(".missing")
        builder.add(attr.name, np.hstack(blocks), roles, labels)
    return builder.build(len(data))


# numeric schemes
POLAR_BOSCOVICH = "PolarBoscovich"
POLAR_EUCLIDEAN = "PolarEuclidean"
IMPUTE_INDICATOR = "ImputeIndicator"
# categorical schemes
POLAR_ONE_HOT = "PolarOneHot"
IMPUTE_INDICATOR_ONE_HOT = "ImputeIndicatorOneHot"


@dataclass(frozen=True)
class EncodingSpec:
    numeric_scheme: str
    categorical_scheme: str
    indicators: bool = True

    def __post_init__(self):
        if self.numeric_scheme in (POLAR_BOSCOVICH, POLAR_EUCLIDEAN):
            ok = self.categorical_scheme == POLAR_ONE_HOT
        elif self.numeric_scheme == IMPUTE_INDICATOR:
            ok = self.categorical_scheme == IMPUTE_INDICATOR_ONE_HOT
        else:
            raise ValueError(f"unknown numeric scheme {self.numeric_scheme!r}")
        if not ok:
            raise ValueError(
                f"{self.numeric_scheme} cannot be combined with {self.categorical_scheme}"
            )

    @property
    def is_polar(self) -> bool:
        return self.numeric_scheme != IMPUTE_INDICATOR


ENCODINGS: dict[str, EncodingSpec] = {
    "polar-boscovich": EncodingSpec(POLAR_BOSCOVICH, POLAR_ONE_HOT),
    "polar-euclidean": EncodingSpec(POLAR_EUCLIDEAN, POLAR_ONE_HOT),
    "impute-indicator": EncodingSpec(IMPUTE_INDICATOR, IMPUTE_INDICATOR_ONE_HOT),
    "impute": EncodingSpec(IMPUTE_INDICATOR, IMPUTE_INDICATOR_ONE_HOT, indicators=False),
}


def get_encoding(name: str) -> EncodingSpec:
    try:
        return ENCODINGS[name]
    except KeyError:
        raise ValueError(
            f"unknown encoding {name!r}; valid names: {', '.join(ENCODINGS)}"
        ) from None


@dataclass(frozen=True)
class FittedEncoder:
    """Scaling and imputation parameters learned from a training partition."""

    spec: EncodingSpec
    scaling: ScalingParams
    imputation: Optional[ImputationParams]

    def transform(self, data: Dataset) -> EncodedMatrix:
        scaled = apply_scaling(data, self.scaling)
        if self.spec.numeric_scheme == POLAR_BOSCOVICH:
            return encode_polar(scaled, BOSCOVICH)
        if self.spec.numeric_scheme == POLAR_EUCLIDEAN:
            return encode_polar(scaled, EUCLIDEAN)
        return encode_baseline(scaled, self.imputation, indicators=self.spec.indicators)


def fit_encoder(train: Dataset, spec: EncodingSpec | str) -> FittedEncoder:
    if isinstance(spec, str):
        spec = get_encoding(spec)
    scaling = fit_scaling(train)
    imputation = None if spec.is_polar else fit_imputation(apply_scaling(train, scaling))
    return FittedEncoder(spec, scaling, imputation)


_SUFFIX_ROLES = {".pos": POLAR_POS, ".neg": POLAR_NEG, ".missing": INDICATOR}


def write_encoded(
    path: str | Path,
    matrix: EncodedMatrix,
    labels: Sequence[str] | None = None,
    delimiter: str = ",",
) -> None:
    """Write an encoded matrix with an ``attr.tag`` header; labels go in a trailing ``class`` column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        header = matrix.column_names + (["class"] if labels is not None else [])
        writer.writerow(header)
        for i, row in enumerate(matrix.values):
            out = [repr(float(v)) for v in row]
            if labels is not None:
                out.append(labels[i])
            writer.writerow(out)


def _split_name(name: str) -> tuple[str, str, str]:
    for suffix, role in _SUFFIX_ROLES.items():
        if name.endswith(suffix):
            return name[: -len(suffix)], role, suffix
    if "=" in name:
        attr, cat = name.split("=", 1)
        return attr, ONEHOT, "=" + cat
    return name, IMPUTED, ""


def read_encoded(path: str | Path, delimiter: str = ",") -> tuple[EncodedMatrix, list[str] | None]:
    """Read a file produced by :func:`write_encoded`; returns the matrix and labels (if present)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader)
        rows = list(reader)
    has_labels = bool(header) and header[-1] == "class"
    names = header[:-1] if has_labels else header
    groups: list[ColumnGroup] = []
    current = None
    for j, name in enumerate(names):
        attr, role, label = _split_name(name)
        if current is not None and current[0] == attr:
            current[2].append(role)
            current[3].append(label)
        else:
            if current is not None:
                groups.append(ColumnGroup(current[0], current[1], j, tuple(current[2]), tuple(current[3])))
            current = [attr, j, [role], [label]]
    if current is not None:
        groups.append(ColumnGroup(current[0], current[1], len(names), tuple(current[2]), tuple(current[3])))
    width = len(names)
    values = np.array([[float(t) for t in r[:width]] for r in rows]).reshape(len(rows), width)
    labels = [r[-1] for r in rows] if has_labels else None
    return EncodedMatrix(values, tuple(groups)), labels
