"""Loading delimited datasets with missing values and rescaling to [0, 1].

Cells are stored in a float matrix: numeric attributes hold their value,
categorical attributes hold the 0-based category index, and ``NaN`` marks a
missing value in either kind of column.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyDataset, ParseError, SchemaMismatch

logger = logging.getLogger(__name__)

NUMERIC = "numeric"
CATEGORICAL = "categorical"

DEFAULT_MISSING_MARKERS = frozenset({"?", ""})


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    kind: str
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"unknown attribute kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if not self.categories:
                raise ValueError(f"categorical attribute {self.name!r} has no categories")
            if len(set(self.categories)) != len(self.categories):
                raise ValueError(f"duplicate categories in {self.name!r}")
        elif self.categories:
            raise ValueError(f"numeric attribute {self.name!r} cannot list categories")

    @property
    def is_numeric(self) -> bool:
        return self.kind == NUMERIC

    @property
    def arity(self) -> int:
        return len(self.categories)


@dataclass(frozen=True, eq=False)
class Dataset:
    """A table of cells plus one class label per row."""

    schema: tuple[AttributeSchema, ...]
    values: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        schema = tuple(self.schema)
        values = np.asarray(self.values, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if values.ndim != 2:
            values = values.reshape(len(labels), len(schema))
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(self.class_names))

        names = [a.name for a in schema]
        if len(set(names)) != len(names):
            raise SchemaMismatch("attribute names must be unique")
        if values.shape[1] != len(schema):
            raise SchemaMismatch(
                f"rows have {values.shape[1]} cells but the schema has {len(schema)} attributes"
            )
        if values.shape[0] != labels.shape[0]:
            raise SchemaMismatch("number of labels does not match number of rows")
        if labels.size and (labels.min() < 0 or labels.max() >= len(self.class_names)):
            raise SchemaMismatch("label index out of range of class_names")
        for j, attr in enumerate(schema):
            if attr.kind == CATEGORICAL:
                col = values[:, j]
                present = col[~np.isnan(col)]
                if present.size and (
                    present.min() < 0
                    or present.max() >= attr.arity
                    or np.any(present != np.floor(present))
                ):
                    raise SchemaMismatch(f"invalid category index in column {attr.name!r}")

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def missing_mask(self) -> np.ndarray:
        return np.isnan(self.values)

    def numeric_columns(self) -> list[int]:
        return [j for j, a in enumerate(self.schema) if a.is_numeric]

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        if rows.dtype != bool:
            rows = rows.astype(np.intp)
        return Dataset(self.schema, self.values[rows], self.labels[rows], self.class_names)

    def with_values(self, values: np.ndarray) -> "Dataset":
        return Dataset(self.schema, values, self.labels, self.class_names)


@dataclass(frozen=True)
class ScalingParams:
    """Per numeric attribute minimum and maximum over non-missing training cells."""

    schema: tuple[AttributeSchema, ...]
    columns: tuple[int, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]


def _parse_real(token: str) -> float | None:
    try:
        value = float(token)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def read_schema(path: str | Path) -> tuple[list, tuple[str, ...] | None, int]:
    """Read a sidecar schema file.

    Each line is ``name,kind[,cat1|cat2|...]`` with kind one of ``numeric``,
    ``categorical`` or ``class``. Returns the per-column attribute list (with
    ``None`` at the class column and the bare name for a categorical column
    whose categories are left to inference), the declared class names if any,
    and the index of the class column (the last column unless one is
    declared).
    """
    columns: list = []
    class_index = None
    class_names = None
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",", 2)]
            if len(parts) < 2:
                raise ParseError(f"{path}:{lineno}: expected 'name,kind[,categories]'")
            name, kind = parts[0], parts[1].lower()
            cats = tuple(c.strip() for c in parts[2].split("|")) if len(parts) == 3 else ()
            if kind == "class":
                if class_index is not None:
                    raise ParseError(f"{path}:{lineno}: more than one class column")
                class_index = len(columns)
                class_names = cats or None
                columns.append(None)
            elif kind == CATEGORICAL and not cats:
                # categories inferred from the data in first-appearance order
                columns.append(name)
            elif kind in (NUMERIC, CATEGORICAL):
                try:
                    columns.append(AttributeSchema(name, kind, cats))
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: {exc}") from None
            else:
                raise ParseError(f"{path}:{lineno}: unknown kind {kind!r}")
    if not columns:
        raise ParseError(f"{path}: empty schema")
    if class_index is None:
        class_index = len(columns) - 1
        columns[class_index] = None
    return columns, class_names, class_index


def _first_appearance(tokens: Iterable[str], markers) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for tok in tokens:
        if tok not in markers:
            seen.setdefault(tok, None)
    return tuple(seen)


def load_csv(
    path: str | Path,
    schema: str | Path | None = None,
    missing_markers: Iterable[str] = DEFAULT_MISSING_MARKERS,
    delimiter: str = ",",
) -> Dataset:
    """Load a delimited text file with a header row into a :class:`Dataset`.

    Without a sidecar ``schema`` the last column holds the class, a column is
    numeric iff every non-marker token parses as a real, and categories are
    numbered in order of first appearance. Tokens in ``missing_markers``
    become missing cells. With a sidecar schema, categorical tokens absent
    from the declared category list are treated as missing too.
    """
    markers = frozenset(missing_markers)
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataset(f"{path}: no header row") from None
        rows = []
        for lineno, row in enumerate(reader, 2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise SchemaMismatch(
                    f"{path}:{lineno}: expected {len(header)} fields, found {len(row)}"
                )
            rows.append([tok.strip() for tok in row])
    if not rows:
        raise EmptyDataset(f"{path}: no data rows")

    if schema is not None:
        columns, class_names, class_index = read_schema(schema)
        if len(columns) != len(header):
            raise SchemaMismatch(
                f"schema declares {len(columns)} columns but {path} has {len(header)}"
            )
        for j, col in enumerate(columns):
            if isinstance(col, str):
                cats = _first_appearance((r[j] for r in rows), markers)
                if not cats:
                    raise ParseError(f"{path}: categorical column {col!r} has no values")
                columns[j] = AttributeSchema(col, CATEGORICAL, cats)
    else:
        columns = [None] * len(header)
        class_names = None
        class_index = len(header) - 1
        for j, name in enumerate(header):
            if j == class_index:
                continue
            tokens = [r[j] for r in rows]
            present = [t for t in tokens if t not in markers]
            if all(_parse_real(t) is not None for t in present):
                columns[j] = AttributeSchema(name, NUMERIC)
            else:
                columns[j] = AttributeSchema(name, CATEGORICAL, _first_appearance(present, markers))

    class_tokens = [r[class_index] for r in rows]
    for lineno, tok in enumerate(class_tokens, 2):
        if tok in markers:
            raise ParseError(f"{path}: missing class label in data row {lineno - 1}")
    if class_names is None:
        class_names = _first_appearance(class_tokens, ())
    class_lookup = {c: i for i, c in enumerate(class_names)}
    try:
        labels = np.array([class_lookup[t] for t in class_tokens], dtype=np.int64)
    except KeyError as exc:
        raise ParseError(f"{path}: undeclared class label {exc.args[0]!r}") from None

    attr_cols = [j for j in range(len(header)) if j != class_index]
    attrs = tuple(columns[j] for j in attr_cols)
    values = np.full((len(rows), len(attrs)), np.nan)
    for out_j, (j, attr) in enumerate(zip(attr_cols, attrs)):
        if attr.is_numeric:
            for i, r in enumerate(rows):
                tok = r[j]
                if tok in markers:
                    continue
                value = _parse_real(tok)
                if value is None:
                    raise ParseError(
                        f"{path}: cannot parse {tok!r} in numeric column {attr.name!r} (row {i + 1})"
                    )
                values[i, out_j] = value
        else:
            lookup = {c: k for k, c in enumerate(attr.categories)}
            unseen = 0
            for i, r in enumerate(rows):
                tok = r[j]
                if tok in markers:
                    continue
                k = lookup.get(tok)
                if k is None:
                    unseen += 1
                    continue
                values[i, out_j] = k
            if unseen:
                logger.warning(
                    "%s: %d undeclared categories in %r treated as missing", path, unseen, attr.name
                )
    return Dataset(attrs, values, labels, tuple(class_names))


def align_categories(data: Dataset, schema: Sequence[AttributeSchema]) -> Dataset:
    """Re-express ``data`` under another schema with the same attribute names.

    Categories unknown to ``schema`` become missing cells.
    """
    schema = tuple(schema)
    if [a.name for a in schema] != [a.name for a in data.schema]:
        raise SchemaMismatch("attribute names differ")
    values = data.values.copy()
    for j, (old, new) in enumerate(zip(data.schema, schema)):
        if old.kind != new.kind:
            raise SchemaMismatch(f"attribute {old.name!r} changes kind")
        if old.kind == CATEGORICAL and old.categories != new.categories:
            lookup = {c: k for k, c in enumerate(new.categories)}
            remap = np.array([lookup.get(c, np.nan) for c in old.categories], dtype=float)
            col = values[:, j]
            present = ~np.isnan(col)
            col[present] = remap[col[present].astype(int)]
    return Dataset(schema, values, data.labels, data.class_names)


def fit_scaling(train: Dataset) -> ScalingParams:
    """Fit per-attribute min/max on non-missing training values.

    All-missing columns get the sentinel ``min = max = 0``.
    """
    if len(train) == 0:
        raise EmptyDataset("cannot fit scaling on an empty dataset")
    cols = tuple(train.numeric_columns())
    mins, maxs = [], []
    for j in cols:
        col = train.values[:, j]
        col = col[~np.isnan(col)]
        if col.size == 0:
            mins.append(0.0)
            maxs.append(0.0)
        else:
            mins.append(float(col.min()))
            maxs.append(float(col.max()))
    return ScalingParams(train.schema, cols, tuple(mins), tuple(maxs))


def apply_scaling(data: Dataset, params: ScalingParams) -> Dataset:
    """Map numeric cells to [0, 1]; out-of-range test values are clamped."""
    if data.schema != params.schema:
        raise SchemaMismatch("scaling parameters were fitted on a different schema")
    values = data.values.copy()
    for j, lo, hi in zip(params.columns, params.mins, params.maxs):
        col = values[:, j]
        present = ~np.isnan(col)
        if hi > lo:
            col[present] = np.clip((col[present] - lo) / (hi - lo), 0.0, 1.0)
        else:
            col[present] = 0.5
    return data.with_values(values)
