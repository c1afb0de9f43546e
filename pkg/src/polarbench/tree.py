"""CART with Gini impurity and minimal cost-complexity pruning, plus MIA split enumeration.

Split predicates are ``value <= threshold`` (left) with thresholds at the
midpoints of consecutive distinct column values. Equal impurities are broken
in favour of the lower column index and then the lower threshold.

``mia_enumerate`` and ``polar_enumerate`` work at the level of achievable
row bipartitions and are used to check that splitting on the two polar
columns of an attribute offers the same choices as MIA splitting on the raw
attribute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .encoding import EncodedMatrix
from .errors import EmptyDataset, EmptyModel, LengthMismatch

_TIE_TOL = 1e-12

GINI = "gini"
MISCLASSIFICATION = "misclassification"


@dataclass
class TreeNode:
    counts: np.ndarray
    column: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def n_samples(self) -> int:
        return int(self.counts.sum())

    def leaves(self) -> Iterator["TreeNode"]:
        if self.is_leaf:
            yield self
        else:
            yield from self.left.leaves()
            yield from self.right.leaves()

    def n_leaves(self) -> int:
        return sum(1 for _ in self.leaves())

    def n_nodes(self) -> int:
        return 1 if self.is_leaf else 1 + self.left.n_nodes() + self.right.n_nodes()

    def depth(self) -> int:
        return 0 if self.is_leaf else 1 + max(self.left.depth(), self.right.depth())

    def paths(self, prefix: str = "") -> set[str]:
        """Node identities as root-to-node strings of ``L``/``R``."""
        out = {prefix}
        if not self.is_leaf:
            out |= self.left.paths(prefix + "L")
            out |= self.right.paths(prefix + "R")
        return out


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n == 0:
        return 0.0
    return float(1.0 - np.dot(counts, counts) / (n * n))


def _best_split(X: np.ndarray, y_onehot: np.ndarray, min_samples_leaf: int):
    n = X.shape[0]
    total = y_onehot.sum(axis=0)
    best = (math.inf, None, None)
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        cum = np.cumsum(y_onehot[order], axis=0)[:-1]
        n_left = np.arange(1, n, dtype=float)
        valid = xs[:-1] < xs[1:]
        valid &= (n_left >= min_samples_leaf) & (n - n_left >= min_samples_leaf)
        if not valid.any():
            continue
        pos = np.flatnonzero(valid)
        left = cum[pos]
        right = total - left
        nl = n_left[pos]
        nr = n - nl
        # n * weighted Gini = sum over sides of (n_side - sum(count^2) / n_side)
        imp = (nl - (left * left).sum(axis=1) / nl + nr - (right * right).sum(axis=1) / nr) / n
        lowest = imp.min()
        i = pos[np.flatnonzero(imp <= lowest + _TIE_TOL)[0]]
        if lowest < best[0] - _TIE_TOL:
            lo, hi = xs[i], xs[i + 1]
            thr = (lo + hi) / 2
            if not lo <= thr < hi:
                thr = lo
            best = (float(lowest), j, float(thr))
    return best


def grow_tree(
    matrix: EncodedMatrix | np.ndarray,
    labels,
    n_classes: Optional[int] = None,
    min_samples_leaf: int = 1,
    max_depth: Optional[int] = None,
) -> TreeNode:
    """Greedy CART growth minimising weighted Gini impurity."""
    X = matrix.values if isinstance(matrix, EncodedMatrix) else np.asarray(matrix, dtype=float)
    X = X.reshape(X.shape[0], -1) if X.ndim != 2 else X
    y = np.asarray(labels, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyDataset("cannot grow a tree on zero rows")
    if y.shape[0] != X.shape[0]:
        raise LengthMismatch("labels do not match rows")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    y_onehot = np.zeros((y.size, n_classes))
    y_onehot[np.arange(y.size), y] = 1.0
    return _grow(X, y_onehot, 0, min_samples_leaf, max_depth)


def _grow(X, y_onehot, depth, min_samples_leaf, max_depth) -> TreeNode:
    counts = y_onehot.sum(axis=0).astype(np.int64)
    node = TreeNode(counts)
    if np.count_nonzero(counts) <= 1:
        return node
    if max_depth is not None and depth >= max_depth:
        return node
    if X.shape[0] < 2 * min_samples_leaf:
        return node
    _, column, threshold = _best_split(X, y_onehot, min_samples_leaf)
    if column is None:
        return node
    go_left = X[:, column] <= threshold
    node.column = column
    node.threshold = threshold
    node.left = _grow(X[go_left], y_onehot[go_left], depth + 1, min_samples_leaf, max_depth)
    node.right = _grow(X[~go_left], y_onehot[~go_left], depth + 1, min_samples_leaf, max_depth)
    return node


def _node_risk(counts: np.ndarray, n_total: int, risk: str) -> float:
    n = counts.sum()
    if risk == GINI:
        return n / n_total * gini(counts)
    if risk == MISCLASSIFICATION:
        return (n - counts.max()) / n_total
    raise ValueError(f"unknown risk {risk!r}")


def _copy(node: TreeNode) -> TreeNode:
    if node.is_leaf:
        return TreeNode(node.counts.copy())
    return TreeNode(node.counts.copy(), node.column, node.threshold, _copy(node.left), _copy(node.right))


def effective_alphas(tree: TreeNode, risk: str = GINI) -> list[tuple[float, int, int, TreeNode]]:
    """``(g, depth, preorder index, node)`` for every internal node.

    ``g = (R(t) - R(T_t)) / (|leaves(T_t)| - 1)`` where ``R`` is the node risk
    relative to the root sample count.
    """
    n_total = tree.n_samples
    out = []
    counter = [0]

    def visit(node, depth):
        idx = counter[0]
        counter[0] += 1
        if node.is_leaf:
            return _node_risk(node.counts, n_total, risk), 1
        rl, ll = visit(node.left, depth + 1)
        rr, lr = visit(node.right, depth + 1)
        subtree_risk, leaves = rl + rr, ll + lr
        g = (_node_risk(node.counts, n_total, risk) - subtree_risk) / (leaves - 1)
        out.append((g, depth, idx, node))
        return subtree_risk, leaves

    visit(tree, 0)
    return out


def prune_ccp(tree: TreeNode, alpha: float, risk: str = GINI) -> TreeNode:
    """Minimal cost-complexity (weakest link) pruning.

    Repeatedly collapses the internal node with the smallest effective alpha
    while that alpha is below ``alpha``; ties go to the node nearest the root.
    Returns a new tree and leaves the input untouched.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    pruned = _copy(tree)
    while not pruned.is_leaf:
        candidates = effective_alphas(pruned, risk)
        g_min = min(c[0] for c in candidates)
        if not g_min < alpha:
            break
        tied = [c for c in candidates if c[0] <= g_min + _TIE_TOL]
        _, _, _, node = min(tied, key=lambda c: (c[1], c[2]))
        node.column = node.threshold = node.left = node.right = None
    return pruned


def predict_scores(tree: TreeNode, row) -> np.ndarray:
    """Leaf class proportions for one encoded row."""
    row = np.asarray(row, dtype=float).reshape(-1)
    node = tree
    while not node.is_leaf:
        if node.column >= row.size:
            raise LengthMismatch(f"row has {row.size} columns, tree splits on column {node.column}")
        node = node.left if row[node.column] <= node.threshold else node.right
    return node.counts / node.counts.sum()


def predict_proba(tree: TreeNode, X) -> np.ndarray:
    X = X.values if isinstance(X, EncodedMatrix) else np.atleast_2d(np.asarray(X, dtype=float))
    return np.vstack([predict_scores(tree, row) for row in X]) if len(X) else np.zeros((0, tree.counts.size))


def export_text(tree: TreeNode, column_names: Sequence[str] | None = None, indent: str = "  ") -> str:
    """Human-readable indented form of a tree."""
    lines = []

    def name(j):
        return column_names[j] if column_names is not None else f"x[{j}]"

    def visit(node, depth):
        pad = indent * depth
        if node.is_leaf:
            lines.append(f"{pad}leaf {node.counts.tolist()}")
            return
        lines.append(f"{pad}{name(node.column)} <= {node.threshold!r}")
        visit(node.left, depth + 1)
        lines.append(f"{pad}{name(node.column)} > {node.threshold!r}")
        visit(node.right, depth + 1)

    visit(tree, 0)
    return "\n".join(lines) + "\n"


class CARTClassifier:
    """Estimator wrapper: grow, then prune with cost-complexity ``alpha``."""

    def __init__(
        self,
        alpha: float = 0.01,
        max_depth: Optional[int] = None,
        min_samples_leaf: int = 1,
        risk: str = GINI,
    ):
        self.alpha = alpha
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.risk = risk
        self.tree_: Optional[TreeNode] = None

    def fit(self, matrix, labels, n_classes: Optional[int] = None) -> "CARTClassifier":
        tree = grow_tree(matrix, labels, n_classes, self.min_samples_leaf, self.max_depth)
        self.tree_ = prune_ccp(tree, self.alpha, self.risk)
        return self

    def predict_scores(self, matrix) -> np.ndarray:
        if self.tree_ is None:
            raise EmptyModel("classifier has not been fitted")
        return predict_proba(self.tree_, matrix)


# --- MIA split enumeration ---------------------------------------------------

LEFT = "left"
RIGHT = "right"
ALONE = "alone"


@dataclass(frozen=True)
class MiaSplit:
    """A split of a raw attribute; ``threshold`` is ``None`` for the missing-alone split."""

    attribute: str
    threshold: Optional[float]
    missing_side: str


Bipartition = frozenset  # frozenset of two disjoint non-empty frozensets of row indices


def bipartition(left, right) -> Bipartition:
    return frozenset({frozenset(int(i) for i in left), frozenset(int(i) for i in right)})


def _midpoints(values: np.ndarray) -> np.ndarray:
    distinct = np.unique(values)
    return (distinct[:-1] + distinct[1:]) / 2


def mia_enumerate(raw_column, attribute: str = "") -> list[tuple[MiaSplit, Bipartition]]:
    """All MIA splits of a raw column (``NaN`` = missing), deduplicated by bipartition.

    Each threshold between distinct non-missing values is offered with the
    missing rows on the left and on the right, plus one split separating
    missing from non-missing rows. Splits with an empty side are dropped.
    """
    col = np.asarray(raw_column, dtype=float)
    rows = np.arange(col.size)
    missing = np.isnan(col)
    present_vals = col[~missing]
    seen: dict[Bipartition, MiaSplit] = {}

    def emit(split, left_mask):
        left, right = rows[left_mask], rows[~left_mask]
        if left.size and right.size:
            seen.setdefault(bipartition(left, right), split)

    for t in _midpoints(present_vals):
        below = np.zeros(col.size, dtype=bool)
        below[~missing] = present_vals <= t
        emit(MiaSplit(attribute, float(t), LEFT), below | missing)
        emit(MiaSplit(attribute, float(t), RIGHT), below)
    emit(MiaSplit(attribute, None, ALONE), missing)
    return [(split, part) for part, split in seen.items()]


def polar_enumerate(pair_columns) -> set[Bipartition]:
    """Bipartitions reachable on the two polar columns of one attribute.

    Includes every single threshold split on either column, and the depth-2
    region where both columns are at their minimum (which, when some rows are
    missing, is exactly the set of missing rows).
    """
    pair = np.asarray(pair_columns, dtype=float)
    if pair.ndim != 2 or pair.shape[1] != 2:
        raise LengthMismatch("expected an (n, 2) array of polar columns")
    rows = np.arange(pair.shape[0])
    out: set[Bipartition] = set()
    for j in range(2):
        col = pair[:, j]
        for t in _midpoints(col):
            left = col <= t
            out.add(bipartition(rows[left], rows[~left]))
    splittable = [j for j in range(2) if np.unique(pair[:, j]).size > 1]
    if splittable:
        corner = np.ones(rows.size, dtype=bool)
        for j in splittable:
            corner &= pair[:, j] == pair[:, j].min()
        if corner.any() and not corner.all():
            out.add(bipartition(rows[corner], rows[~corner]))
    return out
