"""Repeated stratified cross-validation, AUROC and one-sided Wilcoxon signed-rank tests."""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

from .encoding import EncodingSpec, FittedEncoder, fit_encoder, get_encoding
from .errors import DegenerateClassWarning, SingleClassFold, TooFewPairs
from .ingest import Dataset
from .neighbors import DUDANI, FRNN_OWA, UNIFORM, NeighborClassifier
from .tree import CARTClassifier

logger = logging.getLogger(__name__)

EXACT_MAX_N = 16


@dataclass(frozen=True)
class FoldPlan:
    n_folds: int = 5
    n_repeats: int = 5
    seed: int = 0


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    """``folds[r, i]`` is the test fold of row ``i`` in repeat ``r``."""

    folds: np.ndarray
    plan: FoldPlan
    warnings: tuple[str, ...] = ()

    def split(self, repeat: int, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = self.folds[repeat] == fold
        return np.flatnonzero(~test), np.flatnonzero(test)


def stratified_folds(labels, plan: FoldPlan = FoldPlan()) -> FoldAssignment:
    """Shuffle each class with the seeded generator and deal its rows round-robin to folds.

    The dealing position carries over from one class to the next so that fold
    sizes stay balanced as well as per-class counts.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if plan.n_folds < 2:
        raise ValueError("need at least two folds")
    rng = np.random.default_rng(plan.seed)
    classes, counts = np.unique(labels, return_counts=True)
    notes = []
    for c, n in zip(classes, counts):
        if n < plan.n_folds:
            msg = f"class {c} has {n} rows, fewer than {plan.n_folds} folds"
            warnings.warn(msg, DegenerateClassWarning, stacklevel=2)
            notes.append(msg)
    folds = np.empty((plan.n_repeats, labels.size), dtype=np.int64)
    for r in range(plan.n_repeats):
        offset = 0
        for c in classes:
            rows = rng.permutation(np.flatnonzero(labels == c))
            folds[r, rows] = (offset + np.arange(rows.size)) % plan.n_folds
            offset = (offset + rows.size) % plan.n_folds
    return FoldAssignment(folds, plan, tuple(notes))


def auroc_binary(scores, labels) -> float:
    """Mann-Whitney estimate of the AUROC; ``labels`` are 1 for positives, 0 otherwise."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassFold("AUROC needs both classes")
    ranks = rankdata(scores)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def auroc_multiclass(scores, labels) -> float:
    """Hand and Till's M: mean over class pairs of the two averaged one-vs-one AUROCs.

    ``scores`` has one column per class; only classes present in ``labels``
    take part.
    """
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    labels = np.asarray(labels, dtype=np.int64)
    present = np.unique(labels)
    if present.size < 2:
        raise SingleClassFold("AUROC needs at least two classes")
    total = 0.0
    for i, j in itertools.combinations(present, 2):
        rows = (labels == i) | (labels == j)
        a_ij = auroc_binary(scores[rows, i], labels[rows] == i)
        a_ji = auroc_binary(scores[rows, j], labels[rows] == j)
        total += (a_ij + a_ji) / 2
    c = present.size
    return float(total * 2 / (c * (c - 1)))


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p: float
    n: int
    method: str


def _exact_upper_tail(doubled_ranks: np.ndarray, observed: int) -> float:
    """P(W+ >= observed) under the sign-flip null, by counting all sign patterns."""
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in doubled_ranks:
        r = int(r)
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    n = doubled_ranks.size
    return float(sum(counts[observed:]) / (2**n))


def wilcoxon_one_sided(a, b, method: str = "auto") -> WilcoxonResult:
    """Signed-rank test of ``a > b`` on paired samples.

    Zero differences are dropped and tied absolute differences share their
    average rank. Exact null distribution for up to 16 pairs, otherwise the
    normal approximation with continuity and tie correction.
    """
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d = d[d != 0]
    n = d.size
    if n < 3:
        raise TooFewPairs(f"only {n} non-zero differences")
    ranks = rankdata(np.abs(d))
    w = float(ranks[d > 0].sum())
    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "normal"
    if method == "exact":
        doubled = np.rint(2 * ranks).astype(np.int64)
        p = _exact_upper_tail(doubled, int(round(2 * w)))
    elif method == "normal":
        mean = n * (n + 1) / 4
        _, tie_counts = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24 - (tie_counts**3 - tie_counts).sum() / 48
        z = (w - mean - 0.5) / math.sqrt(var)
        p = float(ndtr(-z))
    else:
        raise ValueError(f"unknown method {method!r}")
    return WilcoxonResult(w, min(p, 1.0), n, method)


# --- benchmark ----------------------------------------------------------------

CLASSIFIER_NAMES = ("nn", "nn-d", "frnn", "cart")


@dataclass(frozen=True)
class ClassifierConfig:
    name: str
    k: Optional[int] = None
    p: float = 1
    alpha: float = 0.01
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.name not in CLASSIFIER_NAMES:
            raise ValueError(
                f"unknown classifier {self.name!r}; valid names: {', '.join(CLASSIFIER_NAMES)}"
            )

    def build(self):
        if self.name == "cart":
            return CARTClassifier(self.alpha, self.max_depth, self.min_samples_leaf)
        weighting = {"nn": UNIFORM, "nn-d": DUDANI, "frnn": FRNN_OWA}[self.name]
        return NeighborClassifier(weighting, k=self.k, p=self.p)

    @property
    def label(self) -> str:
        if self.name == "cart":
            return "cart"
        return f"{self.name}[p={self.p:g}]"


@dataclass
class CellResult:
    auroc: float | None
    note: str = ""


@dataclass
class EvaluationReport:
    """Fold AUROCs per (encoding, classifier) and Wilcoxon comparisons between encodings.

    ``folds[(encoding, classifier)]`` lists the AUROC of every (repeat, fold)
    cell in order, ``None`` where the test fold held a single class.
    Comparisons use the alternative "first encoding > second encoding".
    """

    dataset: str
    encodings: tuple[str, ...]
    classifiers: tuple[str, ...]
    plan: FoldPlan
    folds: dict[tuple[str, str], list[Optional[float]]]
    comparisons: dict[tuple[str, str, str], Optional[WilcoxonResult]] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def mean(self, encoding: str, classifier: str) -> float:
        vals = [v for v in self.folds[(encoding, classifier)] if v is not None]
        return float(np.mean(vals)) if vals else float("nan")


def fit_fold_encoder(data: Dataset, train_rows, encoding: EncodingSpec | str) -> FittedEncoder:
    """Fit scaling and imputation parameters on the training rows only."""
    return fit_encoder(data.take(train_rows), encoding)


def default_comparisons(encodings: Sequence[str]) -> list[tuple[str, str]]:
    """Every polar encoding against every imputation encoding."""
    polar = [e for e in encodings if get_encoding(e).is_polar]
    baseline = [e for e in encodings if not get_encoding(e).is_polar]
    return [(p, b) for p in polar for b in baseline]


def _run_cell(data, assignment, repeat, fold, encodings, classifiers):
    train, test = assignment.split(repeat, fold)
    test_labels = data.labels[test]
    out = {}
    single_class = np.unique(test_labels).size < 2
    for enc in encodings:
        encoder = fit_fold_encoder(data, train, enc)
        x_train = encoder.transform(data.take(train))
        x_test = encoder.transform(data.take(test))
        for clf in classifiers:
            if single_class:
                out[(enc, clf.label)] = CellResult(None, "single-class test fold")
                continue
            model = clf.build().fit(x_train, data.labels[train], data.n_classes)
            scores = model.predict_scores(x_test)
            out[(enc, clf.label)] = CellResult(auroc_multiclass(scores, test_labels))
    return out


def run_benchmark(
    data: Dataset,
    encodings: Sequence[str],
    classifiers: Sequence[ClassifierConfig | str],
    plan: FoldPlan = FoldPlan(),
    comparisons: Optional[Sequence[tuple[str, str]]] = None,
    threads: int = 1,
    name: str = "dataset",
) -> EvaluationReport:
    """Cross-validate every (encoding, classifier) pair and compare encodings per classifier."""
    encodings = tuple(encodings)
    for e in encodings:
        get_encoding(e)
    classifiers = tuple(c if isinstance(c, ClassifierConfig) else ClassifierConfig(c) for c in classifiers)
    labels_ = [c.label for c in classifiers]
    if len(set(labels_)) != len(labels_):
        raise ValueError("duplicate classifier configuration")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateClassWarning)
        assignment = stratified_folds(data.labels, plan)
    cells = [(r, f) for r in range(plan.n_repeats) for f in range(plan.n_folds)]

    def work(cell):
        return cell, _run_cell(data, assignment, cell[0], cell[1], encodings, classifiers)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(pool.map(work, cells))
    else:
        results = dict(map(work, cells))

    folds = {}
    notes = list(assignment.warnings)
    for enc in encodings:
        for clf in labels_:
            scores = []
            for cell in cells:
                res = results[cell][(enc, clf)]
                scores.append(res.auroc)
            folds[(enc, clf)] = scores
    skipped = sum(1 for cell in cells if next(iter(results[cell].values())).auroc is None)
    if skipped:
        notes.append(f"{skipped} single-class test folds excluded")

    report = EvaluationReport(name, encodings, tuple(labels_), plan, folds, notes=notes)
    pairs = default_comparisons(encodings) if comparisons is None else list(comparisons)
    for a, b in pairs:
        for clf in labels_:
            xa, xb = folds[(a, clf)], folds[(b, clf)]
            keep = [i for i in range(len(xa)) if xa[i] is not None and xb[i] is not None]
            try:
                res = wilcoxon_one_sided([xa[i] for i in keep], [xb[i] for i in keep])
            except TooFewPairs:
                res = None
            report.comparisons[(a, b, clf)] = res
    return report
