import itertools
import warnings

import numpy as np
import pytest

from polarbench.errors import DegenerateClassWarning, SingleClassFold, TooFewPairs
from polarbench.evaluation import (
    ClassifierConfig,
    FoldPlan,
    auroc_binary,
    auroc_multiclass,
    default_comparisons,
    fit_fold_encoder,
    run_benchmark,
    stratified_folds,
    wilcoxon_one_sided,
)
from polarbench.ingest import CATEGORICAL, NUMERIC
from polarbench.report import fold_scores_csv, markdown_summary, wilcoxon_csv, wilcoxon_rows

from conftest import make_dataset


def oracle_auroc(scores, positive):
    pos = [s for s, y in zip(scores, positive) if y]
    neg = [s for s, y in zip(scores, positive) if not y]
    wins = sum(1 for p in pos for q in neg if p > q)
    ties = sum(1 for p in pos for q in neg if p == q)
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def oracle_hand_till(scores, labels):
    present = sorted(set(labels.tolist()))
    total = 0.0
    for i, j in itertools.combinations(present, 2):
        rows = [r for r in range(len(labels)) if labels[r] in (i, j)]
        a_ij = oracle_auroc([scores[r, i] for r in rows], [labels[r] == i for r in rows])
        a_ji = oracle_auroc([scores[r, j] for r in rows], [labels[r] == j for r in rows])
        total += (a_ij + a_ji) / 2
    c = len(present)
    return total * 2 / (c * (c - 1))


def oracle_wilcoxon_p(a, b):
    from scipy.stats import rankdata

    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d = d[d != 0]
    ranks = rankdata(np.abs(d))
    w = ranks[d > 0].sum()
    hits = sum(
        1
        for signs in itertools.product((0, 1), repeat=d.size)
        if np.dot(signs, ranks) >= w - 1e-9
    )
    return hits / 2**d.size


def test_auroc_example():
    assert auroc_binary([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert auroc_binary([0.5, 0.5, 0.5], [0, 1, 1]) == 0.5
    with pytest.raises(SingleClassFold):
        auroc_binary([0.1, 0.2], [1, 1])


def test_auroc_binary_matches_pairwise(rng):
    for _ in range(100):
        n = int(rng.integers(2, 31))
        labels = rng.integers(0, 2, n)
        labels[:2] = [0, 1]
        scores = np.round(rng.random(n), 1)
        assert auroc_binary(scores, labels) == oracle_auroc(scores, labels == 1)


def test_auroc_multiclass_matches_hand_till(rng):
    for _ in range(100):
        n, c = int(rng.integers(4, 21)), int(rng.integers(2, 5))
        labels = rng.integers(0, c, n)
        labels[:2] = [0, 1]
        scores = np.round(rng.random((n, c)), 1)
        assert auroc_multiclass(scores, labels) == oracle_hand_till(scores, labels)


def test_auroc_multiclass_properties():
    labels = np.array([0, 1, 2, 0, 1, 2])
    perfect = np.eye(3)[labels]
    assert auroc_multiclass(perfect, labels) == 1.0
    assert auroc_multiclass(np.full((6, 3), 1 / 3), labels) == 0.5
    # a two-class fold reduces to the binary statistic
    scores = np.array([[0.9, 0.1], [0.4, 0.6], [0.3, 0.7], [0.8, 0.2]])
    y = np.array([0, 1, 0, 1])
    expect = (auroc_binary(scores[:, 0], y == 0) + auroc_binary(scores[:, 1], y == 1)) / 2
    assert auroc_multiclass(scores, y) == expect
    with pytest.raises(SingleClassFold):
        auroc_multiclass(perfect[:1], labels[:1])


def test_wilcoxon_examples():
    res = wilcoxon_one_sided([1, 2, 3, 4, 5], [0, 0, 0, 0, 0])
    assert (res.p, res.statistic, res.n, res.method) == (0.03125, 15.0, 5, "exact")
    assert wilcoxon_one_sided([0, 0, 0, 0, 0], [1, 2, 3, 4, 5]).p == 1.0
    # zero differences are discarded
    assert wilcoxon_one_sided([1, 2, 3, 4, 5, 7], [0, 0, 0, 0, 0, 7]).n == 5
    with pytest.raises(TooFewPairs):
        wilcoxon_one_sided([1, 2, 3], [1, 0, 0])


def test_wilcoxon_exact_matches_enumeration(rng):
    for _ in range(50):
        n = int(rng.integers(3, 13))
        a = np.round(rng.random(n), 1)
        b = np.round(rng.random(n), 1)
        if np.count_nonzero(a - b) < 3:
            continue
        assert wilcoxon_one_sided(a, b, "exact").p == oracle_wilcoxon_p(a, b)


def test_wilcoxon_orientation(rng):
    for _ in range(20):
        a, b = rng.random(10), rng.random(10)
        up = wilcoxon_one_sided(a, b)
        down = wilcoxon_one_sided(b, a)
        # both tails include the observed statistic's point mass
        point = oracle_wilcoxon_p(a, b) + oracle_wilcoxon_p(b, a) - 1
        assert up.p + down.p == pytest.approx(1 + point, abs=1e-12)


def test_wilcoxon_normal_close_to_exact(rng):
    for _ in range(20):
        a, b = rng.random(16), rng.random(16)
        exact = wilcoxon_one_sided(a, b, "exact").p
        assert wilcoxon_one_sided(a, b, "normal").p == pytest.approx(exact, abs=0.02)
    assert wilcoxon_one_sided(rng.random(30), rng.random(30)).method == "normal"


def test_stratified_folds_balance():
    labels = np.array([0] * 23 + [1] * 12 + [2] * 7)
    a = stratified_folds(labels, FoldPlan(5, 3, seed=7))
    assert a.folds.shape == (3, 42)
    for r in range(3):
        sizes = np.bincount(a.folds[r], minlength=5)
        assert sizes.max() - sizes.min() <= 1
        for c in range(3):
            per = np.bincount(a.folds[r][labels == c], minlength=5)
            assert per.max() - per.min() <= 1
        train, test = a.split(r, 2)
        assert np.intersect1d(train, test).size == 0 and train.size + test.size == 42
    assert not np.array_equal(a.folds[0], a.folds[1])
    b = stratified_folds(labels, FoldPlan(5, 3, seed=7))
    assert np.array_equal(a.folds, b.folds)
    assert not np.array_equal(a.folds, stratified_folds(labels, FoldPlan(5, 3, seed=8)).folds)


def test_stratified_folds_small_class_warns():
    with pytest.warns(DegenerateClassWarning):
        a = stratified_folds(np.array([0] * 10 + [1] * 3), FoldPlan(5, 1))
    assert a.warnings and "fewer than 5 folds" in a.warnings[0]
    with pytest.raises(ValueError):
        stratified_folds([0, 1], FoldPlan(1, 1))


def _mixed_dataset(rng, n=60):
    h = np.round(rng.random(n), 2)
    y = np.where(h > 0.5, "hi", "lo")
    h = [None if rng.random() < 0.2 else v for v in h]
    c = [None if rng.random() < 0.2 else ("u" if lab == "hi" else "v") for lab in y]
    return make_dataset({"h": (NUMERIC, h), "c": (CATEGORICAL, c, ["u", "v"])}, y)


def test_benchmark_report_shape(rng):
    data = _mixed_dataset(rng)
    encs = ["polar-boscovich", "impute-indicator"]
    clfs = ["nn", ClassifierConfig("frnn", k=5, p=2), "cart"]
    report = run_benchmark(data, encs, clfs, FoldPlan(3, 2, seed=1), name="mixed")
    assert report.classifiers == ("nn[p=1]", "frnn[p=2]", "cart")
    assert set(report.folds) == {(e, c) for e in encs for c in report.classifiers}
    assert all(len(v) == 6 for v in report.folds.values())
    assert set(report.comparisons) == {("polar-boscovich", "impute-indicator", c) for c in report.classifiers}
    for enc in encs:
        assert report.mean(enc, "nn[p=1]") > 0.8
    lines = fold_scores_csv(report).splitlines()
    assert lines[0] == "dataset,encoding,classifier,mean," + ",".join(
        f"r{r}f{f}" for r in range(2) for f in range(3)
    )
    assert len(lines) == 7
    assert wilcoxon_csv([report]).count("\n") == 4
    md = markdown_summary([report])
    assert "| mixed |" in md and "*" in md
    with pytest.raises(ValueError):
        run_benchmark(data, encs, ["nn", "nn"], FoldPlan(3, 1))
    with pytest.raises(ValueError):
        run_benchmark(data, ["one-hot"], ["nn"], FoldPlan(3, 1))


def test_benchmark_threads_and_seed(rng):
    data = _mixed_dataset(rng)
    args = (data, ["polar-boscovich", "impute"], ["nn-d", "cart"])
    one = run_benchmark(*args, FoldPlan(4, 2, seed=3))
    four = run_benchmark(*args, FoldPlan(4, 2, seed=3), threads=4)
    assert one.folds == four.folds and one.comparisons == four.comparisons
    other = run_benchmark(*args, FoldPlan(4, 2, seed=4))
    assert other.folds != one.folds


def test_constant_attribute_scores_half():
    data = make_dataset({"h": (NUMERIC, [0.3] * 20)}, "ab" * 10)
    report = run_benchmark(data, ["polar-boscovich"], ["nn", "frnn", "cart"], FoldPlan(5, 1))
    for clf in report.classifiers:
        assert report.folds[("polar-boscovich", clf)] == [0.5] * 5


def test_single_class_test_folds_are_skipped():
    data = make_dataset({"h": (NUMERIC, list(range(12)))}, "a" * 10 + "b" * 2)
    report = run_benchmark(data, ["polar-boscovich"], ["nn"], FoldPlan(4, 1))
    scores = report.folds[("polar-boscovich", "nn[p=1]")]
    assert scores.count(None) == 2
    assert any("single-class" in n for n in report.notes)
    assert any("fewer than 4 folds" in n for n in report.notes)


def test_comparisons_and_cross_dataset_rows(rng):
    assert default_comparisons(["impute", "polar-euclidean", "polar-boscovich", "impute-indicator"]) == [
        ("polar-euclidean", "impute"),
        ("polar-euclidean", "impute-indicator"),
        ("polar-boscovich", "impute"),
        ("polar-boscovich", "impute-indicator"),
    ]
    reports = [
        run_benchmark(_mixed_dataset(rng), ["polar-boscovich", "impute"], ["nn"], FoldPlan(3, 1), name=f"d{i}")
        for i in range(4)
    ]
    rows = wilcoxon_rows(reports)
    assert [r[0] for r in rows] == ["d0", "d1", "d2", "d3", "ALL"]


def test_fold_encoder_ignores_test_rows(rng):
    data = _mixed_dataset(rng)
    a = stratified_folds(data.labels, FoldPlan(5, 1))
    train, test = a.split(0, 0)
    before = fit_fold_encoder(data, train, "impute-indicator")
    values = data.values.copy()
    values[test, 0] = 1e6
    values[test, 1] = np.nan
    after = fit_fold_encoder(data.with_values(values), train, "impute-indicator")
    assert before.scaling == after.scaling and before.imputation == after.imputation
