"""Text and Markdown exports of evaluation reports."""

from __future__ import annotations

import csv
import io
from typing import Sequence

import numpy as np

from .errors import TooFewPairs
from .evaluation import EvaluationReport, wilcoxon_one_sided


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def fold_scores_csv(report: EvaluationReport) -> str:
    """One row per (encoding, classifier): every fold AUROC followed by the mean."""
    plan = report.plan
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cells = [f"r{r}f{f}" for r in range(plan.n_repeats) for f in range(plan.n_folds)]
    writer.writerow(["dataset", "encoding", "classifier", "mean", *cells])
    for enc in report.encodings:
        for clf in report.classifiers:
            scores = report.folds[(enc, clf)]
            writer.writerow([report.dataset, enc, clf, _fmt(report.mean(enc, clf)), *map(_fmt, scores)])
    return buf.getvalue()


def wilcoxon_rows(reports: Sequence[EvaluationReport]) -> list[list[str]]:
    """Fold-level comparisons per dataset, then a cross-dataset test on mean AUROCs."""
    rows = []
    pairs = []
    for rep in reports:
        for (a, b, clf), res in rep.comparisons.items():
            if (a, b, clf) not in pairs:
                pairs.append((a, b, clf))
            if res is None:
                rows.append([rep.dataset, clf, a, b, "", "", "", "too few non-zero differences"])
            else:
                rows.append([rep.dataset, clf, a, b, _fmt(res.statistic), _fmt(res.p), str(res.n), res.method])
    if len(reports) > 1:
        for a, b, clf in pairs:
            xa, xb = [], []
            for rep in reports:
                if (a, b, clf) in rep.comparisons:
                    xa.append(rep.mean(a, clf))
                    xb.append(rep.mean(b, clf))
            try:
                res = wilcoxon_one_sided(xa, xb)
            except TooFewPairs:
                rows.append(["ALL", clf, a, b, "", "", "", "too few non-zero differences"])
                continue
            rows.append(["ALL", clf, a, b, _fmt(res.statistic), _fmt(res.p), str(res.n), res.method])
    return rows


def wilcoxon_csv(reports: Sequence[EvaluationReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dataset", "classifier", "encoding_a", "encoding_b", "statistic", "p", "n", "method"])
    writer.writerows(wilcoxon_rows(reports))
    return buf.getvalue()


def markdown_summary(reports: Sequence[EvaluationReport]) -> str:
    """Mean AUROC table (datasets x classifier/encoding) plus the Wilcoxon summary.

    ``*`` marks the highest mean among the encodings of a classifier.
    """
    if not reports:
        return "No results.\n"
    encodings = list(reports[0].encodings)
    classifiers = list(reports[0].classifiers)
    lines = [
        "# Mean AUROC",
        "",
        f"{reports[0].plan.n_repeats} x {reports[0].plan.n_folds}-fold stratified cross-validation, "
        f"seed {reports[0].plan.seed}. `*` marks the higher value.",
        "",
    ]
    header = ["Dataset"] + [f"{clf} {enc}" for clf in classifiers for enc in encodings]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    for rep in reports:
        cells = [rep.dataset]
        for clf in classifiers:
            means = [round(rep.mean(enc, clf), 3) for enc in encodings]
            finite = [m for m in means if not np.isnan(m)]
            best = max(finite) if finite else None
            for m in means:
                text = "n/a" if np.isnan(m) else f"{m:.3f}"
                if best is not None and m == best and len(encodings) > 1:
                    text += "*"
                cells.append(text)
        lines.append("| " + " | ".join(cells) + " |")
    lines += [
        "",
        "# One-sided Wilcoxon signed-rank tests",
        "",
        "Alternative: encoding A scores higher than encoding B. "
        "p below 0.5 favours A, above 0.5 favours B.",
        "",
        "| Dataset | Classifier | A | B | W+ | p |",
        "|---|---|---|---|---|---|",
    ]
    for row in wilcoxon_rows(reports):
        dataset, clf, a, b, stat, p = row[:6]
        stat = f"{float(stat):g}" if stat else "n/a"
        p = f"{float(p):.3g}" if p else "n/a"
        lines.append(f"| {dataset} | {clf} | {a} | {b} | {stat} | {p} |")
    return "\n".join(lines) + "\n"
