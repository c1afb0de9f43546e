"""Numeric identity checks of the polar geometry, run by ``polarbench selftest``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distance import dist
from .encoding import one_hot_redundant, polar_encode_boscovich, polar_encode_euclidean
from .tree import mia_enumerate, polar_enumerate


@dataclass(frozen=True)
class Check:
    name: str
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: max error {self.max_error:.3e} (tolerance {self.tolerance:g})"


def random_mia_column(rng: np.random.Generator, n: int, missing_rate: float) -> np.ndarray:
    # rounding produces repeated values and exact endpoints
    col = np.round(rng.random(n), int(rng.integers(1, 3)))
    col[rng.random(n) < missing_rate] = np.nan
    return col


def mia_mismatches(column: np.ndarray, encode: Callable = polar_encode_boscovich) -> int:
    """Size of the symmetric difference between MIA and polar bipartition sets."""
    mia = {part for _, part in mia_enumerate(column)}
    pair = np.vstack([encode(x) for x in column]) if column.size else np.zeros((0, 2))
    return len(mia ^ polar_enumerate(pair))


def run_checks(
    euclidean_map: Callable = polar_encode_euclidean,
    boscovich_map: Callable = polar_encode_boscovich,
    seed: int = 0,
    n: int = 1000,
    mia_trials: int = 200,
) -> list[Check]:
    rng = np.random.default_rng(seed)
    xs, ys = rng.random(n), rng.random(n)
    checks = []

    err = max(abs(dist(boscovich_map(x), boscovich_map(y), 1) - 2 * abs(x - y)) for x, y in zip(xs, ys))
    checks.append(Check("boscovich distance is 2|x - y|", err, 1e-12))

    miss_b, miss_e = boscovich_map(None), euclidean_map(None)
    err = max(
        max(abs(dist(miss_b, boscovich_map(x), 1) - 1), abs(dist(miss_e, euclidean_map(x), 2) - 1))
        for x in xs
    )
    checks.append(Check("missing value at distance 1", err, 1e-12))

    err = abs(dist(euclidean_map(0.0), euclidean_map(1.0), 2) - math.sqrt(2))
    checks.append(Check("euclidean extremes at sqrt(2)", err, 1e-9))
    err = abs(dist(euclidean_map(0.5), euclidean_map(1.0), 2) - 0.765)
    checks.append(Check("euclidean midrange to maximum 0.765", err, 5e-4))

    errs = []
    for arity in (2, 3, 5):
        zero = one_hot_redundant(None, arity)
        for i in range(arity):
            ei = one_hot_redundant(i, arity)
            errs += [abs(dist(zero, ei, 1) - 1), abs(dist(zero, ei, 2) - 1)]
            for j in range(i + 1, arity):
                ej = one_hot_redundant(j, arity)
                errs += [abs(dist(ei, ej, 1) - 2), abs(dist(ei, ej, 2) - math.sqrt(2))]
    checks.append(Check("one-hot distances 2 / sqrt(2), missing at 1", max(errs), 1e-12))

    mismatches = 0
    for trial in range(mia_trials):
        rate = (0.0, 0.2, 0.5)[trial % 3]
        col = random_mia_column(rng, int(rng.integers(2, 31)), rate)
        mismatches += mia_mismatches(col)
    checks.append(Check("polar splits equal MIA splits", float(mismatches), 0.0))
    return checks
