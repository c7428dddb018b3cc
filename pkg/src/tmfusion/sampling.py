"""Stratified splitting, SMOTE on binary features, ASD grading, and
informed oversampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import BinaryDataset
from .fusion import mean_asd
from .machine import ConfigurationError, HyperParams, train

STRATEGIES = (
    "none",
    "random-smote",
    "max-asd-split",
    "top-quartile-asd",
    "drop-min-asd",
    "drop-bottom-quartile-asd",
)


class SamplingError(ValueError):
    pass


@dataclass
class SplitPlan:
    k: int
    repeats: int
    subsets: list[np.ndarray]  # row ids; each repeat's k subsets partition d

    def subset_ids(self) -> list[int]:
        return list(range(len(self.subsets)))


@dataclass
class OversampleStrategy:
    kind: str
    ratio: float = 1.0
    k_neighbors: int = 5

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise SamplingError(
                f"unknown strategy {self.kind!r}; expected one of {STRATEGIES}")
        if not 0 < self.ratio <= 1:
            raise SamplingError("target ratio must lie in (0, 1]")


def stratified_kfold(d: BinaryDataset, k: int, repeats: int,
                     rng: np.random.Generator) -> SplitPlan:
    """k folds per repeat with per-class proportions preserved; each repeat
    is a fresh seeded partition."""
    if k < 2:
        raise SamplingError("k must be >= 2")
    if repeats < 1:
        raise SamplingError("repeats must be >= 1")
    by_class = {}
    for i, label in enumerate(d.labels):
        by_class.setdefault(label, []).append(i)
    for label, rows in by_class.items():
        if len(rows) < k:
            raise SamplingError(
                f"class {label!r} has {len(rows)} rows, fewer than k={k}")
    subsets = []
    for _ in range(repeats):
        folds = [[] for _ in range(k)]
        for label in sorted(by_class, key=str):
            rows = np.array(by_class[label])
            rng.shuffle(rows)
            for j, row in enumerate(rows):
                folds[j % k].append(int(row))
        subsets.extend(np.sort(d.ids[sorted(f)]) for f in folds)
    return SplitPlan(k, repeats, subsets)


def _nearest_minority_neighbors(X: np.ndarray, k: int) -> np.ndarray:
    """k nearest rows per row under Hamming distance, ties by row order."""
    Xi = X.astype(np.int32)
    # pairwise Hamming: differing bits = a + b - 2ab summed over features
    dot = Xi @ Xi.T
    ones = Xi.sum(axis=1)
    dist = ones[:, None] + ones[None, :] - 2 * dot
    np.fill_diagonal(dist, np.iinfo(np.int32).max)
    order = np.argsort(dist, axis=1, kind="stable")
    return order[:, :k]


def smote_binary(d: BinaryDataset, ratio: float, k_neighbors: int,
                 rng: np.random.Generator) -> BinaryDataset:
    """Grow the minority class until minority/majority reaches the target
    ratio. Each synthetic row picks a minority seed row and one of its k
    nearest neighbours, then takes each bit from one of the two by fair
    coin."""
    if not 0 < ratio <= 1:
        raise SamplingError("target ratio must lie in (0, 1]")
    counts = {}
    for label in d.labels:
        counts[label] = counts.get(label, 0) + 1
    if len(counts) != 2:
        raise SamplingError("smote_binary expects exactly two classes")
    (minority, n_min), (majority, n_maj) = sorted(
        counts.items(), key=lambda kv: (kv[1], str(kv[0])))
    target = math.ceil(ratio * n_maj)
    if n_min >= target:
        return d
    if n_min < k_neighbors + 1:
        raise SamplingError(
            f"minority class has {n_min} rows; need at least {k_neighbors + 1}")
    min_rows = np.array([i for i, l in enumerate(d.labels) if l == minority])
    synthetic = _synthesize_minority(d.X[min_rows], target - n_min,
                                     k_neighbors, rng)
    extra = BinaryDataset(d.feature_names, synthetic, [minority] * len(synthetic))
    return d.concat(extra)


def _synthesize_minority(Xm: np.ndarray, n_new: int, k_neighbors: int,
                         rng: np.random.Generator) -> np.ndarray:
    """n_new synthetic rows, each mixing a random seed row with one of its
    k nearest neighbours bit-by-bit under a fair coin."""
    neighbors = _nearest_minority_neighbors(Xm, k_neighbors)
    seeds = rng.integers(len(Xm), size=n_new)
    picks = rng.integers(k_neighbors, size=n_new)
    coins = rng.integers(0, 2, size=(n_new, Xm.shape[1])).astype(bool)
    seed_bits = Xm[seeds]
    neighbor_bits = Xm[neighbors[seeds, picks]]
    return np.where(coins, neighbor_bits, seed_bits).astype(np.uint8)


def grade_splits(plan: SplitPlan, d: BinaryDataset, params: HyperParams,
                 rng: np.random.Generator) -> list[tuple[int, float]]:
    """Train a model per subset and score mean ASD on the held-out remainder
    of d. Sorted by descending ASD, ties by subset id."""
    grades = []
    for sid, row_ids in enumerate(plan.subsets):
        seed = int(rng.integers(2**63))
        sub_params = HyperParams(**{**params.to_dict(), "seed": seed})
        model = train(sub_params, d.subset_by_ids(row_ids))
        held_out = d.without_ids(row_ids)
        if len(held_out) == 0:
            held_out = d
        grades.append((sid, mean_asd(model, held_out)))
    grades.sort(key=lambda g: (-g[1], g[0]))
    return grades


def _select_donor_ids(plan: SplitPlan, grades: list[tuple[int, float]],
                      kind: str) -> np.ndarray:
    asds = np.array([asd for _, asd in grades])
    if kind == "max-asd-split":
        chosen = [grades[0][0]]
    elif kind == "top-quartile-asd":
        cutoff = np.percentile(asds, 75)
        chosen = [sid for sid, asd in grades if asd >= cutoff]
    elif kind == "drop-min-asd":
        chosen = [sid for sid, _ in grades[:-1]]
    elif kind == "drop-bottom-quartile-asd":
        cutoff = np.percentile(asds, 25)
        chosen = [sid for sid, asd in grades if asd > cutoff]
        if not chosen:
            chosen = [grades[0][0]]
    else:
        raise SamplingError(f"unknown strategy {kind!r}")
    ids = np.unique(np.concatenate([plan.subsets[s] for s in chosen]))
    return ids


def informed_oversample(d: BinaryDataset, params: HyperParams,
                        strategy: OversampleStrategy, k: int, repeats: int,
                        rng: np.random.Generator) -> BinaryDataset:
    """ASD-graded donor selection followed by binary SMOTE."""
    if strategy.kind == "none":
        return d
    if strategy.kind == "random-smote":
        return smote_binary(d, strategy.ratio, strategy.k_neighbors, rng)
    plan = stratified_kfold(d, k, repeats, rng)
    grades = grade_splits(plan, d, params, rng)
    donor = d.subset_by_ids(_select_donor_ids(plan, grades, strategy.kind))
    # Graded strategies keep every original row; the grade only decides which
    # subset donates the seed/neighbour pool for the synthetic minority rows.
    counts = {}
    for label in d.labels:
        counts[label] = counts.get(label, 0) + 1
    if len(counts) != 2:
        raise SamplingError("informed_oversample expects exactly two classes")
    (minority, n_min), (_, n_maj) = sorted(
        counts.items(), key=lambda kv: (kv[1], str(kv[0])))
    target = math.ceil(strategy.ratio * n_maj)
    if n_min >= target:
        return d
    donor_rows = np.array([i for i, l in enumerate(donor.labels)
                           if l == minority])
    if len(donor_rows) < strategy.k_neighbors + 1:
        raise SamplingError(
            f"donor subset has {len(donor_rows)} minority rows; need at "
            f"least {strategy.k_neighbors + 1}")
    synthetic = _synthesize_minority(donor.X[donor_rows], target - n_min,
                                     strategy.k_neighbors, rng)
    extra = BinaryDataset(d.feature_names, synthetic,
                          [minority] * len(synthetic))
    return d.concat(extra)
