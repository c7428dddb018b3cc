"""Turning raw numeric tables and token documents into binary features."""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import LABEL_COLUMN, BinaryDataset, DatasetError, _parse_label

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class BinarizeError(ValueError):
    pass


def _nearest_rank(sorted_values: np.ndarray, percentile: float) -> float:
    n = len(sorted_values)
    rank = max(1, math.ceil(percentile / 100.0 * n))
    return float(sorted_values[rank - 1])


@dataclass
class BinningSpec:
    """Per-feature percentile bin edges. A feature with b bins owns b output
    bits; a constant (degenerate) feature collapses to one always-on bit."""

    feature_names: list[str]
    bins: int
    edges: list[list[float]]   # b - 1 interior cut points, or [] if degenerate
    lows: list[float]          # training minimum per feature
    highs: list[float]         # training maximum per feature

    def is_degenerate(self, i: int) -> bool:
        return not self.edges[i]

    def bit_names(self) -> list[str]:
        names = []
        for i, feature in enumerate(self.feature_names):
            if self.is_degenerate(i):
                names.append(f"{feature}_({self.lows[i]}::{self.highs[i]}]")
                continue
            bounds = [self.lows[i]] + self.edges[i] + [self.highs[i]]
            for k in range(self.bins):
                names.append(f"{feature}_({bounds[k]}::{bounds[k + 1]}]")
        return names

    def to_dict(self) -> dict:
        return {
            "feature_names": self.feature_names,
            "bins": self.bins,
            "edges": self.edges,
            "lows": self.lows,
            "highs": self.highs,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def from_dict(cls, doc: dict) -> "BinningSpec":
        return cls(doc["feature_names"], doc["bins"], doc["edges"],
                   doc["lows"], doc["highs"])

    @classmethod
    def load(cls, path) -> "BinningSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit_percentile_bins(feature_names: list[str], values: np.ndarray,
                        bins: int) -> BinningSpec:
    """Edges at the i * (100 / bins) nearest-rank percentiles of each
    feature, computed from training rows only."""
    values = np.asarray(values, dtype=np.float64)
    if bins < 2:
        raise BinarizeError("need at least 2 bins")
    if values.size == 0:
        raise BinarizeError("table is empty")
    if values.shape[1] != len(feature_names):
        raise BinarizeError("feature name count does not match columns")
    edges, lows, highs = [], [], []
    for col in values.T:
        ordered = np.sort(col)
        lows.append(float(ordered[0]))
        highs.append(float(ordered[-1]))
        if ordered[0] == ordered[-1]:
            edges.append([])
            continue
        edges.append([_nearest_rank(ordered, i * 100.0 / bins)
                      for i in range(1, bins)])
    return BinningSpec(list(feature_names), bins, edges, lows, highs)


def apply_bins(spec: BinningSpec, feature_names: list[str], values: np.ndarray,
               labels) -> BinaryDataset:
    """One-hot encode: each value lights exactly one bin bit per feature.
    Out-of-range values clamp to the edge bins."""
    values = np.asarray(values, dtype=np.float64)
    if list(feature_names) != spec.feature_names:
        raise BinarizeError("feature names do not match the fitted spec")
    n = values.shape[0]
    columns = []
    for i, col in enumerate(values.T):
        if spec.is_degenerate(i):
            columns.append(np.ones((n, 1), dtype=np.uint8))
            continue
        idx = np.searchsorted(np.asarray(spec.edges[i]), col, side="left")
        block = np.zeros((n, spec.bins), dtype=np.uint8)
        block[np.arange(n), idx] = 1
        columns.append(block)
    return BinaryDataset(spec.bit_names(), np.hstack(columns), list(labels))


@dataclass
class PopulationStats:
    """Per-feature population means from the training split."""

    feature_names: list[str]
    means: list[float]

    def to_dict(self) -> dict:
        return {"feature_names": self.feature_names, "means": self.means}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def from_dict(cls, doc: dict) -> "PopulationStats":
        return cls(doc["feature_names"], doc["means"])

    @classmethod
    def load(cls, path) -> "PopulationStats":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit_population_stats(feature_names: list[str],
                         values: np.ndarray) -> PopulationStats:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise BinarizeError("table is empty")
    return PopulationStats(list(feature_names),
                           [float(m) for m in values.mean(axis=0)])


def mean_threshold_binarize(feature_names: list[str], values: np.ndarray,
                            labels, stats: PopulationStats) -> BinaryDataset:
    """Bit is 1 iff the value is strictly above the population mean."""
    values = np.asarray(values, dtype=np.float64)
    if list(feature_names) != stats.feature_names:
        missing = set(feature_names) - set(stats.feature_names)
        raise BinarizeError(f"stats do not cover features: {sorted(missing)}"
                            if missing else "feature order does not match stats")
    bits = (values > np.asarray(stats.means)[None, :]).astype(np.uint8)
    return BinaryDataset(list(feature_names), bits, list(labels))


# --- bag of words ------------------------------------------------------------

def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def fit_bow_vocab(documents, vocab_size: int) -> list[str]:
    """Top tokens by document frequency, ties broken alphabetically.
    Documents may be strings or pre-tokenized lists."""
    if vocab_size < 1:
        raise BinarizeError("vocab_size must be >= 1")
    docs = [set(tokenize(d) if isinstance(d, str) else d) for d in documents]
    if not docs:
        raise BinarizeError("corpus is empty")
    freq = {}
    for doc in docs:
        for token in doc:
            freq[token] = freq.get(token, 0) + 1
    ranked = sorted(freq, key=lambda t: (-freq[t], t))
    return ranked[:vocab_size]


def bow_binarize(documents, vocab_size: int, labels,
                 vocab: list[str] | None = None) -> BinaryDataset:
    """Presence bit per vocabulary token. Pass a prefitted vocab to encode
    test documents; tokens outside it are ignored."""
    if vocab is None:
        vocab = fit_bow_vocab(documents, vocab_size)
    index = {t: i for i, t in enumerate(vocab)}
    X = np.zeros((len(list(documents)), len(vocab)), dtype=np.uint8)
    for i, doc in enumerate(documents):
        for token in (tokenize(doc) if isinstance(doc, str) else doc):
            j = index.get(token)
            if j is not None:
                X[i, j] = 1
    return BinaryDataset(list(vocab), X, list(labels))


# --- raw CSV -----------------------------------------------------------------

def load_numeric_csv(path) -> tuple[list[str], np.ndarray, list]:
    """Numeric feature columns plus a final label column."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != LABEL_COLUMN:
            raise DatasetError(f"{path}: final column must be '{LABEL_COLUMN}'")
        names = header[:-1]
        rows, labels = [], []
        for lineno, record in enumerate(reader, start=2):
            if len(record) != len(header):
                raise DatasetError(f"{path}:{lineno}: wrong field count")
            try:
                rows.append([float(v) for v in record[:-1]])
            except ValueError:
                raise DatasetError(f"{path}:{lineno}: non-numeric feature value")
            labels.append(_parse_label(record[-1]))
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return names, np.array(rows, dtype=np.float64), labels
