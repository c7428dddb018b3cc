"""Binary datasets with stable row identifiers and CSV persistence."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

LABEL_COLUMN = "label"


class DatasetError(ValueError):
    pass


def _parse_label(raw: str):
    try:
        return int(raw)
    except ValueError:
        return raw


@dataclass
class BinaryDataset:
    """Rows of 0/1 features plus a label per row.

    Row ids are stable: subsetting keeps the original ids so noise-injection
    ground truth can be traced through cuts and splits.
    """

    feature_names: list[str]
    X: np.ndarray
    labels: list
    ids: np.ndarray = field(default=None)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.uint8)
        if self.X.ndim != 2:
            raise DatasetError("feature matrix must be 2-dimensional")
        if self.X.shape[1] != len(self.feature_names):
            raise DatasetError(
                f"{len(self.feature_names)} feature names for "
                f"{self.X.shape[1]} columns"
            )
        if len(self.labels) != self.X.shape[0]:
            raise DatasetError("label count does not match row count")
        if self.ids is None:
            self.ids = np.arange(self.X.shape[0], dtype=np.int64)
        else:
            self.ids = np.asarray(self.ids, dtype=np.int64)
        if len(self.ids) != self.X.shape[0]:
            raise DatasetError("id count does not match row count")
        if self.X.size and self.X.max() > 1:
            raise DatasetError("feature values must be 0 or 1")
        if len(np.unique(self.ids)) != len(self.ids):
            raise DatasetError("row ids must be unique")
        self.labels = list(self.labels)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def num_features(self) -> int:
        return self.X.shape[1]

    def classes(self) -> list:
        return sorted(set(self.labels), key=lambda c: (str(type(c)), c))

    def subset(self, indices) -> "BinaryDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return BinaryDataset(
            self.feature_names,
            self.X[indices],
            [self.labels[i] for i in indices],
            ids=self.ids[indices],
        )

    def subset_by_ids(self, row_ids) -> "BinaryDataset":
        wanted = set(int(r) for r in row_ids)
        keep = [i for i, rid in enumerate(self.ids) if int(rid) in wanted]
        return self.subset(keep)

    def without_ids(self, row_ids) -> "BinaryDataset":
        drop = set(int(r) for r in row_ids)
        keep = [i for i, rid in enumerate(self.ids) if int(rid) not in drop]
        return self.subset(keep)

    def concat(self, other: "BinaryDataset") -> "BinaryDataset":
        if other.feature_names != self.feature_names:
            raise DatasetError("feature names differ; cannot concatenate")
        next_id = int(max(self.ids.max(), other.ids.max())) + 1 if len(self) and len(other) else 0
        new_ids = np.concatenate([self.ids, np.arange(next_id, next_id + len(other))])
        return BinaryDataset(
            self.feature_names,
            np.vstack([self.X, other.X]),
            self.labels + other.labels,
            ids=new_ids,
        )


def save_csv(dataset: BinaryDataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.feature_names + [LABEL_COLUMN])
        for row, label in zip(dataset.X, dataset.labels):
            writer.writerow([int(v) for v in row] + [label])


def load_csv(path) -> BinaryDataset:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != LABEL_COLUMN:
            raise DatasetError(f"{path}: final column must be '{LABEL_COLUMN}'")
        feature_names = header[:-1]
        rows, labels = [], []
        for lineno, record in enumerate(reader, start=2):
            if len(record) != len(header):
                raise DatasetError(f"{path}:{lineno}: wrong field count")
            values = record[:-1]
            if any(v not in ("0", "1") for v in values):
                raise DatasetError(f"{path}:{lineno}: features must be 0/1")
            rows.append([int(v) for v in values])
            labels.append(_parse_label(record[-1]))
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return BinaryDataset(feature_names, np.array(rows, dtype=np.uint8), labels)


def save_metadata(path, metadata: dict) -> None:
    Path(path).write_text(
        json.dumps(metadata, indent=2, sort_keys=True, default=str) + "\n",
        encoding="utf-8",
    )


def load_metadata(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
