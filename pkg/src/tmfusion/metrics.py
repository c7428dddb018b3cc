"""Confusion-matrix classification metrics (macro-averaged)."""

from __future__ import annotations

import numpy as np


def confusion_matrix(y_true, y_pred, labels) -> np.ndarray:
    index = {label: i for i, label in enumerate(labels)}
    matrix = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if t in index and p in index:
            matrix[index[t], index[p]] += 1
    return matrix


def classification_metrics(y_true, y_pred, labels) -> dict:
    """Accuracy plus macro precision/recall/F1 over the given label set."""
    matrix = confusion_matrix(y_true, y_pred, labels)
    total = matrix.sum()
    accuracy = matrix.trace() / total if total else 0.0
    precisions, recalls, f1s = [], [], []
    for i in range(len(labels)):
        tp = matrix[i, i]
        fp = matrix[:, i].sum() - tp
        fn = matrix[i, :].sum() - tp
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)
    return {
        "accuracy": float(accuracy),
        "precision": float(np.mean(precisions)),
        "recall": float(np.mean(recalls)),
        "f1": float(np.mean(f1s)),
    }
