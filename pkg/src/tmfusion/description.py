"""Canonical clause-level descriptions of what a trained model learned."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .machine import TMClassifier


@dataclass(frozen=True)
class ClauseRecord:
    class_label: object
    polarity: int
    literals: tuple[int, ...]  # sorted indices in [0, 2f); k >= f means negated
    weight: int

    @property
    def is_empty(self) -> bool:
        return not self.literals

    def render(self, num_features: int, feature_names=None) -> str:
        if self.is_empty:
            return "<empty>"
        return " AND ".join(
            literal_name(k, num_features, feature_names) for k in self.literals)


def literal_name(index: int, num_features: int, feature_names=None) -> str:
    base = index if index < num_features else index - num_features
    name = feature_names[base] if feature_names else f"x{base}"
    return name if index < num_features else f"NOT {name}"


@dataclass
class GlobalDescription:
    num_features: int
    classes: list
    records: list[ClauseRecord]
    params_fingerprint: str
    feature_names: list[str] | None = None

    def group(self, class_label, polarity: int) -> list[ClauseRecord]:
        return [r for r in self.records
                if r.class_label == class_label and r.polarity == polarity]

    def to_dict(self) -> dict:
        return {
            "num_features": self.num_features,
            "classes": self.classes,
            "params_fingerprint": self.params_fingerprint,
            "feature_names": self.feature_names,
            "records": [
                {"class": r.class_label, "polarity": r.polarity,
                 "literals": list(r.literals), "weight": r.weight}
                for r in self.records
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GlobalDescription":
        records = [
            ClauseRecord(r["class"], r["polarity"], tuple(r["literals"]),
                         r["weight"])
            for r in doc["records"]
        ]
        return cls(doc["num_features"], doc["classes"], records,
                   doc["params_fingerprint"], doc.get("feature_names"))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ":")) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    def render(self) -> str:
        lines = []
        for label in self.classes:
            lines.append(f"Class: {label}")
            for polarity, tag in ((1, "+"), (-1, "-")):
                for rec in self.group(label, polarity):
                    body = rec.render(self.num_features, self.feature_names)
                    lines.append(f"  {tag} w={rec.weight}  {body}")
        return "\n".join(lines)


def global_description(model: TMClassifier) -> GlobalDescription:
    """Extract every clause's included literals and weight, canonically
    sorted so equal models serialize identically."""
    n = model.params.ta_states
    half = model.half
    records = []
    for label, states, weights in zip(model.classes, model.states, model.weights):
        for j in range(model.params.clauses_per_class):
            literals = tuple(int(k) for k in np.flatnonzero(states[j] > n))
            polarity = 1 if j < half else -1
            records.append(ClauseRecord(label, polarity, literals,
                                        int(weights[j])))
    class_order = {c: i for i, c in enumerate(model.classes)}
    records.sort(key=lambda r: (class_order[r.class_label], -r.polarity,
                                r.literals, r.weight))
    return GlobalDescription(model.num_features, list(model.classes), records,
                             model.params.fingerprint(), model.feature_names)


def load_description(path) -> GlobalDescription:
    return GlobalDescription.from_dict(
        json.loads(Path(path).read_text(encoding="utf-8")))
