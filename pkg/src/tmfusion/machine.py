"""Weighted Tsetlin Machine classifier.

Each class owns a pool of conjunctive clauses. A clause is a team of 2f
two-action Tsetlin Automata (one per literal: features first, negations
second), an integer weight and a polarity. The first half of every pool is
positive polarity, the second half negative.

Automaton states live in [1, 2N]; states above N mean the literal is
included in the clause. Rewards push the state deeper into its current
action's half, penalties push it toward the centre.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1

TRAINING = "training"
INFERENCE = "inference"


class ConfigurationError(ValueError):
    pass


class DimensionError(ValueError):
    pass


class UnknownClassError(KeyError):
    pass


@dataclass(frozen=True)
class HyperParams:
    clauses_per_class: int = 10
    threshold: int = 15
    specificity: float = 3.9
    ta_states: int = 100
    boost_true_positives: bool = False
    epochs: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.clauses_per_class < 2 or self.clauses_per_class % 2:
            raise ConfigurationError("clauses_per_class must be even and >= 2")
        if self.threshold < 1:
            raise ConfigurationError("threshold must be >= 1")
        if not self.specificity > 1:
            raise ConfigurationError("specificity must exceed 1")
        if self.ta_states < 1:
            raise ConfigurationError("ta_states must be >= 1")
        if self.epochs < 0:
            raise ConfigurationError("epochs must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {
            "clauses_per_class": self.clauses_per_class,
            "threshold": self.threshold,
            "specificity": self.specificity,
            "ta_states": self.ta_states,
            "boost_true_positives": self.boost_true_positives,
            "epochs": self.epochs,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HyperParams":
        return cls(**d)

    def fingerprint(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass
class ClauseState:
    """One clause: polarity, weight, and a bank of 2f TA states."""

    polarity: int
    weight: int
    ta_states: np.ndarray
    n_states: int  # N: states per action

    def __post_init__(self):
        self.ta_states = np.asarray(self.ta_states, dtype=np.int32)
        if self.polarity not in (1, -1):
            raise ConfigurationError("polarity must be +1 or -1")

    @property
    def num_features(self) -> int:
        return self.ta_states.shape[0] // 2

    def included_literals(self) -> tuple[int, ...]:
        return tuple(int(k) for k in np.flatnonzero(self.ta_states > self.n_states))


@dataclass
class DecisionTrace:
    """Per-sample decision statistics, keyed by class."""

    clause_cnt: dict
    positive_cnt: dict
    clause_sum: dict
    predicted: object
    asd: int = 0


class TMClassifier:
    def __init__(self, params: HyperParams, num_features: int, classes: list,
                 states: list[np.ndarray], weights: list[np.ndarray],
                 feature_names: list[str] | None = None):
        self.params = params
        self.num_features = num_features
        self.classes = list(classes)
        self.states = states      # per class: (m, 2f) int32
        self.weights = weights    # per class: (m,) int64
        self.feature_names = list(feature_names) if feature_names else None

    @property
    def half(self) -> int:
        return self.params.clauses_per_class // 2

    def class_index(self, label) -> int:
        try:
            return self.classes.index(label)
        except ValueError:
            raise UnknownClassError(f"unknown class {label!r}") from None

    def clause(self, label, j: int) -> ClauseState:
        ci = self.class_index(label)
        polarity = 1 if j < self.half else -1
        return ClauseState(polarity, int(self.weights[ci][j]),
                           self.states[ci][j].copy(), self.params.ta_states)


def _literals(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    return np.concatenate([x, 1 - x])


def _check_width(model: TMClassifier, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (model.num_features,):
        raise DimensionError(
            f"input has {x.shape} shape, expected ({model.num_features},)")
    return x


def new_classifier(params: HyperParams, num_features: int, classes: list,
                   rng: np.random.Generator,
                   feature_names: list[str] | None = None) -> TMClassifier:
    """Fresh model: every TA at a boundary state (N or N+1, fair coin),
    every weight 1."""
    if num_features < 1:
        raise ConfigurationError("num_features must be >= 1")
    if len(classes) < 2 or len(set(classes)) != len(classes):
        raise ConfigurationError("need at least 2 distinct class labels")
    n = params.ta_states
    m = params.clauses_per_class
    states, weights = [], []
    for _ in classes:
        coin = rng.integers(0, 2, size=(m, 2 * num_features))
        states.append((n + coin).astype(np.int32))
        weights.append(np.ones(m, dtype=np.int64))
    return TMClassifier(params, num_features, classes, states, weights,
                        feature_names)


def _pool_outputs(states: np.ndarray, lit: np.ndarray, n_states: int,
                  training: bool) -> np.ndarray:
    include = states > n_states
    violated = (include & (lit == 0)[None, :]).any(axis=1)
    out = ~violated
    if not training:
        out &= include.any(axis=1)
    return out


def evaluate_clause(clause: ClauseState, x, mode: str = INFERENCE) -> int:
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (clause.num_features,):
        raise DimensionError(
            f"input has {x.shape} shape, expected ({clause.num_features},)")
    out = _pool_outputs(clause.ta_states[None, :], _literals(x),
                        clause.n_states, training=(mode == TRAINING))
    return int(out[0])


def _pool_sum(states, weights, lit, n_states, half, training=False) -> int:
    out = _pool_outputs(states, lit, n_states, training)
    return int(weights[:half] @ out[:half] - weights[half:] @ out[half:])


def class_sum(model: TMClassifier, label, x) -> int:
    """Weighted vote sum for one class pool, inference-mode evaluation."""
    x = _check_width(model, x)
    ci = model.class_index(label)
    return _pool_sum(model.states[ci], model.weights[ci], _literals(x),
                     model.params.ta_states, model.half)


def classify(model: TMClassifier, x):
    """Two classes: sign of the second class's vote sum (v >= 0 -> class 1).
    More classes: argmax of per-class sums, ties to the lowest index."""
    x = _check_width(model, x)
    lit = _literals(x)
    n, half = model.params.ta_states, model.half
    sums = [_pool_sum(s, w, lit, n, half)
            for s, w in zip(model.states, model.weights)]
    if len(model.classes) == 2:
        return model.classes[1] if sums[1] >= 0 else model.classes[0]
    return model.classes[int(np.argmax(sums))]


def clip_sum(v: int, threshold: int) -> int:
    return min(max(v, -threshold), threshold)


def _apply_type_i(states, weights, lit, outputs, params: HyperParams,
                  rng: np.random.Generator) -> None:
    """Vectorized Type I feedback over the given clause rows (in place).

    Draw order is row-major over (clause, TA), one draw per TA.
    """
    if states.shape[0] == 0:
        return
    s = params.specificity
    p_strong = 1.0 if params.boost_true_positives else (s - 1.0) / s
    p_weak = 1.0 / s
    draws = rng.random(states.shape)
    fired = outputs[:, None]
    lit_on = (lit == 1)[None, :]
    strong = fired & lit_on
    states += (strong & (draws < p_strong)).astype(np.int32)
    states -= (~strong & (draws < p_weak)).astype(np.int32)
    np.clip(states, 1, 2 * params.ta_states, out=states)
    weights += outputs.astype(np.int64)


def _apply_type_ii(states, weights, lit, outputs, n_states: int) -> None:
    """Vectorized Type II feedback over the given clause rows (in place)."""
    if states.shape[0] == 0:
        return
    fired = outputs[:, None]
    target = fired & (lit == 0)[None, :] & (states <= n_states)
    states += target.astype(np.int32)
    np.maximum(weights - outputs.astype(np.int64), 1, out=weights)


def type_i_feedback(clause: ClauseState, x, s: float, boost: bool,
                    rng: np.random.Generator) -> ClauseState:
    """Pattern-reinforcement feedback on a single clause (mutates it)."""
    lit = _literals(np.asarray(x, dtype=np.uint8))
    out = _pool_outputs(clause.ta_states[None, :], lit, clause.n_states,
                        training=True)
    params = HyperParams(clauses_per_class=2, specificity=s,
                         ta_states=clause.n_states,
                         boost_true_positives=boost)
    states = clause.ta_states[None, :]
    weights = np.array([clause.weight], dtype=np.int64)
    _apply_type_i(states, weights, lit, out, params, rng)
    clause.ta_states = states[0]
    clause.weight = int(weights[0])
    return clause


def type_ii_feedback(clause: ClauseState, x) -> ClauseState:
    """Discrimination feedback on a single clause (mutates it)."""
    lit = _literals(np.asarray(x, dtype=np.uint8))
    out = _pool_outputs(clause.ta_states[None, :], lit, clause.n_states,
                        training=True)
    states = clause.ta_states[None, :]
    weights = np.array([clause.weight], dtype=np.int64)
    _apply_type_ii(states, weights, lit, out, clause.n_states)
    clause.ta_states = states[0]
    clause.weight = int(weights[0])
    return clause


def _update_pool(states, weights, lit, target: int, params: HyperParams,
                 rng: np.random.Generator) -> None:
    n, t = params.ta_states, params.threshold
    half = states.shape[0] // 2
    outputs = _pool_outputs(states, lit, n, training=True)
    v = int(weights[:half] @ outputs[:half] - weights[half:] @ outputs[half:])
    vc = clip_sum(v, t)
    eps = (t - vc) if target == 1 else (t + vc)
    if eps == 0:
        return
    sel = rng.random(states.shape[0]) <= eps / (2.0 * t)
    if not sel.any():
        return
    pos = sel.copy()
    pos[half:] = False
    neg = sel.copy()
    neg[:half] = False
    type_i_rows = pos if target == 1 else neg
    type_ii_rows = neg if target == 1 else pos
    for rows, kind in ((type_i_rows, 1), (type_ii_rows, 2)):
        idx = np.flatnonzero(rows)
        if idx.size == 0:
            continue
        sub_states = states[idx]
        sub_weights = weights[idx]
        if kind == 1:
            _apply_type_i(sub_states, sub_weights, lit, outputs[idx], params, rng)
        else:
            _apply_type_ii(sub_states, sub_weights, lit, outputs[idx], n)
        states[idx] = sub_states
        weights[idx] = sub_weights


def train_example(model: TMClassifier, x, y, rng: np.random.Generator) -> TMClassifier:
    """One training step: target pool reinforced toward y, one other pool
    (drawn uniformly) reinforced away."""
    x = _check_width(model, x)
    ci = model.class_index(y)
    lit = _literals(x)
    _update_pool(model.states[ci], model.weights[ci], lit, 1, model.params, rng)
    others = [k for k in range(len(model.classes)) if k != ci]
    neg = others[0] if len(others) == 1 else others[int(rng.integers(len(others)))]
    _update_pool(model.states[neg], model.weights[neg], lit, 0, model.params, rng)
    return model


def fit(model: TMClassifier, data, rng: np.random.Generator | None = None) -> TMClassifier:
    """Run the configured number of epochs over the dataset, visiting
    examples in a seeded random order each epoch."""
    if len(data) == 0:
        raise DimensionError("dataset is empty")
    if data.num_features != model.num_features:
        raise DimensionError(
            f"dataset has {data.num_features} features, model expects "
            f"{model.num_features}")
    class_of = {}
    for label in data.labels:
        if label not in class_of:
            class_of[label] = model.class_index(label)
    if rng is None:
        rng = np.random.default_rng(model.params.seed)
    lits = np.hstack([data.X, 1 - data.X]).astype(np.uint8)
    label_idx = np.array([class_of[l] for l in data.labels])
    n_classes = len(model.classes)
    params = model.params
    for _ in range(params.epochs):
        order = rng.permutation(len(data))
        for i in order:
            lit = lits[i]
            ci = int(label_idx[i])
            _update_pool(model.states[ci], model.weights[ci], lit, 1, params, rng)
            if n_classes == 2:
                neg = 1 - ci
            else:
                k = int(rng.integers(n_classes - 1))
                neg = k if k < ci else k + 1
            _update_pool(model.states[neg], model.weights[neg], lit, 0, params, rng)
    return model


def train(params: HyperParams, data, feature_names: list[str] | None = None) -> TMClassifier:
    """Convenience: build a fresh model from the dataset and fit it, with all
    randomness derived from params.seed."""
    rng = np.random.default_rng(params.seed)
    names = feature_names if feature_names is not None else data.feature_names
    model = new_classifier(params, data.num_features, data.classes(), rng,
                           feature_names=names)
    return fit(model, data, rng)


def decision_trace(model: TMClassifier, x) -> DecisionTrace:
    x = _check_width(model, x)
    lit = _literals(x)
    n, half = model.params.ta_states, model.half
    clause_cnt, positive_cnt, sums = {}, {}, {}
    for label, states, weights in zip(model.classes, model.states, model.weights):
        out = _pool_outputs(states, lit, n, training=False)
        clause_cnt[label] = int(out.sum())
        positive_cnt[label] = int(out[:half].sum())
        sums[label] = int(weights[:half] @ out[:half] - weights[half:] @ out[half:])
    asd = 0
    if len(model.classes) == 2:
        a, b = model.classes
        asd = abs(sums[a] - sums[b])
    return DecisionTrace(clause_cnt, positive_cnt, sums, classify(model, x), asd)


# --- batch scoring ---------------------------------------------------------

def batch_clause_outputs(model: TMClassifier, X) -> list[np.ndarray]:
    """Inference-mode clause outputs for many rows: one (rows, m) bool matrix
    per class pool."""
    X = np.asarray(X, dtype=np.uint8)
    if X.ndim != 2 or X.shape[1] != model.num_features:
        raise DimensionError(
            f"input has shape {X.shape}, expected (*, {model.num_features})")
    lits_zero = np.hstack([1 - X, X]).astype(np.int64)  # 1 where literal is 0
    outs = []
    for states in model.states:
        include = (states > model.params.ta_states).astype(np.int64)
        violations = lits_zero @ include.T
        out = violations == 0
        out &= include.any(axis=1)[None, :]
        outs.append(out)
    return outs


def batch_class_sums(model: TMClassifier, X) -> np.ndarray:
    """(rows, classes) matrix of weighted vote sums."""
    outs = batch_clause_outputs(model, X)
    half = model.half
    cols = []
    for out, weights in zip(outs, model.weights):
        cols.append(out[:, :half] @ weights[:half] - out[:, half:] @ weights[half:])
    return np.column_stack(cols)


def batch_classify(model: TMClassifier, X) -> list:
    sums = batch_class_sums(model, X)
    if len(model.classes) == 2:
        return [model.classes[1] if s >= 0 else model.classes[0]
                for s in sums[:, 1]]
    return [model.classes[i] for i in np.argmax(sums, axis=1)]


def batch_asd(model: TMClassifier, X) -> np.ndarray:
    if len(model.classes) != 2:
        raise ConfigurationError("ASD is defined for two-class models only")
    sums = batch_class_sums(model, X)
    return np.abs(sums[:, 0] - sums[:, 1])


def accuracy(model: TMClassifier, data) -> float:
    predicted = batch_classify(model, data.X)
    return sum(p == y for p, y in zip(predicted, data.labels)) / len(data)


# --- persistence -----------------------------------------------------------

def model_document(model: TMClassifier) -> dict:
    pools = []
    for label, states, weights in zip(model.classes, model.states, model.weights):
        clauses = []
        for j in range(model.params.clauses_per_class):
            clauses.append({
                "polarity": 1 if j < model.half else -1,
                "weight": int(weights[j]),
                "ta_states": [int(v) for v in states[j]],
            })
        pools.append({"class": label, "clauses": clauses})
    return {
        "format_version": FORMAT_VERSION,
        "hyperparams": model.params.to_dict(),
        "num_features": model.num_features,
        "classes": model.classes,
        "feature_names": model.feature_names,
        "pools": pools,
    }


def dumps_model(model: TMClassifier) -> str:
    return json.dumps(model_document(model), sort_keys=True,
                      separators=(",", ":")) + "\n"


def save_model(model: TMClassifier, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def loads_model(text: str) -> TMClassifier:
    doc = json.loads(text)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ConfigurationError(f"unsupported model format_version {version!r}")
    params = HyperParams.from_dict(doc["hyperparams"])
    states, weights = [], []
    for pool in doc["pools"]:
        states.append(np.array([c["ta_states"] for c in pool["clauses"]],
                               dtype=np.int32))
        weights.append(np.array([c["weight"] for c in pool["clauses"]],
                                dtype=np.int64))
    return TMClassifier(params, doc["num_features"], doc["classes"],
                        states, weights, doc.get("feature_names"))


def load_model(path) -> TMClassifier:
    return loads_model(Path(path).read_text(encoding="utf-8"))
