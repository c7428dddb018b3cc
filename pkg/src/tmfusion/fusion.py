"""Comparing learned descriptions, acknowledging change, and localizing
inconsistent data through overlapping cuts."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .dataset import BinaryDataset
from .description import ClauseRecord, GlobalDescription, global_description
from .machine import (ConfigurationError, DimensionError, HyperParams,
                      TMClassifier, batch_asd, batch_classify,
                      batch_clause_outputs, train)

DEFAULT_MATCH_THRESHOLD = 0.5
DEFAULT_WEIGHT_RATIO = 2.0


class ComparisonError(ValueError):
    pass


def clause_jaccard(a, b) -> float:
    """Jaccard similarity of two literal sets; a literal and its negation are
    distinct. Two empty sets are identical, hence 1."""
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    union = len(sa | sb)
    return len(sa & sb) / union


@dataclass
class MatchedPair:
    record_a: ClauseRecord
    record_b: ClauseRecord
    jaccard: float
    weight_factor: float


@dataclass
class SimilarityReport:
    overall: float
    per_class: dict
    matched_pairs: list[MatchedPair] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "per_class": {str(k): v for k, v in self.per_class.items()},
        }

    def render(self) -> str:
        lines = [f"overall_similarity: {self.overall:.4f}"]
        for label, score in self.per_class.items():
            lines.append(f"  class {label}: {score:.4f}")
        return "\n".join(lines)


def _directed_score(g_from: GlobalDescription, g_to: GlobalDescription,
                    label, collect: list[MatchedPair] | None = None) -> tuple[float, float]:
    """Weighted best-match score of g_from's clauses against g_to's, one
    class, both polarities. Returns (weighted score sum, weight sum)."""
    score_sum = 0.0
    weight_sum = 0.0
    for polarity in (1, -1):
        side_a = g_from.group(label, polarity)
        side_b = g_to.group(label, polarity)
        group_weight = sum(r.weight for r in side_a) or 1
        for rec in side_a:
            best, best_rec = 0.0, None
            for other in side_b:
                j = clause_jaccard(rec.literals, other.literals)
                if j > best or best_rec is None:
                    best, best_rec = j, other
            score_sum += rec.weight * best
            weight_sum += rec.weight
            if collect is not None and best_rec is not None:
                collect.append(MatchedPair(rec, best_rec, best,
                                           rec.weight / group_weight))
    return score_sum, weight_sum


def description_overlap(g1: GlobalDescription,
                        g2: GlobalDescription) -> SimilarityReport:
    """Weight-normalized symmetric best-match jaccard between two learned
    descriptions, in [0, 1]."""
    if g1.num_features != g2.num_features:
        raise ComparisonError("descriptions cover different feature widths")
    if set(g1.classes) != set(g2.classes):
        raise ComparisonError("descriptions cover different class sets")
    pairs: list[MatchedPair] = []
    per_class = {}
    class_weights = {}
    for label in g1.classes:
        fwd_score, fwd_weight = _directed_score(g1, g2, label, collect=pairs)
        bwd_score, bwd_weight = _directed_score(g2, g1, label)
        fwd = fwd_score / fwd_weight if fwd_weight else 1.0
        bwd = bwd_score / bwd_weight if bwd_weight else 1.0
        per_class[label] = 0.5 * (fwd + bwd)
        class_weights[label] = fwd_weight + bwd_weight
    total = sum(class_weights.values())
    if total == 0:
        overall = 1.0
    else:
        overall = sum(per_class[c] * class_weights[c] for c in per_class) / total
    return SimilarityReport(overall, per_class, pairs)


@dataclass
class ChangeReport:
    changed: bool
    overlap: float
    new_literal_patterns: list[ClauseRecord]
    vanished_patterns: list[ClauseRecord]
    weight_shifts: list[MatchedPair]
    threshold: float

    def to_dict(self) -> dict:
        def recs(rs):
            return [{"class": r.class_label, "polarity": r.polarity,
                     "literals": list(r.literals), "weight": r.weight}
                    for r in rs]
        return {
            "changed": self.changed,
            "overlap": self.overlap,
            "threshold": self.threshold,
            "new_literal_patterns": recs(self.new_literal_patterns),
            "vanished_patterns": recs(self.vanished_patterns),
            "weight_shifts": [
                {"jaccard": p.jaccard,
                 "weight_a": p.record_a.weight,
                 "weight_b": p.record_b.weight}
                for p in self.weight_shifts
            ],
        }

    def render(self, num_features: int | None = None,
               feature_names=None) -> str:
        lines = [
            f"changed: {str(self.changed).lower()}",
            f"overlap: {self.overlap:.4f} (threshold {self.threshold})",
            f"new_patterns: {len(self.new_literal_patterns)}",
        ]
        for rec in self.new_literal_patterns:
            body = rec.render(num_features or 0, feature_names)
            lines.append(f"  + class {rec.class_label} w={rec.weight}  {body}")
        lines.append(f"vanished_patterns: {len(self.vanished_patterns)}")
        for rec in self.vanished_patterns:
            body = rec.render(num_features or 0, feature_names)
            lines.append(f"  - class {rec.class_label} w={rec.weight}  {body}")
        return "\n".join(lines)


def _unmatched(g_from: GlobalDescription, g_to: GlobalDescription,
               match_threshold: float) -> list[ClauseRecord]:
    out = []
    for rec in g_from.records:
        if rec.is_empty:
            continue
        best = 0.0
        for other in g_to.group(rec.class_label, rec.polarity):
            best = max(best, clause_jaccard(rec.literals, other.literals))
        if best < match_threshold:
            out.append(rec)
    return out


def detect_change(g_baseline: GlobalDescription, g_new: GlobalDescription,
                  threshold: float,
                  match_threshold: float = DEFAULT_MATCH_THRESHOLD,
                  weight_ratio: float = DEFAULT_WEIGHT_RATIO) -> ChangeReport:
    """Compare a new description against a baseline and report whether the
    data characteristics changed."""
    if not 0 < threshold < 1:
        raise ConfigurationError("threshold must lie in (0, 1)")
    report = description_overlap(g_baseline, g_new)
    new_patterns = _unmatched(g_new, g_baseline, match_threshold)
    vanished = _unmatched(g_baseline, g_new, match_threshold)
    shifts = []
    for pair in report.matched_pairs:
        if pair.jaccard < match_threshold:
            continue
        wa, wb = pair.record_a.weight, pair.record_b.weight
        hi, lo = max(wa, wb), max(min(wa, wb), 1)
        if hi / lo >= weight_ratio:
            shifts.append(pair)
    changed = report.overall < threshold or bool(new_patterns)
    return ChangeReport(changed, report.overall, new_patterns, vanished,
                        shifts, threshold)


# --- cut-based localization --------------------------------------------------

@dataclass
class Cut:
    cut_id: int
    row_ids: np.ndarray
    score: float = float("nan")


@dataclass
class RemovalCandidate:
    cut_id: int
    post_removal_score: float
    delta: float

    @property
    def flagged(self) -> bool:
        return self.delta > 0


@dataclass
class CutReport:
    baseline_score: float
    cuts: list[Cut]
    removal_candidates: list[RemovalCandidate]

    def flagged_cut_ids(self) -> list[int]:
        return [c.cut_id for c in self.removal_candidates if c.flagged]

    def to_dict(self) -> dict:
        return {
            "baseline_score": self.baseline_score,
            "cuts": [{"cut_id": c.cut_id, "score": c.score,
                      "row_ids": [int(r) for r in c.row_ids]}
                     for c in self.cuts],
            "removal_candidates": [
                {"cut_id": r.cut_id, "post_removal_score": r.post_removal_score,
                 "delta": r.delta, "flagged": r.flagged}
                for r in self.removal_candidates
            ],
        }

    def render(self) -> str:
        lines = [f"baseline_score V(I-m): {self.baseline_score:.4f}", "cuts:"]
        for c in self.cuts:
            lines.append(f"  cut {c.cut_id}: V={c.score:.4f} "
                         f"({len(c.row_ids)} rows)")
        lines.append("removal candidates (by delta, descending):")
        for r in self.removal_candidates:
            mark = " *" if r.flagged else ""
            lines.append(f"  cut {r.cut_id}: VR={r.post_removal_score:.4f} "
                         f"delta={r.delta:+.4f}{mark}")
        return "\n".join(lines)


def make_cuts(d: BinaryDataset, n: int, cut_fraction: float,
              rng: np.random.Generator) -> list[Cut]:
    """n overlapping random subsets, each floor(cut_fraction * |d|) rows
    sampled without replacement."""
    if n < 2:
        raise ConfigurationError("need at least 2 cuts")
    if not 0 < cut_fraction < 1:
        raise ConfigurationError("cut_fraction must lie in (0, 1)")
    size = int(cut_fraction * len(d))
    if size < 1 or size > len(d):
        raise ConfigurationError(f"cut size {size} is out of range")
    cuts = []
    for i in range(n):
        picks = rng.choice(len(d), size=size, replace=False)
        cuts.append(Cut(i, np.sort(d.ids[picks])))
    return cuts


def _spawned_params(params: HyperParams, rng: np.random.Generator) -> HyperParams:
    return dataclasses.replace(params, seed=int(rng.integers(2**63)))


def localize_inconsistencies(g_baseline: GlobalDescription, d_m: BinaryDataset,
                             n: int, m_remove: int, cut_fraction: float,
                             params: HyperParams,
                             rng: np.random.Generator,
                             cuts: list[Cut] | None = None) -> CutReport:
    """Train a model per cut, score each against the baseline description,
    then trial-remove the worst cuts and record how the score moves.

    Pass pre-built ``cuts`` to score a fixed partition (e.g. when the caller
    knows which rows were perturbed); otherwise ``n`` fresh cuts are drawn.
    """
    if m_remove > n:
        raise ConfigurationError("m_remove cannot exceed the number of cuts")
    g_m = global_description(train(_spawned_params(params, rng), d_m))
    baseline_score = description_overlap(g_m, g_baseline).overall
    if cuts is None:
        cuts = make_cuts(d_m, n, cut_fraction, rng)
    elif len(cuts) != n:
        raise ConfigurationError("pre-built cuts must match n")
    for cut in cuts:
        g_ci = global_description(
            train(_spawned_params(params, rng), d_m.subset_by_ids(cut.row_ids)))
        cut.score = description_overlap(g_ci, g_baseline).overall
    worst = sorted(cuts, key=lambda c: (c.score, c.cut_id))[:m_remove]
    candidates = []
    for cut in worst:
        remainder = d_m.without_ids(cut.row_ids)
        g_r = global_description(train(_spawned_params(params, rng), remainder))
        vr = description_overlap(g_r, g_baseline).overall
        candidates.append(RemovalCandidate(cut.cut_id, vr, vr - baseline_score))
    candidates.sort(key=lambda r: (-r.delta, r.cut_id))
    return CutReport(baseline_score, cuts, candidates)


# --- decision-statistics compatibility ---------------------------------------

def mean_asd(model: TMClassifier, d: BinaryDataset) -> float:
    """Mean absolute difference of the two weighted class sums, without the
    thresholding used for prediction."""
    if len(d) == 0:
        raise DimensionError("dataset is empty")
    return float(batch_asd(model, d.X).mean())


@dataclass
class GroupStats:
    truth: object
    predicted: object
    count: int
    mean_clause_cnt: dict
    mean_positive_cnt: dict
    mean_asd: float


def compatibility_report(model: TMClassifier,
                         d: BinaryDataset) -> list[GroupStats]:
    """Decision statistics grouped by (truth, predicted), including truth
    labels the model was never trained on."""
    if len(model.classes) != 2:
        raise ConfigurationError(
            "compatibility_report is defined for two-class models only")
    outs = batch_clause_outputs(model, d.X)
    half = model.half
    clause_cnt = {c: outs[i].sum(axis=1) for i, c in enumerate(model.classes)}
    positive_cnt = {c: outs[i][:, :half].sum(axis=1)
                    for i, c in enumerate(model.classes)}
    asd = batch_asd(model, d.X)
    predicted = batch_classify(model, d.X)
    keys = sorted({(t, p) for t, p in zip(d.labels, predicted)}, key=str)
    groups = []
    for truth, pred in keys:
        mask = np.array([t == truth and p == pred
                         for t, p in zip(d.labels, predicted)])
        groups.append(GroupStats(
            truth, pred, int(mask.sum()),
            {c: float(clause_cnt[c][mask].mean()) for c in model.classes},
            {c: float(positive_cnt[c][mask].mean()) for c in model.classes},
            float(asd[mask].mean()),
        ))
    return groups


def render_compatibility(groups: list[GroupStats], classes) -> str:
    header = ["truth", "pred", "count"]
    for c in classes:
        header += [f"clause_cnt[{c}]", f"positive_cnt[{c}]"]
    header.append("mean_asd")
    lines = ["\t".join(header)]
    for g in groups:
        row = [str(g.truth), str(g.predicted), str(g.count)]
        for c in classes:
            row += [f"{g.mean_clause_cnt[c]:.3f}", f"{g.mean_positive_cnt[c]:.3f}"]
        row.append(f"{g.mean_asd:.3f}")
        lines.append("\t".join(row))
    return "\n".join(lines)
