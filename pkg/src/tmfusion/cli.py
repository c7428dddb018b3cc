"""Command-line front end for reproducible experiment pipelines."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .booleanize import (BinarizeError, BinningSpec, PopulationStats,
                         apply_bins, fit_percentile_bins,
                         fit_population_stats, load_numeric_csv,
                         mean_threshold_binarize)
from .dataset import (BinaryDataset, DatasetError, load_csv, save_csv,
                      save_metadata)
from .description import global_description
from .fusion import (ComparisonError, compatibility_report, detect_change,
                     localize_inconsistencies, mean_asd, render_compatibility)
from .machine import (ConfigurationError, DimensionError, HyperParams,
                      TMClassifier, UnknownClassError, batch_classify,
                      decision_trace, load_model, save_model, train)
from .metrics import classification_metrics
from .sampling import (OversampleStrategy, SamplingError, grade_splits,
                       informed_oversample, stratified_kfold)
from .synth import (NEIGHBOUR_QUERY, VALIDPASS_QUERY, WorldError,
                    gen_hat_data, gen_query_tasks, hat_dataset,
                    inject_nontargeted, query_dataset)

USER_ERRORS = (ConfigurationError, DimensionError, DatasetError,
               SamplingError, WorldError, BinarizeError, ComparisonError,
               UnknownClassError, FileNotFoundError, IsADirectoryError,
               json.JSONDecodeError)

STRATEGY_FLAGS = {
    "none": "none",
    "random-smote": "random-smote",
    "max-asd": "max-asd-split",
    "top25-asd": "top-quartile-asd",
    "drop-min-asd": "drop-min-asd",
    "drop-bottom25-asd": "drop-bottom-quartile-asd",
}

HYPER_KEYS = ("clauses", "threshold", "specificity", "states", "boost",
              "epochs", "seed")

HYPER_DEFAULTS = {
    "clauses": 10, "threshold": 15, "specificity": 3.9, "states": 100,
    "boost": False, "epochs": 100, "seed": 0,
}


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: config must be a JSON object")
    return doc


def _effective(args: argparse.Namespace, keys: dict) -> dict:
    """Merge CLI flags over config-file values over defaults."""
    config = load_config(args.config) if getattr(args, "config", None) else {}
    for key in config:
        if key not in keys:
            raise ConfigurationError(f"unknown config key: {key}")
    out = {}
    for key, default in keys.items():
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            out[key] = flag
        elif key in config:
            out[key] = config[key]
        else:
            out[key] = default
    return out


def _hyperparams(effective: dict) -> HyperParams:
    return HyperParams(
        clauses_per_class=int(effective["clauses"]),
        threshold=int(effective["threshold"]),
        specificity=float(effective["specificity"]),
        ta_states=int(effective["states"]),
        boost_true_positives=bool(effective["boost"]),
        epochs=int(effective["epochs"]),
        seed=int(effective["seed"]),
    )


def _sidecar(out_path, command: str, effective: dict, extra: dict | None = None) -> None:
    meta = {"tool": "tmfusion", "version": __version__, "command": command,
            "config": effective}
    if extra:
        meta.update(extra)
    save_metadata(str(out_path) + ".meta.json", meta)


def _add_hyper_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--clauses", type=int, help="clauses per class (even)")
    parser.add_argument("--threshold", type=int, help="voting target T")
    parser.add_argument("--specificity", type=float, help="specificity s (> 1)")
    parser.add_argument("--states", type=int, help="TA states per action N")
    parser.add_argument("--boost", action="store_const", const=True,
                        help="boost true positives")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--seed", type=int)


def _add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override it")


# --- subcommands -------------------------------------------------------------

def cmd_gen(args) -> int:
    keys = {"task": "hat", "count": 1000, "persons": 4, "steps": 3, "seed": 0,
            "noise-rate": 0.0, "contradiction-rate": 0.0, "out": None}
    eff = _effective(args, keys)
    if not eff["out"]:
        raise ConfigurationError("--out is required")
    rng = np.random.default_rng(int(eff["seed"]))
    task = eff["task"]
    extra = {}
    if task == "hat":
        examples = gen_hat_data(int(eff["count"]), int(eff["persons"]),
                                int(eff["steps"]), rng)
        modified = []
        if eff["noise-rate"]:
            examples, modified = inject_nontargeted(
                examples, int(eff["persons"]), float(eff["noise-rate"]), rng)
        data = hat_dataset(examples, int(eff["persons"]), int(eff["steps"]))
        extra["inconsistent_row_ids"] = modified
    elif task in (NEIGHBOUR_QUERY, VALIDPASS_QUERY):
        examples = gen_query_tasks(task, int(eff["persons"]),
                                   int(eff["count"]),
                                   float(eff["contradiction-rate"]), rng)
        data = query_dataset(examples, int(eff["persons"]))
        extra["inconsistent_row_ids"] = [
            i for i, ex in enumerate(examples) if ex.contradiction]
    else:
        raise ConfigurationError(f"unknown task {task!r}")
    save_csv(data, eff["out"])
    _sidecar(eff["out"], "gen", eff, extra)
    print(f"wrote {len(data)} rows to {eff['out']}")
    return 0


def cmd_binarize(args) -> int:
    keys = {"data": None, "method": "percentile", "bins": 10, "out": None,
            "save-spec": None, "spec": None}
    eff = _effective(args, keys)
    if not eff["data"] or not eff["out"]:
        raise ConfigurationError("--data and --out are required")
    names, values, labels = load_numeric_csv(eff["data"])
    method = eff["method"]
    if method == "percentile":
        if eff["spec"]:
            spec = BinningSpec.load(eff["spec"])
        else:
            spec = fit_percentile_bins(names, values, int(eff["bins"]))
        data = apply_bins(spec, names, values, labels)
        if eff["save-spec"]:
            spec.save(eff["save-spec"])
    elif method == "mean-threshold":
        if eff["spec"]:
            stats = PopulationStats.load(eff["spec"])
        else:
            stats = fit_population_stats(names, values)
        data = mean_threshold_binarize(names, values, labels, stats)
        if eff["save-spec"]:
            stats.save(eff["save-spec"])
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    save_csv(data, eff["out"])
    _sidecar(eff["out"], "binarize", eff)
    print(f"wrote {len(data)} rows x {data.num_features} bits to {eff['out']}")
    return 0


def cmd_train(args) -> int:
    keys = {"data": None, "out": None, **HYPER_DEFAULTS}
    eff = _effective(args, keys)
    if not eff["data"] or not eff["out"]:
        raise ConfigurationError("--data and --out are required")
    data = load_csv(eff["data"])
    model = train(_hyperparams(eff), data)
    save_model(model, eff["out"])
    _sidecar(eff["out"], "train", eff)
    print(f"trained on {len(data)} rows, saved model to {eff['out']}")
    return 0


def cmd_eval(args) -> int:
    keys = {"model": None, "data": None, "out": None}
    eff = _effective(args, keys)
    if not eff["model"] or not eff["data"]:
        raise ConfigurationError("--model and --data are required")
    model = load_model(eff["model"])
    data = load_csv(eff["data"])
    predicted = batch_classify(model, data.X)
    scores = classification_metrics(data.labels, predicted, model.classes)
    for name in ("accuracy", "precision", "recall", "f1"):
        print(f"{name}: {scores[name]:.4f}")
    if len(model.classes) == 2:
        print(f"mean_asd: {mean_asd(model, data):.4f}")
    if eff["out"]:
        save_metadata(eff["out"], {"tool": "tmfusion", "version": __version__,
                                   "command": "eval", "config": eff,
                                   "metrics": scores})
    return 0


def cmd_trace(args) -> int:
    keys = {"model": None, "data": None, "out": None, "summary": False}
    eff = _effective(args, keys)
    if not eff["model"] or not eff["data"]:
        raise ConfigurationError("--model and --data are required")
    model = load_model(eff["model"])
    data = load_csv(eff["data"])
    if eff["summary"]:
        groups = compatibility_report(model, data)
        print(render_compatibility(groups, model.classes))
        if eff["out"]:
            save_metadata(eff["out"], {
                "tool": "tmfusion", "version": __version__,
                "command": "trace", "config": eff,
                "groups": [vars(g) for g in groups]})
        return 0
    if not eff["out"]:
        raise ConfigurationError("--out is required unless --summary is set")
    header = ["row_id"]
    for c in model.classes:
        header += [f"clause_cnt_{c}", f"positive_cnt_{c}", f"clause_sum_{c}"]
    header += ["asd", "predicted", "truth"]
    with Path(eff["out"]).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rid, x, truth in zip(data.ids, data.X, data.labels):
            t = decision_trace(model, x)
            row = [int(rid)]
            for c in model.classes:
                row += [t.clause_cnt[c], t.positive_cnt[c], t.clause_sum[c]]
            row += [t.asd, t.predicted, truth]
            writer.writerow(row)
    _sidecar(eff["out"], "trace", eff)
    print(f"wrote {len(data)} traces to {eff['out']}")
    return 0


def cmd_compare(args) -> int:
    keys = {"model-a": None, "model-b": None, "theta": 0.5,
            "match-threshold": 0.5, "out": None}
    eff = _effective(args, keys)
    if not eff["model-a"] or not eff["model-b"]:
        raise ConfigurationError("--model-a and --model-b are required")
    model_a = load_model(eff["model-a"])
    model_b = load_model(eff["model-b"])
    g_a = global_description(model_a)
    g_b = global_description(model_b)
    report = detect_change(g_a, g_b, float(eff["theta"]),
                           match_threshold=float(eff["match-threshold"]))
    print(report.render(model_a.num_features, model_a.feature_names))
    if eff["out"]:
        save_metadata(eff["out"], {"tool": "tmfusion", "version": __version__,
                                   "command": "compare", "config": eff,
                                   "report": report.to_dict()})
    return 0


def cmd_cuts(args) -> int:
    keys = {"baseline-model": None, "data": None, "n": 10, "m-remove": 5,
            "fraction": 0.5, "out": None, **HYPER_DEFAULTS}
    eff = _effective(args, keys)
    if not eff["baseline-model"] or not eff["data"]:
        raise ConfigurationError("--baseline-model and --data are required")
    baseline = load_model(eff["baseline-model"])
    g_baseline = global_description(baseline)
    data = load_csv(eff["data"])
    rng = np.random.default_rng(int(eff["seed"]))
    report = localize_inconsistencies(
        g_baseline, data, int(eff["n"]), int(eff["m-remove"]),
        float(eff["fraction"]), _hyperparams(eff), rng)
    print(report.render())
    if eff["out"]:
        save_metadata(eff["out"], {"tool": "tmfusion", "version": __version__,
                                   "command": "cuts", "config": eff,
                                   "report": report.to_dict()})
    return 0


def cmd_oversample(args) -> int:
    keys = {"data": None, "strategy": "random-smote", "ratio": 1.0,
            "k-neighbors": 5, "k": 10, "repeats": 2, "out": None,
            **HYPER_DEFAULTS}
    eff = _effective(args, keys)
    if not eff["data"] or not eff["out"]:
        raise ConfigurationError("--data and --out are required")
    if eff["strategy"] not in STRATEGY_FLAGS:
        raise ConfigurationError(
            f"unknown strategy {eff['strategy']!r}; expected one of "
            f"{sorted(STRATEGY_FLAGS)}")
    strategy = OversampleStrategy(STRATEGY_FLAGS[eff["strategy"]],
                                  ratio=float(eff["ratio"]),
                                  k_neighbors=int(eff["k-neighbors"]))
    data = load_csv(eff["data"])
    rng = np.random.default_rng(int(eff["seed"]))
    result = informed_oversample(data, _hyperparams(eff), strategy,
                                 int(eff["k"]), int(eff["repeats"]), rng)
    save_csv(result, eff["out"])
    _sidecar(eff["out"], "oversample", eff)
    print(f"wrote {len(result)} rows to {eff['out']}")
    return 0


def cmd_grade(args) -> int:
    keys = {"data": None, "k": 10, "repeats": 2, "out": None,
            **HYPER_DEFAULTS}
    eff = _effective(args, keys)
    if not eff["data"]:
        raise ConfigurationError("--data is required")
    data = load_csv(eff["data"])
    rng = np.random.default_rng(int(eff["seed"]))
    plan = stratified_kfold(data, int(eff["k"]), int(eff["repeats"]), rng)
    grades = grade_splits(plan, data, _hyperparams(eff), rng)
    print("subset_id\tmean_asd")
    for sid, asd in grades:
        print(f"{sid}\t{asd:.4f}")
    if eff["out"]:
        save_metadata(eff["out"], {"tool": "tmfusion", "version": __version__,
                                   "command": "grade", "config": eff,
                                   "grades": [
                                       {"subset_id": s, "mean_asd": a}
                                       for s, a in grades]})
    return 0


# --- dispatch ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmfusion",
        description="Weighted Tsetlin Machine training and data-fusion "
                    "diagnostics.")
    parser.add_argument("--version", action="version",
                        version=f"tmfusion {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate synthetic datasets")
    _add_config_flag(p)
    p.add_argument("--task", choices=["hat", NEIGHBOUR_QUERY, VALIDPASS_QUERY])
    p.add_argument("--count", type=int)
    p.add_argument("--persons", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-rate", type=float,
                   help="non-targeted inconsistency rate (hat task)")
    p.add_argument("--contradiction-rate", type=float,
                   help="targeted contradiction rate (query tasks)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("binarize", help="binarize a numeric CSV")
    _add_config_flag(p)
    p.add_argument("--data")
    p.add_argument("--method", choices=["percentile", "mean-threshold"])
    p.add_argument("--bins", type=int)
    p.add_argument("--spec", help="apply a previously saved spec")
    p.add_argument("--save-spec", help="write the fitted spec here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_binarize)

    p = sub.add_parser("train", help="train a model on a binary CSV")
    _add_config_flag(p)
    p.add_argument("--data")
    _add_hyper_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model")
    _add_config_flag(p)
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("trace", help="per-sample decision statistics")
    _add_config_flag(p)
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--summary", action="store_const", const=True,
                   help="grouped (truth, predicted) summary instead of rows")
    p.add_argument("--out")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("compare", help="compare two trained models")
    _add_config_flag(p)
    p.add_argument("--model-a")
    p.add_argument("--model-b")
    p.add_argument("--theta", type=float, help="change threshold in (0, 1)")
    p.add_argument("--match-threshold", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("cuts", help="localize inconsistent data via cuts")
    _add_config_flag(p)
    p.add_argument("--baseline-model")
    p.add_argument("--data")
    p.add_argument("--n", type=int, help="number of cuts")
    p.add_argument("--m-remove", type=int, help="trial removal set size")
    p.add_argument("--fraction", type=float, help="cut size fraction")
    _add_hyper_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cuts)

    p = sub.add_parser("oversample", help="SMOTE / informed oversampling")
    _add_config_flag(p)
    p.add_argument("--data")
    p.add_argument("--strategy", choices=sorted(STRATEGY_FLAGS))
    p.add_argument("--ratio", type=float)
    p.add_argument("--k-neighbors", type=int)
    p.add_argument("--k", type=int, help="strata per repeat")
    p.add_argument("--repeats", type=int)
    _add_hyper_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oversample)

    p = sub.add_parser("grade", help="grade stratified splits by mean ASD")
    _add_config_flag(p)
    p.add_argument("--data")
    p.add_argument("--k", type=int)
    p.add_argument("--repeats", type=int)
    _add_hyper_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_grade)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USER_ERRORS as exc:
        message = exc.args[0] if exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
