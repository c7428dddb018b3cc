"""Weighted Tsetlin Machine classification plus data-fusion diagnostics:
description comparison, change detection, cut-based inconsistency
localization, ASD-based compatibility scoring, and informed oversampling."""

__version__ = "0.1.0"

from .booleanize import (BinningSpec, PopulationStats, apply_bins,
                         bow_binarize, fit_percentile_bins,
                         fit_population_stats, mean_threshold_binarize)
from .dataset import BinaryDataset, load_csv, save_csv
from .description import ClauseRecord, GlobalDescription, global_description
from .fusion import (ChangeReport, CutReport, SimilarityReport,
                     clause_jaccard, compatibility_report, description_overlap,
                     detect_change, localize_inconsistencies, make_cuts,
                     mean_asd)
from .machine import (ClauseState, DecisionTrace, HyperParams, TMClassifier,
                      accuracy, class_sum, classify, clip_sum, decision_trace,
                      evaluate_clause, fit, load_model, new_classifier,
                      save_model, train, train_example, type_i_feedback,
                      type_ii_feedback)
from .sampling import (OversampleStrategy, SplitPlan, grade_splits,
                       informed_oversample, smote_binary, stratified_kfold)
from .synth import (HatExample, QueryExample, encode_relational, gen_hat_data,
                    gen_query_tasks, hat_dataset, inject_nontargeted,
                    query_dataset, simulate_final_owner)
