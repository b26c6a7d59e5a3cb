"""Differentially private interior points and learners over
reorder-slice-compute sessions, with a simulation-based privacy audit harness.
"""

from .engine import (HOLDER_CALL_CONSTANT, Dataset, OrderMap, RscSession,
                     SliceComputation, ascending_map, axis_map, delayed_compute,
                     descending_map, holder_call_cap, privacy_cost,
                     select_and_compute)
from .learners import (Hypothesis, LabeledSample, boundary_window_size,
                       learn_rectangles, learn_threshold_realizable,
                       load_labeled_csv, rectangle_gate_threshold,
                       threshold_sample_size)
from .mechanisms import (BOTTOM, TOP, PrivacyBudget, QualityFunction, SvtSession,
                         choosing_error_bound, choosing_mechanism,
                         exponential_mechanism, geometric_pmf, sample_geometric,
                         sample_geometric_p, sample_laplace, svt_query)
from .quasiconcave import (QcInstance, QcResult, build_increment_dataset,
                           chain_size, cumulative_distance, cumulative_ipp,
                           cumulative_regime_threshold, decode_hard_point,
                           encode_hard_instance, hardness_reduction,
                           is_quasi_concave, load_qc_csv, qc_optimize,
                           sample_code, scaled_budget)
from .sync import (AuditResult, DataHolder, SimTranscript, SyncDist, SyncOutcome,
                   audit_call_count, direct_run, estimate_tv, holder_query,
                   simulate, sync_gamma, sync_map, sync_map_exact_dist,
                   sync_threshold)
from .treelog import (EmbeddedList, IppParams, RegimeError, TreeVertex, Universe,
                      embed, embed_order_map, f_ipp, gamma,
                      gamma_sensitivity_check, ipp, left_right_leaf,
                      leftmost_leaf, log_star, one_heavy_round,
                      regime_threshold, rightmost_leaf, subtree_weight, treelog,
                      trim_parameter, vertex_interval)

__version__ = "0.1.0"

__all__ = [
    "Dataset", "OrderMap", "RscSession", "SliceComputation", "PrivacyBudget",
    "QualityFunction", "SvtSession", "TOP", "BOTTOM", "HOLDER_CALL_CONSTANT",
    "Universe", "TreeVertex", "EmbeddedList", "IppParams", "RegimeError",
    "QcInstance", "QcResult", "LabeledSample", "Hypothesis", "SyncOutcome",
    "SyncDist", "SimTranscript", "AuditResult", "DataHolder",
    "sample_geometric", "sample_geometric_p", "sample_laplace", "geometric_pmf",
    "exponential_mechanism", "choosing_mechanism", "choosing_error_bound",
    "svt_query", "ascending_map", "descending_map", "axis_map",
    "select_and_compute", "delayed_compute", "privacy_cost", "holder_call_cap",
    "sync_threshold", "sync_gamma", "sync_map", "sync_map_exact_dist",
    "holder_query", "simulate", "direct_run", "audit_call_count", "estimate_tv",
    "log_star", "trim_parameter", "regime_threshold", "f_ipp", "subtree_weight",
    "vertex_interval", "leftmost_leaf", "rightmost_leaf", "left_right_leaf",
    "embed", "embed_order_map", "gamma", "gamma_sensitivity_check",
    "one_heavy_round", "treelog", "ipp", "cumulative_distance",
    "is_quasi_concave", "build_increment_dataset", "scaled_budget",
    "cumulative_regime_threshold", "cumulative_ipp", "qc_optimize",
    "chain_size", "sample_code", "encode_hard_instance", "decode_hard_point",
    "hardness_reduction", "load_qc_csv", "learn_threshold_realizable",
    "learn_rectangles", "boundary_window_size", "threshold_sample_size",
    "rectangle_gate_threshold", "load_labeled_csv",
]
