//! Classification-tree hidden semi-Markov models (CTHSMM).
//!
//! This crate learns probabilistic process models from temporal event logs.
//! A classification tree partitions the predictor space into hidden states,
//! and a hidden semi-Markov model over those states carries an explicit
//! duration density per state (Gaussian-kernel KDE over observed sojourn
//! times), a zero-diagonal out-state transition matrix, and an emission
//! matrix taken from the tree's leaf class distributions. Decoding answers
//! "what is the most probable sequence of hidden states, with durations,
//! given a sequence of observable events?" via an explicit-duration Viterbi
//! dynamic program in log space.
//!
//! The crate is `no_std` + `alloc`; all IO, file formats, and the command
//! line live in the companion `cthsmm` crate.
//!
//! Module map:
//! - [`data`]: event-log representations (records, segments, per-time-unit).
//! - [`tree`]: CART growth, rule extraction, state assignment.
//! - [`prune`]: cost-complexity pruning and cross-validated error.
//! - [`duration`]: duration densities (KDE and the geometric reference).
//! - [`model`]: model assembly from a tree plus training sequences.
//! - [`viterbi`]: explicit-duration maximum-probability decoding.
//! - [`selection`]: mutual information scoring and minbucket search.
//! - [`metrics`]: hit ratio / longest-matched-run-length evaluation.
//! - [`simulate`]: synthetic ground-truth semi-Markov data generation.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod data;
pub mod duration;
pub mod error;
pub mod metrics;
pub mod model;
pub mod prune;
pub mod selection;
pub mod simulate;
pub mod tree;
pub mod viterbi;

pub use data::{
    expand_to_time_units, merge_consecutive_states, DatasetBuilder, EntitySequence, Schema,
    StateSegment, TemporalDataset, TemporalRecord,
};
pub use duration::{
    fit_duration_density, geometric_duration_pmf, silverman_bandwidth, DurationDensity,
};
pub use error::{Error, Result};
pub use metrics::{hit_ratio, horizon_sweep, lmrl_ratio, EvalMetrics};
pub use model::{
    build_model, estimate_emissions, estimate_initial, estimate_transitions, label_segments,
    CthsmmModel, ModelConfig,
};
pub use prune::{cost_complexity_prune, cv_misclassification, PrunedSubtree, PruningReport};
pub use selection::{
    build_candidates, default_full_minbucket, mmie_search, mutual_information, select_model,
    state_priors, Candidate, CandidateSet, MinbucketScan, MinbucketScore, MmieResult, PriorMode,
    SelectionReport, SelectionRow,
};
pub use simulate::{sample_dataset, sample_sojourn, DurationSpec, GroundTruthSpec, StateSpec};
pub use tree::{
    gini_impurity, grow_tree, ClassificationTree, Comparator, LeafView, Node, RulePredicate,
    StateRule, TreeGrowthConfig,
};
pub use viterbi::{score_segmentation, viterbi_decode, viterbi_decode_indexed, ViterbiResult};
