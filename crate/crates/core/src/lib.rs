//! Interpretable DNF rule sets for highly imbalanced binary data.
//!
//! Rule sets are learned by directly maximizing the F1 score, written as a
//! difference of two monotone submodular set functions and optimized with a
//! curvature-distorted greedy outer loop. Each greedy step solves a rule
//! subproblem with a minorize-maximization loop over submodular surrogates.
//!
//! The crate also carries the surrounding fault localization pipeline:
//! quantile binarization of raw metrics, log novelty features, one-vs-rest
//! training per fault type, precision-weighted voting over a query window,
//! and the evaluation harness (Top-k accuracy, Cohen's kappa, brute-force
//! oracles and planted-rule generators).
//!
//! Candidate scoring runs on rayon when the `parallel` feature is enabled
//! (the default). All reductions are ordered, so results are identical for
//! any worker count.

pub mod binarizer;
pub mod bitset;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod generation;
pub mod localization;
pub mod logs;
pub mod objective;
pub mod par;
pub mod selection;

pub use bitset::SampleSet;
pub use dataset::{BinaryDataset, Rule, RuleSet, RuleStats};
pub use error::{Result, SlimError};
pub use generation::{generate_rule, GeneratedRule, GenerationConfig};
pub use objective::ObjectiveContext;
pub use selection::{select_rule_set, SelectionConfig};

/// Version string stamped into every serialized document.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance used for value ties; ties resolve to the smaller rule or index.
pub const TIE_EPS: f64 = 1e-12;
