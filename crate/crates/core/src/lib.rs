//! Null-proportion estimators for plug-in false discovery rate control.
//!
//! The crate covers the estimator class built from non-decreasing
//! transforms of the p-values, its discrete adjustments, the plug-in
//! Benjamini–Hochberg step-up, Fisher's exact test with exact null
//! supports, the Monte Carlo experiments, and brute-force oracles for the
//! underlying ordering and moment results.
//!
//! Replicated work runs through [`par::Execution`]; with the default
//! `parallel` feature it uses rayon, otherwise everything is sequential.
//! Results never depend on the worker count.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod discrete;
pub mod distribution;
pub mod error;
pub mod estimators;
pub mod fisher;
pub mod io;
pub mod oracles;
pub mod par;
pub mod procedures;
pub mod pvalues;
pub mod quadrature;
pub mod rng;
pub mod simulation;
pub mod special;
pub mod transform;
pub mod verification;

pub use discrete::{adjust_du, adjust_mid, adjust_randomized, apply_adjustment, AdjustmentKind, RandomizedOptions};
pub use distribution::DiscreteNullDistribution;
pub use error::{Error, Result};
pub use estimators::{EstimateResult, Estimator, EstimatorSpec};
pub use fisher::{fisher_exact, Alternative, ContingencyTable};
pub use par::Execution;
pub use procedures::{bh, bh_stepup, evaluate, BhResult, ErrorMetrics};
pub use pvalues::PValueVector;
pub use simulation::{
    run_experiment, DiracConfig, ExperimentEntry, ExperimentOptions, FetConfig, GaussianConfig, Setting,
};
pub use transform::TransformFn;
