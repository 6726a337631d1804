//! Information-theoretic limits to two-class classification performance.
//!
//! The crate pairs two independent views of the same dataset:
//!
//! - the classifier's view, summarised by its confusion matrix, Cohen's kappa
//!   and the exponential leakage rates extracted from the off-diagonal cells
//!   ([`confusion`]);
//! - the data's view, summarised by nearest-neighbour estimates of the two
//!   Kullback-Leibler divergences between the class densities and their
//!   parallel-resistor combination ([`estimator`]).
//!
//! The two meet in `kappa ≈ 1 - 2^(-CDR)`: a classifier whose kappa sits on
//! that curve cannot be improved by a better algorithm, only by better data.
//!
//! All public distances are in bits.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod classify;
pub mod confusion;
pub mod datagen;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod ingest;
pub mod knn;
pub mod numeric;
pub mod sweep;
pub mod table;

pub use analytic::{AnalyticModel, DivergenceCurve};
pub use classify::{ClassifierKind, ClassifierSpec};
pub use confusion::{ConfusionCounts, RateSummary};
pub use dataset::{ClassLabel, DatasetTable, Variable, VariableKind};
pub use error::{Error, Result};
pub use estimator::{DivergenceEstimate, EstimatorConfig};
pub use sweep::{FitResult, SweepPoint, Verdict, VerdictStatus};

/// Natural-log to bits conversion factor.
pub(crate) const BITS_PER_NAT: f64 = std::f64::consts::LOG2_E;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
/// Output order is index order either way.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}
