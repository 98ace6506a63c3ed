//! Weighted maximum-contrast subagging for approximate support recovery in
//! large-scale sparse linear regression.
//!
//! The pipeline fits many small weighted Lasso problems on disjoint
//! subsamples, estimates per-variable selection probabilities by contrasting
//! support sets across groups of subsamples, thresholds them with false
//! positive control, and averages coefficients over the selected set.
//! Baselines (full-data Lasso, classic subagging), synthetic benchmark
//! scenarios, and design-condition diagnostics are included.

pub mod error;
pub mod mat;
pub mod model;
pub mod partition;
pub mod solver;
pub mod weights;

pub use error::{Error, Result};
pub use model::{Dataset, GroundTruth, Metrics, PartitionPlan, SelectionResult, WeightVector};
