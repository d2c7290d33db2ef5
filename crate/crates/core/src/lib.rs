#![allow(clippy::needless_range_loop)]

//! Biomarker panel selection toolkit.
//!
//! The crate bundles a weighted elastic-net solver, an iterative
//! dual-criterion feature selector whose hyperparameters are tuned by a
//! small score-function policy gradient, a posterior interaction-network
//! filter, reference baselines (cross-validated elastic net, mRMR,
//! stability selection), and a nested cross-validation benchmark harness
//! with synthetic-data generators for end-to-end validation.
//!
//! The numeric kernels are generic over [`Scalar`] (f32 or f64); the
//! pipeline layers run at [`Real`] and concrete aliases for the kernel
//! types are exported from the crate root.

pub mod accumulator;
pub mod baselines;
pub mod classifier;
pub mod config;
pub mod dataset;
pub mod episode;
pub mod error;
pub mod folds;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod network;
pub mod num;
pub mod policy;
pub mod report;
pub mod solver;
pub mod stats;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use num::Scalar;

/// Scalar type used by the pipeline layers (ingestion, drivers, reports).
pub type Real = f64;

/// Dense matrix at the pipeline scalar type.
pub type Matrix = linalg::Matrix<Real>;
/// Elastic-net fit record at the pipeline scalar type.
pub type FitResult = types::FitResult<Real>;
/// Per-feature penalty vector at the pipeline scalar type.
pub type PenaltyVector = solver::PenaltyVector<Real>;
/// Regularisation grid at the pipeline scalar type.
pub type AlphaGrid = solver::AlphaGrid<Real>;
/// Logistic model at the pipeline scalar type.
pub type LogisticModel = classifier::LogisticModel<Real>;
/// Cross-iteration selection statistics at the pipeline scalar type.
pub type Accumulator = accumulator::Accumulator<Real>;
/// Per-gene state features at the pipeline scalar type.
pub type StateFeatures = accumulator::StateFeatures<Real>;
/// Policy parameters at the pipeline scalar type.
pub type PolicyParams = policy::PolicyParams<Real>;

pub use dataset::ExpressionDataset;
pub use folds::FoldPlan;
pub use types::FitCounter;
