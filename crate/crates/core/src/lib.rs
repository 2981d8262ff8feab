//! Three-sample tests for data-copying in generative models.
//!
//! Given a training set `T`, an independent held-out sample `P_n` from the
//! target distribution, and a generated sample `Q_m`, the tests here ask
//! whether generated points sit closer to `T` than held-out points do.
//!
//! * [`metric`] computes each point's distance to its nearest training point.
//! * [`rank_stats`] compares the two distance samples with a Mann-Whitney U
//!   test and reports the z-scored statistic `Z_U`.
//! * [`partition`] splits the instance space into k-means cells fitted on `T`.
//! * [`copy_detector`] runs the per-cell tests and averages them into `C_T`,
//!   alongside a cell-occupancy (NDB) test for over/under-representation.
//! * [`baselines`] holds the comparison tests (two-sample NN, Fréchet,
//!   binning NDB, precision/recall, three-sample kernel MMD).
//! * [`kde`] is a Gaussian kernel density estimator used as a generator whose
//!   degree of copying is controlled by its bandwidth.
//!
//! The crate is `no_std` and only needs `alloc`. Every randomized routine
//! takes an explicit [`Seed`] and is bit-reproducible.

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod copy_detector;
pub mod dataset;
mod error;
pub mod kde;
mod linalg;
pub mod math;
pub mod metric;
pub mod partition;
pub mod rank_stats;

pub use copy_detector::{CopyConfig, CopyReport, Tau};
pub use dataset::{PointSet, Role, Seed};
pub use error::{Error, Result};
pub use metric::{DistanceSample, Metric};
pub use partition::Partition;
pub use rank_stats::UTestResult;
