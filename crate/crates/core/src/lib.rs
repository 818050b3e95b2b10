//! Classification-powered conformal inference for zero-inflated outcomes.
//!
//! Outcomes are non-negative with an atom at exactly zero. The procedures in
//! this crate produce prediction sets that are either `{0}` or a single
//! closed interval, with finite-sample marginal coverage under
//! exchangeability:
//!
//! 1. A classifier `p̂(x) ≈ P(Y ≠ 0 | X = x)` is thresholded at `α_r`, the
//!    `r`-quantile of its outputs on the first calibration fold (augmented
//!    with `1`). Points at or below the threshold get `{0}`.
//! 2. The negative predictive value of that rule is estimated on the
//!    validation split, which fixes the relaxed level `γ` that the interval
//!    branch must reach.
//! 3. Split conformal calibration on the second fold, restricted to points
//!    above the threshold, gives the radius `q_r` of `[f̂(x) − q_r, f̂(x) + q_r]`.
//!
//! The hyperparameter `r` is chosen on a grid by minimising the estimated
//! mean set length. At `r = 0` the procedure is exactly vanilla split
//! conformal inference.
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion `cpci`
//! crate. Enable the `serde` feature for (de)serializable calibrations.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod cpci;
pub mod data;
mod error;
pub mod experiment;
mod linalg;
pub mod metrics;
pub mod models;
pub mod quantile;
pub mod seed;
#[cfg(feature = "serde")]
mod serde_ext;
pub mod synth;
pub mod vci;

pub use crate::cpci::{CpciCalibration, CpciConfig, Objective};
pub use crate::data::{DataSplits, Dataset, LabeledSample, PredictionSet, SplitScheme};
pub use crate::error::{Error, Result};
pub use crate::experiment::Method;
pub use crate::models::{Classifier, Regressor};
pub use crate::seed::{Purpose, SeedSpec};
pub use crate::vci::VciCalibration;
