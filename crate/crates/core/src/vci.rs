//! Vanilla split conformal inference with absolute-residual scores.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PredictionSet};
use crate::error::{Error, Result};
use crate::models::Regressor;
use crate::quantile::conformal_threshold;

/// `|y − f̂(x)|`.
pub fn conformity_score<R: Regressor + ?Sized>(regressor: &R, x: &[f64], y: f64) -> f64 {
    (y - regressor.predict(x)).abs()
}

/// Calibrated split conformal predictor: `[f̂(x) − Q̂, f̂(x) + Q̂]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct VciCalibration<R> {
    pub regressor: R,
    /// `Q̂`, an order statistic of the calibration scores augmented with `+∞`.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub threshold: f64,
    pub level: f64,
    /// Raise negative lower ends to 0. Off by default.
    pub clip_at_zero: bool,
}

impl<R: Regressor> VciCalibration<R> {
    pub fn calibrate(cal: &Dataset, regressor: R, level: f64) -> Result<Self> {
        if cal.is_empty() {
            return Err(Error::Empty("calibration set"));
        }
        let scores: Vec<f64> = cal.iter().map(|s| conformity_score(&regressor, &s.features, s.outcome)).collect();
        let threshold = conformal_threshold(&scores, level)?;
        Ok(Self { regressor, threshold, level, clip_at_zero: false })
    }

    pub fn with_clip_at_zero(mut self, clip: bool) -> Self {
        self.clip_at_zero = clip;
        self
    }

    pub fn predict(&self, x: &[f64]) -> PredictionSet {
        PredictionSet::symmetric(self.regressor.predict(x), self.threshold, self.clip_at_zero)
    }
}
