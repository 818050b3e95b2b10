//! Comparison procedures that may return disconnected sets.
//!
//! Both use a zero-class score `S⁰(x) = p̂(x)` and a non-zero score
//! `S¹(x, y) = |y − f̂(x)|`. Class-conditional calibration thresholds each
//! class separately; the weighted variant pools the mixed score
//! `S⁰·𝟙{y = 0} + S¹·𝟙{y ≠ 0}` under one threshold. In both, `0` belongs
//! to the set exactly when its own score passes, so a residual interval
//! straddling `0` is punctured when the zero score fails.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PredictionSet};
use crate::error::{Error, Result};
use crate::models::{Classifier, Regressor};
use crate::quantile::conformal_threshold;
use crate::vci::conformity_score;

/// Mondrian-style calibration at level `α̃` within each outcome class.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ClassCondCalibration<C, R> {
    pub classifier: C,
    pub regressor: R,
    /// Threshold on `p̂(x)` over zero-outcome calibration points.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub zero_threshold: f64,
    /// Threshold on residuals over non-zero calibration points.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub nonzero_threshold: f64,
    pub level: f64,
}

impl<C: Classifier, R: Regressor> ClassCondCalibration<C, R> {
    pub fn calibrate(cal: &Dataset, classifier: C, regressor: R, level: f64) -> Result<Self> {
        let mut zero_scores = Vec::new();
        let mut nonzero_scores = Vec::new();
        for s in cal {
            if s.is_zero() {
                zero_scores.push(classifier.predict_proba(&s.features));
            } else {
                nonzero_scores.push(conformity_score(&regressor, &s.features, s.outcome));
            }
        }
        if zero_scores.is_empty() || nonzero_scores.is_empty() {
            return Err(Error::OneClass("class-conditional calibration set"));
        }
        Ok(Self {
            zero_threshold: conformal_threshold(&zero_scores, level)?,
            nonzero_threshold: conformal_threshold(&nonzero_scores, level)?,
            classifier,
            regressor,
            level,
        })
    }

    pub fn predict(&self, x: &[f64]) -> PredictionSet {
        let interval = PredictionSet::symmetric(self.regressor.predict(x), self.nonzero_threshold, false);
        PredictionSet::with_zero_membership(interval, self.classifier.predict_proba(x) <= self.zero_threshold)
    }
}

/// One conformal threshold over the mixed zero / non-zero score.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct WeightedCalibration<C, R> {
    pub classifier: C,
    pub regressor: R,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub threshold: f64,
    pub level: f64,
}

impl<C: Classifier, R: Regressor> WeightedCalibration<C, R> {
    pub fn calibrate(cal: &Dataset, classifier: C, regressor: R, level: f64) -> Result<Self> {
        if cal.is_empty() {
            return Err(Error::Empty("calibration set"));
        }
        let scores: Vec<f64> = cal
            .iter()
            .map(|s| {
                if s.is_zero() {
                    classifier.predict_proba(&s.features)
                } else {
                    conformity_score(&regressor, &s.features, s.outcome)
                }
            })
            .collect();
        Ok(Self { threshold: conformal_threshold(&scores, level)?, classifier, regressor, level })
    }

    pub fn predict(&self, x: &[f64]) -> PredictionSet {
        let interval = PredictionSet::symmetric(self.regressor.predict(x), self.threshold, false);
        PredictionSet::with_zero_membership(interval, self.classifier.predict_proba(x) <= self.threshold)
    }
}
