#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::{Classifier, Regressor};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed::hash_unit;

/// Uninformative classifier: a pseudo-random probability obtained by hashing
/// the feature bits with a seed. Deterministic in `x`, independent of `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RandomClassifier {
    pub seed: u64,
}

impl RandomClassifier {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl Classifier for RandomClassifier {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        hash_unit(self.seed, x)
    }
}

/// Predicts the same value for every input.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ConstantRegressor {
    pub value: f64,
}

impl ConstantRegressor {
    pub fn mean_of(train: &Dataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty("regressor training set"));
        }
        let value = train.iter().map(|s| s.outcome).sum::<f64>() / train.len() as f64;
        Ok(Self { value })
    }
}

impl Regressor for ConstantRegressor {
    fn predict(&self, _x: &[f64]) -> f64 {
        self.value
    }
}
