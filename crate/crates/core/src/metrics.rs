//! Summary statistics of prediction sets against realised outcomes.

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::data::PredictionSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SetMetrics {
    pub coverage: f64,
    /// Mean length, `{0}` counting as 0. Infinite if any set is unbounded.
    pub avg_length: f64,
    pub prop_zero_in_set: f64,
    /// Mean length over sets other than `{0}`; `None` when every set is `{0}`.
    pub avg_nonzero_length: Option<f64>,
    pub disconnected: usize,
}

pub fn compute_metrics(sets: &[PredictionSet], truths: &[f64]) -> Result<SetMetrics> {
    if sets.len() != truths.len() {
        return Err(Error::LengthMismatch { left: sets.len(), right: truths.len() });
    }
    if sets.is_empty() {
        return Err(Error::Empty("prediction sets"));
    }
    let n = sets.len() as f64;
    let mut covered = 0usize;
    let mut with_zero = 0usize;
    let mut total_length = 0.0;
    let mut nonzero_length = 0.0;
    let mut nonzero_sets = 0usize;
    let mut disconnected = 0usize;
    for (set, &y) in sets.iter().zip(truths) {
        covered += usize::from(set.contains(y));
        with_zero += usize::from(set.contains_zero());
        disconnected += usize::from(set.is_disconnected());
        let len = set.length();
        total_length += len;
        if !set.is_zero_singleton() {
            nonzero_length += len;
            nonzero_sets += 1;
        }
    }
    Ok(SetMetrics {
        coverage: covered as f64 / n,
        avg_length: total_length / n,
        prop_zero_in_set: with_zero as f64 / n,
        avg_nonzero_length: (nonzero_sets > 0).then(|| nonzero_length / nonzero_sets as f64),
        disconnected,
    })
}
