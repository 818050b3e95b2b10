use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::data::{DataSplits, Dataset};
use crate::error::{Error, Result};

/// Per-feature z-scoring with statistics estimated on the training split.
///
/// Features whose training standard deviation is (numerically) zero are
/// dropped; [`Standardizer::dropped`] lists them so callers can warn.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Standardizer {
    input_dim: usize,
    kept: Vec<usize>,
    means: Vec<f64>,
    sds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty("training set"));
        }
        let dim = train.feature_dim();
        let n = train.len() as f64;
        let mut means = alloc::vec![0.0; dim];
        for s in train {
            for (m, v) in means.iter_mut().zip(&s.features) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = alloc::vec![0.0; dim];
        for s in train {
            for ((acc, v), m) in vars.iter_mut().zip(&s.features).zip(&means) {
                *acc += (v - m) * (v - m);
            }
        }
        let mut out = Standardizer { input_dim: dim, kept: Vec::new(), means: Vec::new(), sds: Vec::new() };
        for j in 0..dim {
            let sd = libm::sqrt(vars[j] / n);
            if sd > 1e-12 * (1.0 + means[j].abs()) {
                out.kept.push(j);
                out.means.push(means[j]);
                out.sds.push(sd);
            }
        }
        if out.kept.is_empty() {
            return Err(Error::InvalidParameter("every feature is constant on the training set"));
        }
        Ok(out)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.kept.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sds(&self) -> &[f64] {
        &self.sds
    }

    /// Indices of input features removed for being constant.
    pub fn dropped(&self) -> Vec<usize> {
        (0..self.input_dim).filter(|j| !self.kept.contains(j)).collect()
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        self.kept
            .iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(&j, (m, s))| (x[j] - m) / s)
            .collect()
    }

    pub fn transform_dataset(&self, data: &Dataset) -> Result<Dataset> {
        if data.feature_dim() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, found: data.feature_dim() });
        }
        data.map_features(self.output_dim(), |x| self.transform(x))
    }

    pub fn transform_splits(&self, splits: &DataSplits) -> Result<DataSplits> {
        if splits.train.feature_dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: splits.train.feature_dim(),
            });
        }
        splits.map_features(self.output_dim(), |x| self.transform(x))
    }
}
