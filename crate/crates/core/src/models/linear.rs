use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::Regressor;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::stabilized_solve;

/// Ordinary least squares with an intercept.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LinearModel {
    /// Solves the normal equations. A small diagonal ridge (never on the
    /// intercept) is added only when the Gram matrix is numerically singular.
    pub fn fit(train: &Dataset) -> Result<Self> {
        let d = train.feature_dim();
        if train.len() <= d {
            return Err(Error::InsufficientData { needed: d, found: train.len() });
        }
        let p = d + 1;
        let mut gram = alloc::vec![0.0; p * p];
        let mut rhs = alloc::vec![0.0; p];
        let mut row = alloc::vec![0.0; p];
        for s in train {
            row[0] = 1.0;
            row[1..].copy_from_slice(&s.features);
            for i in 0..p {
                rhs[i] += row[i] * s.outcome;
                for j in 0..=i {
                    gram[i * p + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                gram[j * p + i] = gram[i * p + j];
            }
        }
        let mut penalize = alloc::vec![true; p];
        penalize[0] = false;
        let beta = stabilized_solve(&gram, &rhs, p, &penalize).ok_or(Error::SingularSystem)?;
        Ok(LinearModel { intercept: beta[0], coefficients: beta[1..].to_vec() })
    }
}

impl Regressor for LinearModel {
    fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}
