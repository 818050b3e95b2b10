use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::stabilized_solve;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticOptions {
    /// L2 penalty on the slopes (not the intercept).
    pub ridge: f64,
    /// Stop once the gradient's ∞-norm drops below this.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self { ridge: 1e-6, tolerance: 1e-6, max_iter: 200 }
    }
}

/// Logistic regression for the label `y ≠ 0`, fitted by Newton / IRLS with
/// step halving.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

fn label(y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        1.0
    }
}

fn linear_predictor(weights: &[f64], x: &[f64]) -> f64 {
    weights[0] + weights[1..].iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
}

/// Penalized log-likelihood at `weights = [intercept, slopes…]`.
pub fn penalized_log_likelihood(weights: &[f64], data: &Dataset, ridge: f64) -> f64 {
    let fit: f64 = data
        .iter()
        .map(|s| {
            let z = linear_predictor(weights, &s.features);
            label(s.outcome) * z - softplus(z)
        })
        .sum();
    fit - 0.5 * ridge * weights[1..].iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`penalized_log_likelihood`].
pub fn penalized_gradient(weights: &[f64], data: &Dataset, ridge: f64) -> Vec<f64> {
    let mut g = alloc::vec![0.0; weights.len()];
    for s in data {
        let resid = label(s.outcome) - sigmoid(linear_predictor(weights, &s.features));
        g[0] += resid;
        for (gj, v) in g[1..].iter_mut().zip(&s.features) {
            *gj += resid * v;
        }
    }
    for (gj, w) in g[1..].iter_mut().zip(&weights[1..]) {
        *gj -= ridge * w;
    }
    g
}

impl LogisticModel {
    pub fn fit(train: &Dataset) -> Result<Self> {
        Self::fit_with(train, LogisticOptions::default())
    }

    pub fn fit_with(train: &Dataset, opts: LogisticOptions) -> Result<Self> {
        let zeros = train.zero_count();
        if zeros == 0 || zeros == train.len() {
            return Err(Error::OneClass("classifier training set"));
        }
        let p = train.feature_dim() + 1;
        let mut penalize = alloc::vec![true; p];
        penalize[0] = false;

        // Start from the intercept-only optimum.
        let rate = (train.len() - zeros) as f64 / train.len() as f64;
        let mut w = alloc::vec![0.0; p];
        w[0] = libm::log(rate / (1.0 - rate));
        let mut objective = penalized_log_likelihood(&w, train, opts.ridge);

        let mut hess = alloc::vec![0.0; p * p];
        let mut row = alloc::vec![0.0; p];
        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_iter {
            let g = penalized_gradient(&w, train, opts.ridge);
            if g.iter().all(|v| v.abs() < opts.tolerance) {
                converged = true;
                break;
            }
            iterations += 1;

            hess.iter_mut().for_each(|h| *h = 0.0);
            for s in train {
                let pr = sigmoid(linear_predictor(&w, &s.features));
                let weight = pr * (1.0 - pr);
                row[0] = 1.0;
                row[1..].copy_from_slice(&s.features);
                for i in 0..p {
                    for j in 0..=i {
                        hess[i * p + j] += weight * row[i] * row[j];
                    }
                }
            }
            for i in 0..p {
                if penalize[i] {
                    hess[i * p + i] += opts.ridge;
                }
                for j in 0..i {
                    hess[j * p + i] = hess[i * p + j];
                }
            }
            let step = stabilized_solve(&hess, &g, p, &[true].repeat(p)).ok_or(Error::SingularSystem)?;

            let mut scale = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let trial: Vec<f64> = w.iter().zip(&step).map(|(a, b)| a + scale * b).collect();
                let value = penalized_log_likelihood(&trial, train, opts.ridge);
                if value >= objective {
                    w = trial;
                    objective = value;
                    improved = true;
                    break;
                }
                scale *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if !converged {
            converged = penalized_gradient(&w, train, opts.ridge).iter().all(|v| v.abs() < opts.tolerance);
        }
        Ok(LogisticModel { intercept: w[0], coefficients: w[1..].to_vec(), iterations, converged })
    }

    /// `[intercept, slopes…]`.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.coefficients.len() + 1);
        w.push(self.intercept);
        w.extend_from_slice(&self.coefficients);
        w
    }
}

impl Classifier for LogisticModel {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        let z = self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>();
        sigmoid(z).clamp(0.0, 1.0)
    }
}
