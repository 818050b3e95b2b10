use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::{Classifier, Regressor};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// `⌈√n⌉`, at least 1.
pub fn default_k(n: usize) -> usize {
    let k = libm::ceil(libm::sqrt(n as f64)) as usize;
    k.clamp(1, n.max(1))
}

/// Brute-force Euclidean neighbour search over a flat point buffer.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
struct NeighborIndex {
    dim: usize,
    points: Vec<f64>,
    values: Vec<f64>,
    k: usize,
}

impl NeighborIndex {
    fn build(train: &Dataset, k: usize, value: impl Fn(f64) -> f64) -> Result<Self> {
        if k == 0 || k > train.len() {
            return Err(Error::InvalidParameter("k must satisfy 1 <= k <= |train|"));
        }
        let mut points = Vec::with_capacity(train.len() * train.feature_dim());
        for s in train {
            points.extend_from_slice(&s.features);
        }
        Ok(Self { dim: train.feature_dim(), points, values: train.iter().map(|s| value(s.outcome)).collect(), k })
    }

    /// Mean of the stored values over the `k` nearest points. Distance ties
    /// go to the lower training index.
    fn neighbour_mean(&self, x: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .points
            .chunks_exact(self.dim)
            .enumerate()
            .map(|(i, p)| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, cmp);
        }
        dist[..self.k].iter().map(|&(_, i)| self.values[i]).sum::<f64>() / self.k as f64
    }
}

/// Fraction of non-zero outcomes among the `k` nearest training points.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct KnnClassifier {
    index: NeighborIndex,
}

impl KnnClassifier {
    pub fn fit(train: &Dataset, k: usize) -> Result<Self> {
        let index = NeighborIndex::build(train, k, |y| if y == 0.0 { 0.0 } else { 1.0 })?;
        Ok(Self { index })
    }

    pub fn k(&self) -> usize {
        self.index.k
    }
}

impl Classifier for KnnClassifier {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        self.index.neighbour_mean(x).clamp(0.0, 1.0)
    }
}

/// Mean outcome among the `k` nearest training points.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct KnnRegressor {
    index: NeighborIndex,
}

impl KnnRegressor {
    pub fn fit(train: &Dataset, k: usize) -> Result<Self> {
        Ok(Self { index: NeighborIndex::build(train, k, |y| y)? })
    }

    pub fn k(&self) -> usize {
        self.index.k
    }
}

impl Regressor for KnnRegressor {
    fn predict(&self, x: &[f64]) -> f64 {
        self.index.neighbour_mean(x)
    }
}
