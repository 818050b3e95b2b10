//! Classifier and regressor contracts plus the built-in learners.
//!
//! Coverage of every conformal procedure in this crate holds for any model
//! satisfying these traits, so the built-ins are deliberately simple:
//! least squares and logistic regression, k-nearest neighbours, and two
//! adversarial models (random probabilities, constant regression) used to
//! exercise model-agnosticism.

mod adversarial;
mod knn;
mod linear;
mod logistic;
mod standardize;

use alloc::boxed::Box;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

pub use self::adversarial::{ConstantRegressor, RandomClassifier};
pub use self::knn::{default_k, KnnClassifier, KnnRegressor};
pub use self::linear::LinearModel;
pub use self::logistic::{LogisticModel, LogisticOptions};
pub use self::standardize::Standardizer;

use crate::data::Dataset;
use crate::error::Result;

/// Estimates `P(Y ≠ 0 | X = x)`.
pub trait Classifier {
    /// Must lie in `[0, 1]` and depend only on the fitted state and `x`.
    fn predict_proba(&self, x: &[f64]) -> f64;
}

/// Point prediction of the outcome.
pub trait Regressor {
    fn predict(&self, x: &[f64]) -> f64;
}

impl<T: Classifier + ?Sized> Classifier for &T {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        (**self).predict_proba(x)
    }
}

impl<T: Classifier + ?Sized> Classifier for Box<T> {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        (**self).predict_proba(x)
    }
}

impl<T: Regressor + ?Sized> Regressor for &T {
    fn predict(&self, x: &[f64]) -> f64 {
        (**self).predict(x)
    }
}

impl<T: Regressor + ?Sized> Regressor for Box<T> {
    fn predict(&self, x: &[f64]) -> f64 {
        (**self).predict(x)
    }
}

/// Which classifier to fit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ClassifierKind {
    Logistic,
    /// `None` picks `⌈√n⌉`.
    Knn { k: Option<usize> },
    Random { seed: u64 },
}

/// Which regressor to fit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RegressorKind {
    Ols,
    Knn { k: Option<usize> },
    /// Predicts the training mean everywhere.
    Constant,
}

/// A fitted classifier of any built-in kind.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ClassifierModel {
    Logistic(LogisticModel),
    Knn(KnnClassifier),
    Random(RandomClassifier),
}

/// A fitted regressor of any built-in kind.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum RegressorModel {
    Linear(LinearModel),
    Knn(KnnRegressor),
    Constant(ConstantRegressor),
}

impl ClassifierKind {
    /// Fits on the binary label `y ≠ 0`.
    pub fn fit(&self, train: &Dataset) -> Result<ClassifierModel> {
        Ok(match *self {
            ClassifierKind::Logistic => ClassifierModel::Logistic(LogisticModel::fit(train)?),
            ClassifierKind::Knn { k } => {
                let k = k.unwrap_or_else(|| default_k(train.len()));
                ClassifierModel::Knn(KnnClassifier::fit(train, k)?)
            }
            ClassifierKind::Random { seed } => ClassifierModel::Random(RandomClassifier::new(seed)),
        })
    }
}

impl RegressorKind {
    /// With `nonzero_only` the model only sees training samples with `y > 0`.
    pub fn fit(&self, train: &Dataset, nonzero_only: bool) -> Result<RegressorModel> {
        let filtered;
        let data = if nonzero_only {
            filtered = train.nonzero_only();
            &filtered
        } else {
            train
        };
        Ok(match *self {
            RegressorKind::Ols => RegressorModel::Linear(LinearModel::fit(data)?),
            RegressorKind::Knn { k } => {
                let k = k.unwrap_or_else(|| default_k(data.len()));
                RegressorModel::Knn(KnnRegressor::fit(data, k)?)
            }
            RegressorKind::Constant => RegressorModel::Constant(ConstantRegressor::mean_of(data)?),
        })
    }
}

impl Classifier for ClassifierModel {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        match self {
            ClassifierModel::Logistic(m) => m.predict_proba(x),
            ClassifierModel::Knn(m) => m.predict_proba(x),
            ClassifierModel::Random(m) => m.predict_proba(x),
        }
    }
}

impl Regressor for RegressorModel {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            RegressorModel::Linear(m) => m.predict(x),
            RegressorModel::Knn(m) => m.predict(x),
            RegressorModel::Constant(m) => m.predict(x),
        }
    }
}
