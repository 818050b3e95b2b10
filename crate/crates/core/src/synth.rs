//! Synthetic zero-inflated data and single-replication runs.
//!
//! Features are i.i.d. standard normal. A latent `W` follows a linear or
//! non-linear model with Gaussian noise; `t` is the `p`-quantile of the
//! pooled latent draws and the outcome is `W − t` above `t`, exactly `0`
//! otherwise. The latent coefficients are fixed here (see
//! [`LINEAR_COEFFICIENTS`]) and are not taken from any reference study.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::data::{partition, DataSplits, Dataset, LabeledSample, SplitScheme};
use crate::error::{Error, Result};
use crate::experiment::{evaluate_method, standardize_splits, ExperimentRecord, Method, MethodSettings};
use crate::quantile::empirical_quantile;
use crate::seed::{Purpose, SeedSpec};

/// Intercept and slopes on `x₁..x₄` of the linear latent model.
pub const LINEAR_COEFFICIENTS: [f64; 5] = [1.0, 2.0, -1.0, 1.5, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScenarioKind {
    Linear,
    Nonlinear,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Linear => "linear",
            ScenarioKind::Nonlinear => "nonlinear",
        }
    }
}

impl core::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(ScenarioKind::Linear),
            "nonlinear" | "non-linear" => Ok(ScenarioKind::Nonlinear),
            _ => Err(Error::InvalidParameter("scenario must be `linear` or `nonlinear`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// Number of features; the first four drive the latent, the rest are noise.
    pub dim: usize,
    /// Target share of zero outcomes, strictly inside `(0, 1)`.
    pub zero_fraction: f64,
    pub noise_sd: f64,
    /// Samples shared by training, validation and calibration.
    pub n: usize,
    /// Independent test samples.
    pub n_test: usize,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, n: usize) -> Self {
        Self { kind, dim: 4, zero_fraction: 0.75, noise_sd: 1.0, n, n_test: 1000 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 4 {
            return Err(Error::InvalidParameter("scenarios need at least 4 features"));
        }
        if !(self.zero_fraction > 0.0 && self.zero_fraction < 1.0) {
            return Err(Error::InvalidParameter("zero fraction must lie strictly inside (0, 1)"));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::InvalidParameter("noise sd must be finite and non-negative"));
        }
        if self.n < 40 * self.dim {
            return Err(Error::InsufficientData { needed: 40 * self.dim - 1, found: self.n });
        }
        if self.n_test == 0 {
            return Err(Error::Empty("test set"));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        String::from(self.kind.name())
    }
}

/// Noise-free latent value.
pub fn latent(kind: ScenarioKind, x: &[f64]) -> f64 {
    match kind {
        ScenarioKind::Linear => {
            let c = LINEAR_COEFFICIENTS;
            c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[2] + c[4] * x[3]
        }
        ScenarioKind::Nonlinear => {
            2.0 * libm::sin(core::f64::consts::PI * x[0]) + x[1] * x[1] - x[2] + 0.5 * x[3]
        }
    }
}

/// Draws `n + n_test` samples; the trailing `n_test` rows are the test set.
pub fn generate<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Dataset> {
    spec.validate()?;
    let total = spec.n + spec.n_test;
    let mut features = Vec::with_capacity(total);
    let mut latents = Vec::with_capacity(total);
    for _ in 0..total {
        let x: Vec<f64> = (0..spec.dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let noise: f64 = rng.sample(StandardNormal);
        latents.push(latent(spec.kind, &x) + spec.noise_sd * noise);
        features.push(x);
    }
    let threshold = empirical_quantile(&latents, spec.zero_fraction)?;
    let samples = features
        .into_iter()
        .zip(latents)
        .map(|(x, w)| LabeledSample { features: x, outcome: if w > threshold { w - threshold } else { 0.0 } })
        .collect();
    Dataset::new(spec.dim, samples)
}

/// Generates replication `rep` and splits it four ways plus the test set.
pub fn prepare_replication(spec: &ScenarioSpec, seeds: &SeedSpec, rep: u64) -> Result<DataSplits> {
    let data = generate(spec, &mut seeds.stream(rep, Purpose::Generate))?;
    let (pool, test) = data.split_tail(spec.n_test);
    let mut splits = partition(&pool, &SplitScheme::equal_four_way(), &mut seeds.stream(rep, Purpose::Partition))?;
    splits.test = test;
    Ok(splits)
}

/// Runs several methods on one shared replication. The adversarial seed is
/// derived from the replication stream.
pub fn run_replication_methods(
    spec: &ScenarioSpec,
    methods: &[Method],
    settings: &MethodSettings,
    seeds: &SeedSpec,
    rep: u64,
) -> Result<Vec<ExperimentRecord>> {
    let splits = prepare_replication(spec, seeds, rep)?;
    let (_, splits) = standardize_splits(&splits)?;
    let mut settings = settings.clone();
    settings.adversarial_seed = seeds.derive_u64(rep, Purpose::Model);
    methods
        .iter()
        .map(|&method| {
            let outcome = evaluate_method(&splits, method, &settings)?;
            Ok(ExperimentRecord::from_outcome(&outcome, spec.label(), spec.n, rep, settings.level()))
        })
        .collect()
}

pub fn run_replication(
    spec: &ScenarioSpec,
    method: Method,
    settings: &MethodSettings,
    seeds: &SeedSpec,
    rep: u64,
) -> Result<ExperimentRecord> {
    Ok(run_replication_methods(spec, &[method], settings, seeds, rep)?.remove(0))
}
