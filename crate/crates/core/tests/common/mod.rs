#![allow(dead_code)]

use cpci_core::experiment::{evaluate_method, standardize_splits, Method, MethodOutcome, MethodSettings};
use cpci_core::synth::{prepare_replication, ScenarioKind, ScenarioSpec};
use cpci_core::{DataSplits, Purpose, SeedSpec};

pub const LEVEL: f64 = 0.9;

pub fn splits(kind: ScenarioKind, n: usize, seed: u64, rep: u64) -> DataSplits {
    let spec = ScenarioSpec::new(kind, n);
    let raw = prepare_replication(&spec, &SeedSpec::new(seed), rep).unwrap();
    standardize_splits(&raw).unwrap().1
}

pub fn run(kind: ScenarioKind, n: usize, seed: u64, rep: u64, method: Method, settings: &MethodSettings) -> (DataSplits, MethodOutcome) {
    let s = splits(kind, n, seed, rep);
    let mut settings = settings.clone();
    settings.adversarial_seed = SeedSpec::new(seed).derive_u64(rep, Purpose::Model);
    let out = evaluate_method(&s, method, &settings).unwrap();
    (s, out)
}

/// Mean and standard error.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
