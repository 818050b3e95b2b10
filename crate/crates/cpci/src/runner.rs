//! Replication sweeps and the fit / predict workflow.
//!
//! Replications run on a rayon pool; results are collected in replication
//! order so output never depends on scheduling.

use std::time::Instant;

use cpci_core::data::partition;
use cpci_core::experiment::{evaluate_method, standardize_splits, ExperimentRecord, MethodOutcome, MethodSettings};
use cpci_core::models::{ClassifierKind, RegressorKind, Standardizer};
use cpci_core::synth::{prepare_replication, ScenarioSpec};
use cpci_core::{CpciCalibration, DataSplits, Dataset, Method, PredictionSet, Purpose, SeedSpec, SplitScheme};
use rayon::prelude::*;

use crate::airquality::{build_outcome, AirQualityConfig, AirQualityTable};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::persist::CalibrationFile;

/// Sees every method outcome (prediction sets included) before it is
/// reduced to a record.
pub type Inspect<'a> = &'a (dyn Fn(&MethodOutcome) + Sync);

fn ignore(_: &MethodOutcome) {}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Scores `methods` on standardized `splits`.
#[allow(clippy::too_many_arguments)]
fn score_methods(
    splits: &DataSplits,
    methods: &[Method],
    settings: &MethodSettings,
    scenario: &str,
    n: usize,
    rep: u64,
    timing: bool,
    inspect: Inspect,
) -> Result<Vec<ExperimentRecord>> {
    methods
        .iter()
        .map(|&method| {
            let start = timing.then(Instant::now);
            let outcome = evaluate_method(splits, method, settings)
                .map_err(|source| Error::Replication { method, rep, source })?;
            inspect(&outcome);
            let mut record = ExperimentRecord::from_outcome(&outcome, scenario.to_string(), n, rep, settings.level());
            record.runtime_ms = start.map(|t| t.elapsed().as_millis() as u64);
            Ok(record)
        })
        .collect()
}

fn simulate_one(
    spec: &ScenarioSpec,
    methods: &[Method],
    settings: &MethodSettings,
    seeds: &SeedSpec,
    rep: u64,
    timing: bool,
    inspect: Inspect,
) -> Result<Vec<ExperimentRecord>> {
    let splits = prepare_replication(spec, seeds, rep)?;
    let (_, splits) = standardize_splits(&splits)?;
    let mut settings = settings.clone();
    settings.adversarial_seed = seeds.derive_u64(rep, Purpose::Model);
    score_methods(&splits, methods, &settings, &spec.label(), spec.n, rep, timing, inspect)
}

/// Every `n` × replication × method of the synthetic sweep.
pub fn simulate(cfg: &RunConfig) -> Result<Vec<ExperimentRecord>> {
    simulate_with(cfg, &ignore)
}

pub fn simulate_with(cfg: &RunConfig, inspect: Inspect) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let methods = cfg.methods_or(&Method::ALL);
    let settings = cfg.method_settings()?;
    let seeds = SeedSpec::new(cfg.seed);
    let mut out = Vec::new();
    for &n in &cfg.n {
        let spec = cfg.scenario_spec(n);
        log::info!("{} n={n}: {} replications", spec.label(), cfg.reps);
        let per_rep = with_pool(cfg.threads, || {
            (0..cfg.reps as u64)
                .into_par_iter()
                .map(|rep| simulate_one(&spec, &methods, &settings, &seeds, rep, cfg.timing, inspect))
                .collect::<Result<Vec<_>>>()
        })??;
        out.extend(per_rep.into_iter().flatten());
    }
    Ok(out)
}

/// Scenario label for a tolerance, e.g. `airquality-q0.7`.
pub fn airquality_label(q: f64) -> String {
    format!("airquality-q{q}")
}

/// Random five-way splits per tolerance quantile. Split `s` uses the same
/// row permutation for every tolerance.
pub fn airquality(cfg: &RunConfig, table: &AirQualityTable) -> Result<Vec<ExperimentRecord>> {
    airquality_with(cfg, table, &ignore)
}

pub fn airquality_with(cfg: &RunConfig, table: &AirQualityTable, inspect: Inspect) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let methods = cfg.methods_or(&Method::STANDARD);
    let settings = cfg.method_settings()?;
    let seeds = SeedSpec::new(cfg.seed);
    let mut out = Vec::new();
    for &q in &cfg.tolerance_quantile {
        let data = build_outcome(table, &AirQualityConfig { tolerance_quantile: q, hour_features: cfg.hour_features })?;
        let label = airquality_label(q);
        log::info!(
            "{label}: {} rows ({} dropped), tolerance {}, zero share {:.3}",
            data.dataset.len(),
            data.dropped,
            data.tolerance,
            data.dataset.zero_fraction()
        );
        let dataset = &data.dataset;
        let per_split = with_pool(cfg.threads, || {
            (0..cfg.splits as u64)
                .into_par_iter()
                .map(|split| {
                    let raw = partition(dataset, &SplitScheme::equal_five_way(), &mut seeds.stream(split, Purpose::Partition))?;
                    let (_, splits) = standardize_splits(&raw)?;
                    let mut settings = settings.clone();
                    settings.adversarial_seed = seeds.derive_u64(split, Purpose::Model);
                    score_methods(&splits, &methods, &settings, &label, dataset.len(), split, cfg.timing, inspect)
                })
                .collect::<Result<Vec<_>>>()
        })??;
        out.extend(per_split.into_iter().flatten());
    }
    Ok(out)
}

/// Splits `data` four ways, standardizes on the training part and runs the
/// `r` search. Learners default to logistic regression and least squares
/// fitted on `y > 0`.
pub fn fit(cfg: &RunConfig, feature_names: Vec<String>, data: &Dataset) -> Result<CalibrationFile> {
    let config = cfg.cpci_config()?;
    config.validate()?;
    let raw = partition(data, &SplitScheme::equal_four_way(), &mut SeedSpec::new(cfg.seed).stream(0, Purpose::Partition))?;
    let standardizer = Standardizer::fit(&raw.train)?;
    let dropped = standardizer.dropped();
    if !dropped.is_empty() {
        let names: Vec<&str> = dropped.iter().map(|&i| feature_names[i].as_str()).collect();
        log::warn!("constant on the training split, ignored: {}", names.join(", "));
    }
    let splits = standardizer.transform_splits(&raw)?;
    let classifier = cfg.classifier_kind().unwrap_or(ClassifierKind::Logistic).fit(&splits.train)?;
    let regressor =
        cfg.regressor_kind().unwrap_or(RegressorKind::Ols).fit(&splits.train, cfg.nonzero_only.unwrap_or(true))?;
    let calibration = CpciCalibration::select_r(&splits, classifier, regressor, &config)?;
    if calibration.fell_back {
        log::warn!("every grid objective was infinite; using r = 0");
    }
    Ok(CalibrationFile::new(feature_names, standardizer, cfg.clone(), data.len(), calibration))
}

pub fn predict(file: &CalibrationFile, features: &[Vec<f64>]) -> Vec<PredictionSet> {
    features.par_iter().map(|x| file.predict(x)).collect()
}
