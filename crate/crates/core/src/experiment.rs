//! Method registry and the fit → calibrate → predict → score pipeline shared
//! by the simulation and real-data experiments.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::baselines::{ClassCondCalibration, WeightedCalibration};
use crate::cpci::{CpciCalibration, CpciConfig};
use crate::data::{DataSplits, PredictionSet};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, SetMetrics};
use crate::models::{ClassifierKind, RegressorKind, Standardizer};
use crate::vci::VciCalibration;

/// The compared procedures. Learners are fixed per method; the adversarial
/// variants exist to check that coverage does not depend on model quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Split conformal with least squares.
    Vci,
    /// Split conformal with k-NN regression.
    VciKnn,
    /// Two-step procedure with logistic regression and least squares.
    Cpci,
    /// Two-step procedure with k-NN classification and regression.
    CpciKnn,
    ClassCond,
    WeightedVci,
    /// Two-step procedure with a random classifier and a constant regressor.
    CpciAdversarial,
    /// Split conformal with a constant regressor.
    VciAdversarial,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Vci,
        Method::VciKnn,
        Method::Cpci,
        Method::CpciKnn,
        Method::ClassCond,
        Method::WeightedVci,
        Method::CpciAdversarial,
        Method::VciAdversarial,
    ];

    /// Everything except the adversarial checks.
    pub const STANDARD: [Method; 6] =
        [Method::Vci, Method::VciKnn, Method::Cpci, Method::CpciKnn, Method::ClassCond, Method::WeightedVci];

    pub fn id(self) -> &'static str {
        match self {
            Method::Vci => "VCI",
            Method::VciKnn => "VCI-KNN",
            Method::Cpci => "CPCI",
            Method::CpciKnn => "CPCI-KNN",
            Method::ClassCond => "CLASS-COND",
            Method::WeightedVci => "WEIGHTED-VCI",
            Method::CpciAdversarial => "CPCI-adversarial",
            Method::VciAdversarial => "VCI-adversarial",
        }
    }

    /// Uses the five-way split (train / val / cal1 / cal2 / test).
    pub fn is_two_step(self) -> bool {
        matches!(self, Method::Cpci | Method::CpciKnn | Method::CpciAdversarial)
    }

    fn default_models(self, settings: &MethodSettings) -> (Option<ClassifierKind>, RegressorKind, bool) {
        let knn_c = ClassifierKind::Knn { k: settings.knn_k };
        let knn_r = RegressorKind::Knn { k: settings.knn_k };
        let random = ClassifierKind::Random { seed: settings.adversarial_seed };
        match self {
            Method::Vci => (None, RegressorKind::Ols, false),
            Method::VciKnn => (None, knn_r, false),
            Method::Cpci | Method::ClassCond | Method::WeightedVci => {
                (Some(ClassifierKind::Logistic), RegressorKind::Ols, true)
            }
            Method::CpciKnn => (Some(knn_c), knn_r, true),
            Method::CpciAdversarial => (Some(random), RegressorKind::Constant, true),
            Method::VciAdversarial => (None, RegressorKind::Constant, false),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id().eq_ignore_ascii_case(s.trim()))
            .ok_or(Error::InvalidParameter("unknown method id"))
    }
}

#[cfg(feature = "serde")]
impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.id())
    }
}

#[cfg(feature = "serde")]
impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let id = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        id.parse().map_err(|_| serde::de::Error::custom(alloc::format!("unknown method `{id}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MethodSettings {
    pub cpci: CpciConfig,
    /// `None` uses `⌈√n⌉`.
    pub knn_k: Option<usize>,
    pub adversarial_seed: u64,
    /// Fit every regressor on `y > 0` only (two-step methods and baselines
    /// do this by default).
    pub nonzero_only: Option<bool>,
    pub classifier: Option<ClassifierKind>,
    pub regressor: Option<RegressorKind>,
}

impl MethodSettings {
    pub fn new(cpci: CpciConfig) -> Self {
        Self { cpci, knn_k: None, adversarial_seed: 0, nonzero_only: None, classifier: None, regressor: None }
    }

    pub fn level(&self) -> f64 {
        self.cpci.level
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub method: Method,
    pub r_hat: Option<f64>,
    pub metrics: SetMetrics,
    pub sets: Vec<PredictionSet>,
}

/// Z-scores every split with training statistics.
pub fn standardize_splits(splits: &DataSplits) -> Result<(Standardizer, DataSplits)> {
    let st = Standardizer::fit(&splits.train)?;
    let out = st.transform_splits(splits)?;
    Ok((st, out))
}

/// Fits, calibrates and scores one method on already-standardized splits.
/// Two-split methods calibrate on `val ∪ cal1 ∪ cal2`.
pub fn evaluate_method(splits: &DataSplits, method: Method, settings: &MethodSettings) -> Result<MethodOutcome> {
    if splits.test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let (default_classifier, default_regressor, default_nonzero) = method.default_models(settings);
    let classifier_kind = settings.classifier.or(default_classifier);
    let regressor_kind = settings.regressor.unwrap_or(default_regressor);
    let nonzero_only = settings.nonzero_only.unwrap_or(default_nonzero);
    let level = settings.level();

    let regressor = regressor_kind.fit(&splits.train, nonzero_only)?;
    let classifier = match classifier_kind {
        Some(kind) if method != Method::Vci && method != Method::VciKnn && method != Method::VciAdversarial => {
            Some(kind.fit(&splits.train)?)
        }
        _ => None,
    };

    let test = &splits.test;
    let mut r_hat = None;
    let sets: Vec<PredictionSet> = match (method, classifier) {
        (Method::Cpci | Method::CpciKnn | Method::CpciAdversarial, Some(classifier)) => {
            let cal = CpciCalibration::select_r(splits, classifier, regressor, &settings.cpci)?;
            r_hat = Some(cal.r_hat);
            test.iter().map(|s| cal.predict(&s.features)).collect()
        }
        (Method::ClassCond, Some(classifier)) => {
            let (_, cal) = splits.merge_for_two_way();
            let c = ClassCondCalibration::calibrate(&cal, classifier, regressor, level)?;
            test.iter().map(|s| c.predict(&s.features)).collect()
        }
        (Method::WeightedVci, Some(classifier)) => {
            let (_, cal) = splits.merge_for_two_way();
            let c = WeightedCalibration::calibrate(&cal, classifier, regressor, level)?;
            test.iter().map(|s| c.predict(&s.features)).collect()
        }
        (Method::Vci | Method::VciKnn | Method::VciAdversarial, _) => {
            let (_, cal) = splits.merge_for_two_way();
            let c = VciCalibration::calibrate(&cal, regressor, level)?.with_clip_at_zero(settings.cpci.clip_at_zero);
            test.iter().map(|s| c.predict(&s.features)).collect()
        }
        _ => return Err(Error::InvalidParameter("method requires a classifier")),
    };
    let metrics = compute_metrics(&sets, &test.outcomes())?;
    Ok(MethodOutcome { method, r_hat, metrics, sets })
}

/// One replication's metrics row.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExperimentRecord {
    pub method: Method,
    pub scenario: String,
    /// Sample size excluding the test set.
    pub n: usize,
    pub rep: u64,
    pub alpha: f64,
    pub r_hat: Option<f64>,
    pub coverage: f64,
    pub avg_len: f64,
    pub prop_zero_in_set: f64,
    pub avg_nonzero_len: Option<f64>,
    pub disconnected: usize,
    /// Wall-clock time, filled in by runners that measure it.
    pub runtime_ms: Option<u64>,
}

impl ExperimentRecord {
    pub fn from_outcome(outcome: &MethodOutcome, scenario: String, n: usize, rep: u64, alpha: f64) -> Self {
        let m = &outcome.metrics;
        Self {
            method: outcome.method,
            scenario,
            n,
            rep,
            alpha,
            r_hat: outcome.r_hat,
            coverage: m.coverage,
            avg_len: m.avg_length,
            prop_zero_in_set: m.prop_zero_in_set,
            avg_nonzero_len: m.avg_nonzero_length,
            disconnected: m.disconnected,
            runtime_ms: None,
        }
    }
}

/// Mean and sample standard deviation (`None` below two values).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MeanSd {
    pub mean: f64,
    pub sd: Option<f64>,
    pub count: usize,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.len() > 1).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            libm::sqrt(ss / (n - 1.0))
        });
        Some(Self { mean, sd, count: values.len() })
    }

    /// Standard error of the mean.
    pub fn se(&self) -> Option<f64> {
        self.sd.map(|sd| sd / libm::sqrt(self.count as f64))
    }
}

/// Per method × scenario × `n` summary of replication records.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AggregateRow {
    pub method: Method,
    pub scenario: String,
    pub n: usize,
    pub alpha: f64,
    pub reps: usize,
    pub r_hat: Option<MeanSd>,
    pub coverage: MeanSd,
    pub avg_len: MeanSd,
    pub prop_zero_in_set: MeanSd,
    /// Over replications where the value is defined.
    pub avg_nonzero_len: Option<MeanSd>,
    pub disconnected: MeanSd,
}

/// Groups by `(scenario, n, method)` and summarises each group. Records are
/// sorted by replication first, so the result does not depend on the order
/// they were collected in.
pub fn aggregate(records: &[ExperimentRecord]) -> Vec<AggregateRow> {
    let mut sorted: Vec<&ExperimentRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (a.scenario.as_str(), a.n, a.method, a.rep).cmp(&(b.scenario.as_str(), b.n, b.method, b.rep))
    });
    let mut out = Vec::new();
    for group in sorted.chunk_by(|a, b| a.scenario == b.scenario && a.n == b.n && a.method == b.method) {
        let pick = |f: fn(&ExperimentRecord) -> f64| -> Vec<f64> { group.iter().map(|r| f(r)).collect() };
        let r_hats: Vec<f64> = group.iter().filter_map(|r| r.r_hat).collect();
        let nonzero: Vec<f64> = group.iter().filter_map(|r| r.avg_nonzero_len).collect();
        let first = group[0];
        out.push(AggregateRow {
            method: first.method,
            scenario: first.scenario.clone(),
            n: first.n,
            alpha: first.alpha,
            reps: group.len(),
            r_hat: MeanSd::of(&r_hats),
            coverage: MeanSd::of(&pick(|r| r.coverage)).expect("non-empty group"),
            avg_len: MeanSd::of(&pick(|r| r.avg_len)).expect("non-empty group"),
            prop_zero_in_set: MeanSd::of(&pick(|r| r.prop_zero_in_set)).expect("non-empty group"),
            avg_nonzero_len: MeanSd::of(&nonzero),
            disconnected: MeanSd::of(&pick(|r| r.disconnected as f64)).expect("non-empty group"),
        });
    }
    out
}
