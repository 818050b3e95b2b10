//! Run configuration: a flat TOML document whose keys double as CLI flags.

use std::path::{Path, PathBuf};

use cpci_core::cpci::{grid_with_step, CpciConfig, Objective};
use cpci_core::experiment::MethodSettings;
use cpci_core::models::{ClassifierKind, RegressorKind};
use cpci_core::synth::{ScenarioKind, ScenarioSpec};
use cpci_core::Method;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierChoice {
    Logistic,
    Knn,
    /// Ignores its input.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RegressorChoice {
    Ols,
    Knn,
    Constant,
}

/// Missing keys take the defaults below; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    /// Sample sizes before the test set; one sweep per value.
    pub n: Vec<usize>,
    pub reps: usize,
    pub alpha: f64,
    pub zero_frac: f64,
    pub noise_sd: f64,
    pub dim: usize,
    pub n_test: usize,
    /// Empty means every method (`simulate`) or the non-adversarial ones
    /// (`airquality`).
    pub methods: Vec<Method>,
    /// Replaces every method's classifier.
    pub classifier: Option<ClassifierChoice>,
    /// Replaces every method's regressor.
    pub regressor: Option<RegressorChoice>,
    /// `None` uses `⌈√n⌉`.
    pub knn_k: Option<usize>,
    /// Forces regressors onto `y > 0` (or onto every sample).
    pub nonzero_only: Option<bool>,
    pub objective: Objective,
    pub c_const: f64,
    pub beta_adjust: bool,
    pub grid_step: f64,
    pub clip_at_zero: bool,
    pub break_ties: bool,
    pub tolerance_quantile: Vec<f64>,
    /// Random five-way splits per tolerance for `airquality`.
    pub splits: usize,
    pub hour_features: bool,
    pub data: Option<PathBuf>,
    pub seed: u64,
    pub out: PathBuf,
    /// Defaults to `<out stem>_aggregate.csv`.
    pub aggregate_out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// Fill `runtime_ms`; makes output depend on the machine.
    pub timing: bool,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::Linear,
            n: vec![2000],
            reps: 1000,
            alpha: 0.9,
            zero_frac: 0.75,
            noise_sd: 1.0,
            dim: 4,
            n_test: 1000,
            methods: Vec::new(),
            classifier: None,
            regressor: None,
            knn_k: None,
            nonzero_only: None,
            objective: Objective::OverallLength,
            c_const: cpci_core::cpci::DEFAULT_C,
            beta_adjust: false,
            grid_step: cpci_core::cpci::DEFAULT_GRID_STEP,
            clip_at_zero: false,
            break_ties: true,
            tolerance_quantile: vec![0.4, 0.5, 0.6, 0.7, 0.8],
            splits: 100,
            hour_features: true,
            data: None,
            seed: 1,
            out: PathBuf::from("results.csv"),
            aggregate_out: None,
            svg: None,
            timing: false,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks everything that does not need data.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.reps == 0 {
            return fail("reps must be at least 1".into());
        }
        if self.splits == 0 {
            return fail("splits must be at least 1".into());
        }
        if self.n.is_empty() {
            return fail("n must list at least one sample size".into());
        }
        if self.tolerance_quantile.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return fail("tolerance quantiles must lie strictly inside (0, 1)".into());
        }
        if self.knn_k == Some(0) {
            return fail("knn_k must be at least 1".into());
        }
        if self.threads == Some(0) {
            return fail("threads must be at least 1".into());
        }
        for &n in &self.n {
            self.scenario_spec(n).validate().map_err(|e| Error::Config(format!("n = {n}: {e}")))?;
        }
        self.cpci_config()?.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn scenario_spec(&self, n: usize) -> ScenarioSpec {
        ScenarioSpec {
            kind: self.scenario,
            dim: self.dim,
            zero_fraction: self.zero_frac,
            noise_sd: self.noise_sd,
            n,
            n_test: self.n_test,
        }
    }

    pub fn cpci_config(&self) -> Result<CpciConfig> {
        let grid = grid_with_step(self.grid_step).map_err(|e| Error::Config(e.to_string()))?;
        Ok(CpciConfig {
            level: self.alpha,
            grid,
            c_const: self.c_const,
            adjust_beta: self.beta_adjust,
            objective: self.objective,
            clip_at_zero: self.clip_at_zero,
            break_ties: self.break_ties,
        })
    }

    pub fn classifier_kind(&self) -> Option<ClassifierKind> {
        self.classifier.map(|c| match c {
            ClassifierChoice::Logistic => ClassifierKind::Logistic,
            ClassifierChoice::Knn => ClassifierKind::Knn { k: self.knn_k },
            ClassifierChoice::Random => ClassifierKind::Random { seed: self.seed },
        })
    }

    pub fn regressor_kind(&self) -> Option<RegressorKind> {
        self.regressor.map(|r| match r {
            RegressorChoice::Ols => RegressorKind::Ols,
            RegressorChoice::Knn => RegressorKind::Knn { k: self.knn_k },
            RegressorChoice::Constant => RegressorKind::Constant,
        })
    }

    pub fn method_settings(&self) -> Result<MethodSettings> {
        let mut settings = MethodSettings::new(self.cpci_config()?);
        settings.knn_k = self.knn_k;
        settings.nonzero_only = self.nonzero_only;
        settings.classifier = self.classifier_kind();
        settings.regressor = self.regressor_kind();
        Ok(settings)
    }

    /// `methods`, or `default` when empty.
    pub fn methods_or(&self, default: &[Method]) -> Vec<Method> {
        if self.methods.is_empty() {
            default.to_vec()
        } else {
            self.methods.clone()
        }
    }

    pub fn aggregate_path(&self) -> PathBuf {
        self.aggregate_out.clone().unwrap_or_else(|| sibling(&self.out, "_aggregate.csv"))
    }
}

/// `dir/stem.ext` → `dir/stem<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}
