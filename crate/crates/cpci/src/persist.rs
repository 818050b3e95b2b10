//! Versioned JSON calibration files for `fit` / `predict`.

use std::path::Path;

use cpci_core::models::{ClassifierModel, RegressorModel, Standardizer};
use cpci_core::{CpciCalibration, PredictionSet};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::output::write_file;

pub const FORMAT: &str = "cpci-calibration";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    pub format: String,
    pub version: u32,
    /// Raw input columns, in order.
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
    /// Effective configuration of the `fit` run.
    pub config: RunConfig,
    pub train_rows: usize,
    pub calibration: CpciCalibration<ClassifierModel, RegressorModel>,
}

impl CalibrationFile {
    pub fn new(
        feature_names: Vec<String>,
        standardizer: Standardizer,
        config: RunConfig,
        train_rows: usize,
        calibration: CpciCalibration<ClassifierModel, RegressorModel>,
    ) -> Self {
        Self { format: FORMAT.into(), version: VERSION, feature_names, standardizer, config, train_rows, calibration }
    }

    /// Prediction set for a raw (unstandardized) feature vector.
    pub fn predict(&self, x: &[f64]) -> PredictionSet {
        self.calibration.predict(&self.standardizer.transform(x))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("calibration serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        Self::from_json(&text, path)
    }

    /// The format tag and version are checked before the body is decoded.
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let corrupted = |message: String| Error::Corrupted { path: path.to_path_buf(), message };
        let value: Value = serde_json::from_str(text).map_err(|e| corrupted(e.to_string()))?;
        if value.get("format").and_then(Value::as_str) != Some(FORMAT) {
            return Err(corrupted(format!("missing `format: \"{FORMAT}\"` tag")));
        }
        match value.get("version") {
            Some(v) if v.as_u64() == Some(u64::from(VERSION)) => {}
            found => {
                return Err(Error::Version {
                    path: path.to_path_buf(),
                    found: found.map_or_else(|| "<missing>".into(), Value::to_string),
                    expected: VERSION,
                })
            }
        }
        serde_json::from_value(value).map_err(|e| corrupted(e.to_string()))
    }
}
