//! Plain feature tables: comma-separated, header row, `#` comments.
//! An `id` column is optional and `y` holds the outcome.

use std::path::Path;

use cpci_core::Dataset;

use crate::error::{Error, Result};
use crate::output::{csv_text, fmt_f64, parse_f64, write_file};

pub const ID_COLUMN: &str = "id";
pub const OUTCOME_COLUMN: &str = "y";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub feature_names: Vec<String>,
    /// From the `id` column, else the 0-based row index.
    pub ids: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub outcomes: Option<Vec<f64>>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn to_dataset(&self, path: &Path) -> Result<Dataset> {
        let outcomes = self
            .outcomes
            .as_ref()
            .ok_or_else(|| Error::schema(path, format!("missing outcome column `{OUTCOME_COLUMN}`")))?;
        let rows = self.features.iter().cloned().zip(outcomes.iter().copied());
        Ok(Dataset::from_rows(self.feature_names.len(), rows)?)
    }
}

pub fn read_table(path: &Path) -> Result<FeatureTable> {
    let file = std::fs::File::open(path).map_err(Error::io(path))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file);
    let header = rdr.headers().map_err(|e| Error::from_csv(path, e))?.clone();
    let id_at = header.iter().position(|h| h == ID_COLUMN);
    let y_at = header.iter().position(|h| h == OUTCOME_COLUMN);
    let feature_at: Vec<usize> = (0..header.len()).filter(|&i| Some(i) != id_at && Some(i) != y_at).collect();
    if feature_at.is_empty() {
        return Err(Error::schema(path, "no feature columns"));
    }
    let feature_names: Vec<String> = feature_at.iter().map(|&i| header[i].to_string()).collect();
    let mut table = FeatureTable {
        feature_names,
        ids: Vec::new(),
        features: Vec::new(),
        outcomes: y_at.map(|_| Vec::new()),
    };
    for (index, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::from_csv(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |at: usize| -> Result<f64> {
            let raw = &record[at];
            parse_f64(raw).filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("column `{}`: `{raw}` is not a finite number", &header[at]),
            })
        };
        table.features.push(feature_at.iter().map(|&i| number(i)).collect::<Result<_>>()?);
        if let (Some(at), Some(ys)) = (y_at, table.outcomes.as_mut()) {
            ys.push(number(at)?);
        }
        table.ids.push(id_at.map_or_else(|| index.to_string(), |at| record[at].to_string()));
    }
    Ok(table)
}

/// Writes features plus a trailing `y` column.
pub fn write_dataset(path: &Path, provenance: &str, feature_names: &[String], data: &Dataset) -> Result<()> {
    let mut header: Vec<&str> = feature_names.iter().map(String::as_str).collect();
    header.push(OUTCOME_COLUMN);
    let rows = data.iter().map(|s| s.features.iter().copied().chain([s.outcome]).map(fmt_f64).collect::<Vec<_>>());
    write_file(path, &csv_text(provenance, &header, rows))
}
