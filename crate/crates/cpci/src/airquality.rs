//! Reader for the UCI Air Quality file and the CO exceedance outcome.
//!
//! The distribution format is `;`-separated with a decimal comma, two
//! trailing empty columns, blank `;;;;` rows at the end and `-200` marking
//! a missing value.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use cpci_core::quantile::empirical_quantile;
use cpci_core::Dataset;

use crate::error::{Error, Result};

pub const CO_COLUMN: &str = "CO(GT)";

/// Every numeric column of the distribution file, in file order.
pub const NUMERIC_COLUMNS: [&str; 13] = [
    "CO(GT)",
    "PT08.S1(CO)",
    "NMHC(GT)",
    "C6H6(GT)",
    "PT08.S2(NMHC)",
    "NOx(GT)",
    "PT08.S3(NOx)",
    "NO2(GT)",
    "PT08.S4(NO2)",
    "PT08.S5(O3)",
    "T",
    "RH",
    "AH",
];

/// Sensor responses and meteorology. The reference-analyser columns
/// (`*(GT)`) other than the outcome are left out.
pub const FEATURE_COLUMNS: [&str; 8] =
    ["PT08.S1(CO)", "PT08.S2(NMHC)", "PT08.S3(NOx)", "PT08.S4(NO2)", "PT08.S5(O3)", "T", "RH", "AH"];

pub const HOUR_FEATURES: [&str; 2] = ["hour_sin", "hour_cos"];

pub const MISSING_SENTINEL: f64 = -200.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AirQualityRow {
    /// 1-based line in the source file.
    pub line: u64,
    pub date: String,
    pub time: String,
    /// Indexed like [`NUMERIC_COLUMNS`]; `None` is missing.
    pub values: [Option<f64>; 13],
}

impl AirQualityRow {
    pub fn get(&self, column: &str) -> Option<f64> {
        NUMERIC_COLUMNS.iter().position(|c| *c == column).and_then(|i| self.values[i])
    }

    /// Hour of day from `HH.MM.SS` (or `HH:MM:SS`).
    pub fn hour(&self) -> Option<u32> {
        let head = self.time.trim().split(['.', ':']).next()?;
        head.parse().ok().filter(|h| *h < 24)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AirQualityTable {
    pub rows: Vec<AirQualityRow>,
}

pub fn parse_airquality(path: &Path) -> Result<AirQualityTable> {
    let file = File::open(path).map_err(Error::io(path))?;
    parse_reader(file, path)
}

/// `source` only labels error messages.
pub fn parse_reader<R: Read>(reader: R, source: &Path) -> Result<AirQualityTable> {
    let mut csv = csv::ReaderBuilder::new().delimiter(b';').has_headers(false).flexible(true).from_reader(reader);
    let mut records = csv.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| Error::from_csv(source, e))?,
        None => return Err(Error::schema(source, "file is empty")),
    };
    let names: Vec<String> =
        header.iter().map(|f| f.trim_start_matches('\u{feff}').trim().to_string()).collect();
    let non_empty: Vec<&String> = names.iter().filter(|n| !n.is_empty()).collect();
    if non_empty.len() == 1 {
        if let Some(found) = [',', '\t'].into_iter().find(|d| non_empty[0].contains(*d)) {
            return Err(Error::Delimiter { path: source.to_path_buf(), found });
        }
    }
    let find = |name: &str| {
        names.iter().position(|n| n == name).ok_or_else(|| Error::Parse {
            path: source.to_path_buf(),
            line: 1,
            message: format!("missing column `{name}`"),
        })
    };
    let date_at = find("Date")?;
    let time_at = find("Time")?;
    let numeric_at: Vec<usize> = NUMERIC_COLUMNS.iter().map(|c| find(c)).collect::<Result<_>>()?;
    let needed = numeric_at.iter().copied().chain([date_at, time_at]).max().unwrap_or(0) + 1;

    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| Error::from_csv(source, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let parse_err = |message: String| Error::Parse { path: source.to_path_buf(), line, message };
        if record.len() < needed {
            return Err(parse_err(format!("expected at least {needed} fields, found {}", record.len())));
        }
        let mut values = [None; 13];
        for (slot, (&at, name)) in values.iter_mut().zip(numeric_at.iter().zip(NUMERIC_COLUMNS)) {
            *slot = parse_value(&record[at]).map_err(|raw| parse_err(format!("column `{name}`: `{raw}` is not a number")))?;
        }
        rows.push(AirQualityRow {
            line,
            date: record[date_at].trim().to_string(),
            time: record[time_at].trim().to_string(),
            values,
        });
    }
    Ok(AirQualityTable { rows })
}

/// Decimal comma accepted; empty or `-200` is missing.
fn parse_value(raw: &str) -> std::result::Result<Option<f64>, String> {
    let t = raw.trim();
    if t.is_empty() {
        return Ok(None);
    }
    let v: f64 = t.replace(',', ".").parse().map_err(|_| t.to_string())?;
    if !v.is_finite() {
        return Err(t.to_string());
    }
    Ok((v != MISSING_SENTINEL).then_some(v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirQualityConfig {
    /// Share of cleaned CO readings at or below the tolerance, in `(0, 1)`.
    pub tolerance_quantile: f64,
    pub hour_features: bool,
}

impl Default for AirQualityConfig {
    fn default() -> Self {
        Self { tolerance_quantile: 0.7, hour_features: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeData {
    pub dataset: Dataset,
    pub feature_names: Vec<String>,
    /// The tolerance `τ` in CO units.
    pub tolerance: f64,
    /// Rows removed for missing values.
    pub dropped: usize,
}

/// Drops incomplete rows and thresholds CO at its `tolerance_quantile`:
/// `y = CO − τ` above `τ`, exactly `0` otherwise.
pub fn build_outcome(table: &AirQualityTable, config: &AirQualityConfig) -> Result<OutcomeData> {
    let q = config.tolerance_quantile;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Config(format!("tolerance quantile {q} must lie strictly inside (0, 1)")));
    }
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let Some(co) = row.get(CO_COLUMN) else { continue };
        let Some(mut x) = FEATURE_COLUMNS.iter().map(|c| row.get(c)).collect::<Option<Vec<f64>>>() else {
            continue;
        };
        if config.hour_features {
            let Some(hour) = row.hour() else { continue };
            let angle = std::f64::consts::TAU * f64::from(hour) / 24.0;
            x.extend([angle.sin(), angle.cos()]);
        }
        kept.push((x, co));
    }
    if kept.is_empty() {
        return Err(Error::Data("every Air Quality row was dropped during cleaning".into()));
    }
    let dropped = table.rows.len() - kept.len();
    let co: Vec<f64> = kept.iter().map(|(_, c)| *c).collect();
    let tolerance = empirical_quantile(&co, q)?;
    let mut feature_names: Vec<String> = FEATURE_COLUMNS.iter().map(|s| s.to_string()).collect();
    if config.hour_features {
        feature_names.extend(HOUR_FEATURES.iter().map(|s| s.to_string()));
    }
    let dim = feature_names.len();
    let rows = kept.into_iter().map(|(x, c)| (x, if c > tolerance { c - tolerance } else { 0.0 }));
    Ok(OutcomeData { dataset: Dataset::from_rows(dim, rows)?, feature_names, tolerance, dropped })
}

/// Default location of a user-supplied copy, for tools that look for one.
pub fn env_path() -> Option<PathBuf> {
    std::env::var_os("CPCI_AIRQUALITY_CSV").map(PathBuf::from).filter(|p| !p.as_os_str().is_empty())
}
