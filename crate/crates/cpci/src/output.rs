//! Result CSVs. Every file starts with a `#` block holding the effective
//! configuration.

use std::path::Path;

use cpci_core::experiment::{AggregateRow, ExperimentRecord, MeanSd};

use crate::error::{Error, Result};

pub const RECORD_HEADER: [&str; 12] = [
    "method",
    "scenario",
    "n",
    "rep",
    "alpha",
    "r_hat",
    "coverage",
    "avg_len",
    "prop_zero_in_set",
    "avg_nonzero_len",
    "disconnected",
    "runtime_ms",
];

pub const AGGREGATE_HEADER: [&str; 17] = [
    "method",
    "scenario",
    "n",
    "alpha",
    "reps",
    "r_hat_mean",
    "r_hat_sd",
    "coverage_mean",
    "coverage_sd",
    "avg_len_mean",
    "avg_len_sd",
    "prop_zero_in_set_mean",
    "prop_zero_in_set_sd",
    "avg_nonzero_len_mean",
    "avg_nonzero_len_sd",
    "disconnected_mean",
    "disconnected_sd",
];

/// Shortest round-trip decimal; `inf`, `-inf` and `nan` otherwise.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        t => t.parse().ok(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// `# `-prefixed copy of `body`, one comment per line.
pub fn provenance_block(title: &str, body: &str) -> String {
    let mut out = format!("# {title}\n");
    for line in body.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

pub fn csv_text<I, R>(provenance: &str, header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).expect("writing to memory");
    }
    let body = w.into_inner().expect("writing to memory");
    let mut out = String::from(provenance);
    out.push_str(&String::from_utf8(body).expect("UTF-8 fields"));
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    std::fs::write(path, contents).map_err(Error::io(path))
}

pub fn records_csv(provenance: &str, records: &[ExperimentRecord]) -> String {
    let rows = records.iter().map(|r| {
        vec![
            r.method.id().to_string(),
            r.scenario.clone(),
            r.n.to_string(),
            r.rep.to_string(),
            fmt_f64(r.alpha),
            opt(r.r_hat),
            fmt_f64(r.coverage),
            fmt_f64(r.avg_len),
            fmt_f64(r.prop_zero_in_set),
            opt(r.avg_nonzero_len),
            r.disconnected.to_string(),
            r.runtime_ms.map(|t| t.to_string()).unwrap_or_default(),
        ]
    });
    csv_text(provenance, &RECORD_HEADER, rows)
}

fn mean_sd(m: Option<&MeanSd>) -> [String; 2] {
    [opt(m.map(|m| m.mean)), opt(m.and_then(|m| m.sd))]
}

pub fn aggregate_csv(provenance: &str, rows: &[AggregateRow]) -> String {
    let rows = rows.iter().map(|a| {
        let mut row = vec![a.method.id().to_string(), a.scenario.clone(), a.n.to_string(), fmt_f64(a.alpha), a.reps.to_string()];
        for m in [
            a.r_hat.as_ref(),
            Some(&a.coverage),
            Some(&a.avg_len),
            Some(&a.prop_zero_in_set),
            a.avg_nonzero_len.as_ref(),
            Some(&a.disconnected),
        ] {
            row.extend(mean_sd(m));
        }
        row
    });
    csv_text(provenance, &AGGREGATE_HEADER, rows)
}

pub fn write_records(path: &Path, provenance: &str, records: &[ExperimentRecord]) -> Result<()> {
    write_file(path, &records_csv(provenance, records))
}

pub fn write_aggregate(path: &Path, provenance: &str, rows: &[AggregateRow]) -> Result<()> {
    write_file(path, &aggregate_csv(provenance, rows))
}

/// Leading `#` lines of a file with the `# ` prefix removed.
pub fn read_comment_block(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    let mut out = String::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.strip_prefix('#').unwrap_or(line);
        out.push_str(body.strip_prefix(' ').unwrap_or(body));
        out.push('\n');
    }
    Ok(out)
}

/// One aggregate row as read back for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatePoint {
    pub method: String,
    pub scenario: String,
    pub n: usize,
    pub coverage: Option<f64>,
    pub avg_len: Option<f64>,
    pub prop_zero_in_set: Option<f64>,
    pub avg_nonzero_len: Option<f64>,
}

impl AggregatePoint {
    pub fn from_row(row: &AggregateRow) -> Self {
        Self {
            method: row.method.id().to_string(),
            scenario: row.scenario.clone(),
            n: row.n,
            coverage: Some(row.coverage.mean),
            avg_len: Some(row.avg_len.mean),
            prop_zero_in_set: Some(row.prop_zero_in_set.mean),
            avg_nonzero_len: row.avg_nonzero_len.map(|m| m.mean),
        }
    }
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregatePoint>> {
    let file = std::fs::File::open(path).map_err(Error::io(path))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let header = rdr.headers().map_err(|e| Error::from_csv(path, e))?.clone();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::schema(path, format!("not an aggregate results file: missing column `{name}`")))
    };
    let [method, scenario, n, coverage, avg_len, prop_zero, nonzero] = [
        "method",
        "scenario",
        "n",
        "coverage_mean",
        "avg_len_mean",
        "prop_zero_in_set_mean",
        "avg_nonzero_len_mean",
    ]
    .map(column);
    let (method, scenario, n) = (method?, scenario?, n?);
    let (coverage, avg_len, prop_zero, nonzero) = (coverage?, avg_len?, prop_zero?, nonzero?);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::from_csv(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse { path: path.to_path_buf(), line, message };
        let number = |at: usize| -> Result<Option<f64>> {
            let raw = record.get(at).unwrap_or("").trim();
            if raw.is_empty() {
                return Ok(None);
            }
            parse_f64(raw).map(Some).ok_or_else(|| bad(format!("`{raw}` is not a number")))
        };
        out.push(AggregatePoint {
            method: record.get(method).unwrap_or("").to_string(),
            scenario: record.get(scenario).unwrap_or("").to_string(),
            n: record.get(n).unwrap_or("").trim().parse().map_err(|_| bad("`n` is not an integer".into()))?,
            coverage: number(coverage)?,
            avg_len: number(avg_len)?,
            prop_zero_in_set: number(prop_zero)?,
            avg_nonzero_len: number(nonzero)?,
        });
    }
    Ok(out)
}
