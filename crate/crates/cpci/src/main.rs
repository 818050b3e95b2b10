use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use cpci::airquality::{build_outcome, env_path, parse_airquality, AirQualityConfig};
use cpci::config::{sibling, ClassifierChoice, RegressorChoice};
use cpci::output::{
    csv_text, fmt_f64, provenance_block, read_aggregate, read_comment_block, write_aggregate, write_file, write_records,
    AggregatePoint,
};
use cpci::persist::CalibrationFile;
use cpci::table::{read_table, write_dataset};
use cpci::{plot, runner, Error, Result, RunConfig};
use cpci_core::cpci::Objective;
use cpci_core::experiment::{aggregate, AggregateRow, ExperimentRecord};
use cpci_core::synth::ScenarioKind;
use cpci_core::{Method, PredictionSet};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "cpci", version, about = "Conformal prediction sets for zero-inflated outcomes")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthetic replication sweep.
    Simulate(RunArgs),
    /// Repeated random splits of the UCI Air Quality data.
    Airquality {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the cleaned table (one file per tolerance when several are given).
        #[arg(long)]
        export_cleaned: Option<PathBuf>,
    },
    /// Fit and calibrate on a training CSV (`y` column plus features).
    Fit {
        #[arg(long)]
        train: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Prediction sets for a feature CSV from a calibration file.
    Predict {
        #[arg(long)]
        calibration: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Four-panel SVG from an aggregate results CSV.
    Plot {
        input: PathBuf,
        /// Defaults to the input path with an `.svg` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_objective(s: &str) -> std::result::Result<Objective, String> {
    match s {
        "overall_length" | "overall" => Ok(Objective::OverallLength),
        "nonzero_length" | "nonzero" => Ok(Objective::NonzeroLength),
        _ => Err("expected `overall_length` or `nonzero_length`".into()),
    }
}

/// Flags mirror the config keys and win over the `--config` file.
#[derive(Args, Default)]
struct RunArgs {
    /// TOML file with any of the keys below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<ScenarioKind>,
    /// Sample sizes before the test set (comma-separated).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    /// Nominal coverage level.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    zero_frac: Option<f64>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    /// Method ids (comma-separated), e.g. CPCI,VCI,CLASS-COND.
    #[arg(long = "method", value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long, value_enum)]
    classifier: Option<ClassifierChoice>,
    #[arg(long, value_enum)]
    regressor: Option<RegressorChoice>,
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    nonzero_only: Option<bool>,
    #[arg(long, value_parser = parse_objective)]
    objective: Option<Objective>,
    #[arg(long)]
    c_const: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    beta_adjust: Option<bool>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    clip_at_zero: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    break_ties: Option<bool>,
    #[arg(long, value_delimiter = ',')]
    tolerance_quantile: Option<Vec<f64>>,
    #[arg(long)]
    splits: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    hour_features: Option<bool>,
    /// Air Quality CSV (falls back to $CPCI_AIRQUALITY_CSV).
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    aggregate_out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    timing: Option<bool>,
    #[arg(long)]
    threads: Option<usize>,
}

macro_rules! overlay {
    ($cfg:ident, $args:ident; $($field:ident),*) => {
        $(if let Some(v) = $args.$field.clone() { $cfg.$field = v; })*
    };
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        overlay!(cfg, self; scenario, n, reps, alpha, zero_frac, noise_sd, dim, n_test, methods, objective,
            c_const, beta_adjust, grid_step, clip_at_zero, break_ties, tolerance_quantile, splits,
            hour_features, seed, out, timing);
        macro_rules! some {
            ($($field:ident),*) => { $(if self.$field.is_some() { cfg.$field = self.$field.clone(); })* };
        }
        some!(classifier, regressor, knn_k, nonzero_only, data, aggregate_out, svg, threads);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn header(command: &str, cfg: &RunConfig) -> String {
    provenance_block(&format!("cpci {VERSION} {command}"), &cfg.to_toml())
}

fn summarize(rows: &[AggregateRow]) {
    println!("{:<18} {:<22} {:>6} {:>9} {:>9} {:>9}", "method", "scenario", "n", "coverage", "avg_len", "r_hat");
    for r in rows {
        let r_hat = r.r_hat.map_or_else(String::new, |m| format!("{:.3}", m.mean));
        println!(
            "{:<18} {:<22} {:>6} {:>9.4} {:>9.4} {:>9}",
            r.method.id(),
            r.scenario,
            r.n,
            r.coverage.mean,
            r.avg_len.mean,
            r_hat
        );
    }
}

fn write_results(command: &str, cfg: &RunConfig, records: &[ExperimentRecord]) -> Result<()> {
    let prov = header(command, cfg);
    write_records(&cfg.out, &prov, records)?;
    let rows = aggregate(records);
    write_aggregate(&cfg.aggregate_path(), &prov, &rows)?;
    if let Some(svg) = &cfg.svg {
        let points: Vec<AggregatePoint> = rows.iter().map(AggregatePoint::from_row).collect();
        let text = plot::render_svg(&points, &format!("cpci {VERSION} {command}\n{}", cfg.to_toml()));
        write_file(svg, &text)?;
    }
    summarize(&rows);
    log::info!("wrote {} and {}", cfg.out.display(), cfg.aggregate_path().display());
    Ok(())
}

fn simulate(args: &RunArgs) -> Result<()> {
    let mut cfg = args.resolve()?;
    cfg.methods = cfg.methods_or(&Method::ALL);
    let records = runner::simulate(&cfg)?;
    write_results("simulate", &cfg, &records)
}

fn airquality(args: &RunArgs, export: Option<&Path>) -> Result<()> {
    let mut cfg = args.resolve()?;
    if args.out.is_none() && args.config.is_none() {
        cfg.out = PathBuf::from("airquality.csv");
    }
    cfg.methods = cfg.methods_or(&Method::STANDARD);
    cfg.data = cfg.data.clone().or_else(env_path);
    let Some(path) = cfg.data.clone() else {
        return Err(Error::Config("no dataset: pass --data or set CPCI_AIRQUALITY_CSV".into()));
    };
    let table = parse_airquality(&path)?;
    log::info!("{}: {} rows", path.display(), table.rows.len());
    if let Some(export) = export {
        for &q in &cfg.tolerance_quantile {
            let data = build_outcome(&table, &AirQualityConfig { tolerance_quantile: q, hour_features: cfg.hour_features })?;
            let target = if cfg.tolerance_quantile.len() == 1 { export.to_path_buf() } else { sibling(export, &format!("_q{q}.csv")) };
            let note = format!("source = {}\ntolerance_quantile = {q}\ntolerance = {}\ndropped_rows = {}", path.display(), data.tolerance, data.dropped);
            write_dataset(&target, &provenance_block(&format!("cpci {VERSION} airquality cleaned"), &note), &data.feature_names, &data.dataset)?;
        }
    }
    let records = runner::airquality(&cfg, &table)?;
    write_results("airquality", &cfg, &records)
}

fn fit(train: &Path, args: &RunArgs) -> Result<()> {
    let mut cfg = args.resolve()?;
    if args.out.is_none() && args.config.is_none() {
        cfg.out = PathBuf::from("calibration.json");
    }
    let table = read_table(train)?;
    let data = table.to_dataset(train)?;
    let file = runner::fit(&cfg, table.feature_names.clone(), &data)?;
    file.save(&cfg.out)?;
    let c = &file.calibration;
    println!(
        "r_hat = {}  alpha_r = {}  beta_hat = {}  gamma = {}  q_r = {}",
        c.r_hat, c.alpha_r, c.beta_hat, c.gamma, c.q_r
    );
    log::info!("wrote {}", cfg.out.display());
    Ok(())
}

fn predict(calibration: &Path, features: &Path, out: Option<&Path>) -> Result<()> {
    let file = CalibrationFile::load(calibration)?;
    let table = read_table(features)?;
    if table.feature_names != file.feature_names {
        return Err(Error::Schema {
            path: features.to_path_buf(),
            message: format!(
                "feature columns [{}] do not match the calibration's [{}]",
                table.feature_names.join(", "),
                file.feature_names.join(", ")
            ),
        });
    }
    let sets = runner::predict(&file, &table.features);
    let note = format!("calibration = {}\nseed = {}", calibration.display(), file.config.seed);
    let prov = provenance_block(&format!("cpci {VERSION} predict"), &note);
    let rows = table.ids.iter().zip(&sets).map(|(id, set)| {
        let (kind, lo, hi) = match *set {
            PredictionSet::ZeroSingleton => ("zero", String::new(), String::new()),
            PredictionSet::Interval { lo, hi } => ("interval", fmt_f64(lo), fmt_f64(hi)),
            _ => ("unbounded", String::new(), String::new()),
        };
        vec![id.clone(), kind.to_string(), lo, hi]
    });
    let text = csv_text(&prov, &["id", "set_kind", "lo", "hi"], rows);
    match out {
        Some(path) => write_file(path, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

fn plot_cmd(input: &Path, out: Option<&Path>) -> Result<()> {
    let points = read_aggregate(input)?;
    let comment = read_comment_block(input)?;
    let out = out.map_or_else(|| input.with_extension("svg"), Path::to_path_buf);
    write_file(&out, &plot::render_svg(&points, &comment))?;
    log::info!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    let result = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Airquality { run, export_cleaned } => airquality(run, export_cleaned.as_deref()),
        Command::Fit { train, run } => fit(train, run),
        Command::Predict { calibration, features, out } => predict(calibration, features, out.as_deref()),
        Command::Plot { input, out } => plot_cmd(input, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
