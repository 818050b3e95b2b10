use std::path::Path;
use std::process::{Command, Output};

use cpci::output::fmt_f64;
use cpci::persist::{CalibrationFile, VERSION};
use cpci::table::read_table;
use cpci::{runner, RunConfig};
use cpci_core::synth::{generate, ScenarioKind, ScenarioSpec};
use cpci_core::{PredictionSet, Purpose, SeedSpec};

fn cpci(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpci")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Unscaled features so the stored standardizer matters.
fn write_fixtures(dir: &Path) {
    let spec = ScenarioSpec { n: 1200, n_test: 200, ..ScenarioSpec::new(ScenarioKind::Linear, 0) };
    let data = generate(&spec, &mut SeedSpec::new(11).stream(0, Purpose::Generate)).unwrap();
    let scale = [1.0, 10.0, 0.5, 100.0];
    let shift = [0.0, 50.0, -3.0, 1000.0];
    let row = |x: &[f64]| x.iter().enumerate().map(|(j, v)| fmt_f64(v * scale[j] + shift[j])).collect::<Vec<_>>().join(",");
    let mut train = String::from("# synthetic\nx1,x2,x3,x4,y\n");
    let mut features = String::from("id,x1,x2,x3,x4\n");
    for (i, s) in data.iter().enumerate() {
        if i < spec.n {
            train.push_str(&format!("{},{}\n", row(&s.features), fmt_f64(s.outcome)));
        } else {
            features.push_str(&format!("p{i},{}\n", row(&s.features)));
        }
    }
    std::fs::write(dir.join("train.csv"), train).unwrap();
    std::fs::write(dir.join("new.csv"), features).unwrap();
}

fn fit_and_predict(dir: &Path) -> String {
    let o = cpci(&["fit", "--train", "train.csv", "--out", "cal.json", "--seed", "5"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = cpci(&["predict", "--calibration", "cal.json", "--features", "new.csv", "--out", "pred.csv"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::read_to_string(dir.join("pred.csv")).unwrap()
}

#[test]
fn round_trip_reproduces_in_process_predictions() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let text = fit_and_predict(dir.path());

    // Same fit in process.
    let cfg = RunConfig { seed: 5, out: "cal.json".into(), ..RunConfig::default() };
    let table = read_table(&dir.path().join("train.csv")).unwrap();
    let data = table.to_dataset(Path::new("train.csv")).unwrap();
    let in_process = runner::fit(&cfg, table.feature_names.clone(), &data).unwrap();
    let loaded = CalibrationFile::load(&dir.path().join("cal.json")).unwrap();
    assert_eq!(loaded, in_process);

    let new = read_table(&dir.path().join("new.csv")).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "id,set_kind,lo,hi");
    assert_eq!(lines.len() - 1, new.len());
    let (mut zeros, mut intervals) = (0, 0);
    for ((line, id), x) in lines[1..].iter().zip(&new.ids).zip(&new.features) {
        let expected = match in_process.predict(x) {
            PredictionSet::ZeroSingleton => {
                zeros += 1;
                format!("{id},zero,,")
            }
            PredictionSet::Interval { lo, hi } => {
                intervals += 1;
                format!("{id},interval,{},{}", fmt_f64(lo), fmt_f64(hi))
            }
            other => panic!("unexpected set {other:?}"),
        };
        assert_eq!(*line, expected);
    }
    assert!(zeros > 0 && intervals > 0, "{zeros} zero rows, {intervals} interval rows");

    // Raw features go through the stored standardizer.
    let z = loaded.standardizer.transform(&new.features[0]);
    assert_eq!(loaded.calibration.predict(&z), in_process.predict(&new.features[0]));
    assert_eq!(loaded.version, VERSION);
}

#[test]
fn refit_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let first = fit_and_predict(dir.path());
    let cal = std::fs::read(dir.path().join("cal.json")).unwrap();
    assert_eq!(fit_and_predict(dir.path()), first);
    assert_eq!(std::fs::read(dir.path().join("cal.json")).unwrap(), cal);
}

#[test]
fn version_mismatch_and_corruption_are_clean_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    fit_and_predict(dir.path());
    let good = std::fs::read_to_string(dir.path().join("cal.json")).unwrap();
    let predict = |file: &str| cpci(&["predict", "--calibration", file, "--features", "new.csv"], dir.path());

    let bumped = good.replacen("\"version\": 1", "\"version\": 2", 1);
    assert_ne!(bumped, good);
    std::fs::write(dir.path().join("v2.json"), bumped).unwrap();
    let o = predict("v2.json");
    assert!(!o.status.success());
    assert!(stderr(&o).contains("version 2 is not supported (expected 1)"), "{}", stderr(&o));

    std::fs::write(dir.path().join("cut.json"), &good[..good.len() / 2]).unwrap();
    let o = predict("cut.json");
    assert!(!o.status.success());
    assert!(stderr(&o).contains("corrupted calibration file"), "{}", stderr(&o));

    std::fs::write(dir.path().join("other.json"), "{\"version\": 1}").unwrap();
    let o = predict("other.json");
    assert!(!o.status.success());
    assert!(stderr(&o).contains("format"), "{}", stderr(&o));

    let broken = good.replacen("\"q_r\"", "\"q_radius\"", 1);
    std::fs::write(dir.path().join("broken.json"), broken).unwrap();
    let o = predict("broken.json");
    assert!(!o.status.success());
    assert!(stderr(&o).contains("corrupted calibration file"), "{}", stderr(&o));
}

#[test]
fn feature_schema_must_match() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    fit_and_predict(dir.path());
    std::fs::write(dir.path().join("wrong.csv"), "x1,x2,x4,x3\n0,0,0,0\n").unwrap();
    let o = cpci(&["predict", "--calibration", "cal.json", "--features", "wrong.csv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("do not match"), "{}", stderr(&o));

    std::fs::write(dir.path().join("bad.csv"), "x1,x2,x3,x4\n0,0,zero,0\n").unwrap();
    let o = cpci(&["predict", "--calibration", "cal.json", "--features", "bad.csv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("bad.csv:2"), "{}", stderr(&o));
}

#[test]
fn fit_requires_an_outcome_column() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let o = cpci(&["fit", "--train", "new.csv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("missing outcome column `y`"), "{}", stderr(&o));
}
