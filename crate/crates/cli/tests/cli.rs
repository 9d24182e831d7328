use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use ghostvar_cli::config::{DataSource, Method, ModelSpec, RunConfig, SplitPolicy};
use ghostvar_cli::data::split_indices;
use ghostvar_cli::{analyze, export_scenario, ingest_csv, run_analysis, split, write_csv, CliError, ReportBundle};
use ghostvar_core::{Dataset, Matrix, MlpConfig, ReplacementMethod, Scenario, ScenarioSpec};
use proptest::prelude::*;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ghostvar"))
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(json: &str) {
    let v: Value = serde_json::from_str(json).unwrap();
    let errors: Vec<String> = schema().iter_errors(&v).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "schema errors: {errors:#?}");
}

fn scenario_config(id: Scenario, methods: Vec<Method>) -> RunConfig {
    RunConfig::new(DataSource::Scenario { id, n1: None, n2: None }, ModelSpec::Linear, methods, 7)
}

fn all_methods() -> Vec<Method> {
    vec![Method::Ghost, Method::Permutation, Method::Omission]
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn ingest_small_file() {
    let dir = tempfile::tempdir().unwrap();
    let body = "a,b,y,c\n1,2,3,4\n5,6,7,8\n9,10,11,12\n13,14,15,16\n17,18,19,20\n";
    let d = ingest_csv(&write(dir.path(), "d.csv", body), "y").unwrap();
    assert_eq!(d.x.shape(), (5, 3));
    assert_eq!(d.names, ["a", "b", "c"]);
    assert_eq!(d.y, [3.0, 7.0, 11.0, 15.0, 19.0]);
    assert_eq!(d.x.row(1), [5.0, 6.0, 8.0]);
}

#[test]
fn ingest_errors() {
    let dir = tempfile::tempdir().unwrap();
    let na = write(dir.path(), "na.csv", "a,b,y\n1,2,3\n4,NA,6\n");
    match ingest_csv(&na, "y") {
        Err(CliError::ParseError { row, col, column, value }) => {
            assert_eq!((row, col, column.as_str(), value.as_str()), (2, 2, "b", "NA"));
        }
        other => panic!("{other:?}"),
    }
    let p = write(dir.path(), "ok.csv", "a,b\n1,2\n");
    assert!(matches!(ingest_csv(&p, "y"), Err(CliError::MissingResponseColumn(_))));
    let p = write(dir.path(), "hdr.csv", "a,y\n");
    assert!(matches!(ingest_csv(&p, "y"), Err(CliError::EmptyFile(_))));
    let p = write(dir.path(), "empty.csv", "");
    assert!(matches!(ingest_csv(&p, "y"), Err(CliError::EmptyFile(_)) | Err(CliError::MissingResponseColumn(_))));
    let p = write(dir.path(), "blank.csv", "a,y\n1,\n");
    assert!(matches!(ingest_csv(&p, "y"), Err(CliError::ParseError { row: 1, col: 2, .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csv_round_trip_is_bit_exact(
        cells in prop::collection::vec(
            prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 12..60)
    ) {
        let rows = cells.len() / 4;
        let x = Matrix::from_fn(rows, 3, |i, j| cells[4 * i + j]);
        let y: Vec<f64> = (0..rows).map(|i| cells[4 * i + 3]).collect();
        let d = Dataset::with_default_names(x, y).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        write_csv(&p, &d).unwrap();
        let back = ingest_csv(&p, "y").unwrap();
        prop_assert_eq!(back.names, d.names);
        for (a, b) in back.x.as_slice().iter().zip(d.x.as_slice()).chain(back.y.iter().zip(&d.y)) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn split_is_a_seeded_partition(n in 10usize..300, frac in 0.2f64..0.8, seed in any::<u64>()) {
        let n1 = (frac * n as f64).round() as usize;
        let n2 = n - n1;
        prop_assume!(n1 >= 3 && n2 >= 3);
        let (a, b) = split_indices(n, n1, n2, 1, seed).unwrap();
        let (a2, b2) = split_indices(n, n1, n2, 1, seed).unwrap();
        prop_assert_eq!(&a, &a2);
        prop_assert_eq!(&b, &b2);
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn split_ten_rows() {
    let x = Matrix::from_fn(10, 1, |i, _| i as f64);
    let d = Dataset::with_default_names(x, (0..10).map(|i| i as f64).collect()).unwrap();
    let s = split(&d, 0.7, 3).unwrap();
    assert_eq!((s.train.n(), s.test.n()), (7, 3));
    assert_eq!(split(&d, 0.7, 3).unwrap(), s);
    // rows stay intact
    for i in 0..7 {
        assert_eq!(s.train.x[(i, 0)], s.train.y[i]);
    }
}

#[test]
fn ex1_bundle_matches_reference_values() {
    let b = analyze(&scenario_config(Scenario::Ex1, all_methods())).unwrap();
    let ghost: Vec<f64> = b.report.variables.iter().map(|v| v.ghost.unwrap()).collect();
    for (g, r) in ghost.iter().zip([0.9259, 0.1055, 0.0898]) {
        assert!((g - r).abs() < 0.05, "{ghost:?}");
    }
    let cv = b.report.critical_value.unwrap();
    assert!((cv - 0.0033).abs() < 0.0004);
    assert!(ghost.iter().all(|&g| g > cv));
    let m = b.matrix(ReplacementMethod::Ghost).unwrap();
    assert_eq!(m.components.len(), 2);
    let pc = m.partial_correlations.as_ref().unwrap();
    assert!((pc[1][2].unwrap() - 0.95).abs() < 0.01);
    let tree = &b.cluster.as_ref().unwrap().tree;
    assert_eq!((tree.merges[0].left, tree.merges[0].right), (1, 2));
    assert_valid(&b.to_json());
}

#[test]
fn outputs_are_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = scenario_config(Scenario::Ex1, all_methods());
    c.out_dir = Some(dir.path().join("a"));
    run_analysis(&c).unwrap();
    c.out_dir = Some(dir.path().join("b"));
    run_analysis(&c).unwrap();
    let mut svgs = 0;
    for entry in fs::read_dir(dir.path().join("a")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_owned();
        let a = fs::read(&path).unwrap();
        assert_eq!(a, fs::read(dir.path().join("b").join(&name)).unwrap(), "{name:?} differs");
        if path.extension().is_some_and(|e| e == "svg") {
            let text = String::from_utf8(a).unwrap();
            let doc = roxmltree::Document::parse(&text).unwrap();
            assert_eq!(doc.root_element().tag_name().name(), "svg");
            svgs += 1;
        }
    }
    assert!(svgs >= 5);
    let json = fs::read_to_string(dir.path().join("a/report.json")).unwrap();
    assert_valid(&json);
    // figures do not feed back into the payload
    let parsed: ReportBundle = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed, analyze(&c).unwrap());
}

#[test]
fn other_families_validate() {
    let mut c = scenario_config(Scenario::Ex2, all_methods());
    c.model = ModelSpec::Basis { basis: None };
    let b = analyze(&c).unwrap();
    assert!(b.report.critical_value.is_none());
    assert!(b.matrix(ReplacementMethod::Ghost).unwrap().partial_correlations.is_none());
    assert_valid(&b.to_json());

    let mut c = RunConfig::new(
        DataSource::Scenario { id: Scenario::Ex1, n1: Some(200), n2: Some(100) },
        ModelSpec::Mlp { config: MlpConfig { hidden: 3, epochs: 100, ..MlpConfig::default() } },
        all_methods(),
        3,
    );
    c.split = SplitPolicy::Fraction { train: 0.5 };
    let b = analyze(&c).unwrap();
    assert_eq!(b.report.n1, 200);
    assert_valid(&b.to_json());
}

#[test]
fn external_predictor_matches_in_process_run() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ScenarioSpec { n1: 300, n2: 200, ..ScenarioSpec::new(Scenario::Ex1, 5) };
    export_scenario(&spec, dir.path()).unwrap();
    let source = DataSource::Csv {
        path: dir.path().join("train.csv"),
        test_path: Some(dir.path().join("test.csv")),
        response: "y".into(),
    };
    let methods = vec![Method::Ghost, Method::Permutation];
    let inproc = analyze(&RunConfig::new(source.clone(), ModelSpec::Linear, methods.clone(), 5)).unwrap();

    let train = ingest_csv(&dir.path().join("train.csv"), "y").unwrap();
    let fit = ghostvar_core::predictors::fit_linear(&train).unwrap();
    let c = &fit.ols().coefficients;
    let script = format!(
        "NR > 1 {{ printf \"%.17g\\n\", {:?} + {:?}*$1 + {:?}*$2 + {:?}*$3 }}",
        c[0], c[1], c[2], c[3]
    );
    let model = ModelSpec::External {
        command: vec!["awk".into(), "-F,".into(), script],
        timeout_secs: 30.0,
        max_batch_rows: 100_000,
    };
    let ext = analyze(&RunConfig::new(source, model, methods, 5)).unwrap();
    for (a, b) in inproc.report.variables.iter().zip(&ext.report.variables) {
        assert!((a.ghost.unwrap() - b.ghost.unwrap()).abs() < 1e-9);
        assert!((a.permutation.unwrap() - b.permutation.unwrap()).abs() < 1e-9);
    }
    assert_valid(&ext.to_json());
}

#[test]
fn permutation_only_run_via_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["analyze", "--scenario", "ex1", "--methods", "perm", "--seed", "7", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let json = fs::read_to_string(out.join("report.json")).unwrap();
    assert_valid(&json);
    let v: Value = serde_json::from_str(&json).unwrap();
    for var in v["report"]["variables"].as_array().unwrap() {
        assert!(var.get("permutation").is_some());
        assert!(var.get("ghost").is_none() && var.get("omission").is_none());
    }
    assert!(!out.join("relevance_ghost.svg").exists());
}

#[test]
fn scenario_export_and_csv_analysis_via_binary() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let st = bin()
        .args(["scenario", "--id", "ex1", "--seed", "2", "--n1", "120", "--n2", "80", "--out"])
        .arg(&data)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let train = ingest_csv(&data.join("train.csv"), "y").unwrap();
    assert_eq!(train.x.shape(), (120, 3));
    let truth: Value = serde_json::from_str(&fs::read_to_string(data.join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["truth"]["coefficients"], serde_json::json!([1.0, 1.0, 1.0]));

    let out = dir.path().join("out");
    let st = bin()
        .args(["analyze", "--response", "y", "--methods", "ghost,omission", "--input"])
        .arg(data.join("train.csv"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["report"]["n1"], 84);
    assert_eq!(v["report"]["n2"], 36);
}

fn run_err(args: &[&str]) -> (i32, Value) {
    let out = bin().args(args).output().unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();
    let line = stderr.lines().last().unwrap_or_default();
    (out.status.code().unwrap(), serde_json::from_str(line).unwrap_or(Value::Null))
}

#[test]
fn exit_codes_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let o = o.to_str().unwrap();

    let (code, d) = run_err(&["analyze", "--scenario", "ex1", "--methods", "ghost", "--split", "1.5", "--out", o]);
    assert_eq!((code, d["error"].as_str()), (2, Some("config")));
    let (code, _) = run_err(&["analyze", "--scenario", "ex1", "--methods", "bogus", "--out", o]);
    assert_eq!(code, 2);
    // usage errors from argument parsing
    let out = bin().args(["analyze", "--out", o]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let na = write(dir.path(), "na.csv", "a,b,y\n1,2,3\n4,NA,6\n");
    let (code, d) = run_err(&["analyze", "--input", na.to_str().unwrap(), "--out", o]);
    assert_eq!((code, d["error"].as_str()), (3, Some("parse_error")));

    let mut body = String::from("a,b,y\n");
    for i in 0..40 {
        body.push_str(&format!("{i},{},{}\n", 2 * i, (i * i) % 7));
    }
    let collinear = write(dir.path(), "col.csv", &body);
    let (code, d) = run_err(&["analyze", "--input", collinear.to_str().unwrap(), "--out", o]);
    assert_eq!((code, d["error"].as_str()), (4, Some("rank_deficient")));
    assert_eq!(d["stage"], "fit");

    let (code, d) = run_err(&[
        "analyze", "--scenario", "ex1", "--methods", "ghost", "--predictor-cmd", "/nonexistent/model --serve", "--out", o,
    ]);
    assert_eq!((code, d["error"].as_str()), (2, Some("spawn_failed")));
}
