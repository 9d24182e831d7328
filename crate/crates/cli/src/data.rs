//! CSV ingestion and export, and the seeded train/test splitter.

use std::fs::File;
use std::path::Path;

use ghostvar_core::linalg::RngState;
use ghostvar_core::synthetic::generate;
use ghostvar_core::{Dataset, Matrix, ScenarioSpec, SplitSample};
use serde::Serialize;

use crate::error::{CliError, CliResult, StageContext};

/// Reads a numeric CSV with a header row. Every column except `response`
/// becomes a feature, in file order.
pub fn ingest_csv(path: &Path, response: &str) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = match reader.headers() {
        Ok(h) => h.iter().map(|s| s.trim().to_string()).collect(),
        Err(e) => return Err(CliError::Data(format!("{}: {e}", path.display()))),
    };
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(CliError::EmptyFile(path.to_path_buf()));
    }
    let resp = header
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| CliError::MissingResponseColumn(response.to_string()))?;

    let width = header.len();
    let mut feats = Vec::new();
    let mut y = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
        if rec.len() != width {
            return Err(CliError::Data(format!("row {row}: {} fields, header has {width}", rec.len())));
        }
        for (j, cell) in rec.iter().enumerate() {
            let value = parse_cell(cell).ok_or_else(|| CliError::ParseError {
                row,
                col: j + 1,
                column: header[j].clone(),
                value: cell.to_string(),
            })?;
            if j == resp {
                y.push(value);
            } else {
                feats.push(value);
            }
        }
    }
    if y.is_empty() {
        return Err(CliError::EmptyFile(path.to_path_buf()));
    }
    let names: Vec<String> = header.iter().enumerate().filter(|&(j, _)| j != resp).map(|(_, h)| h.clone()).collect();
    let x = Matrix::from_vec(y.len(), width - 1, feats).map_err(|e| CliError::Data(e.to_string()))?;
    Dataset::new(names, x, response, y).map_err(|e| CliError::Data(e.to_string()))
}

fn parse_cell(cell: &str) -> Option<f64> {
    let v: f64 = cell.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Writes features then the response, with shortest round-trip formatting.
pub fn write_csv(path: &Path, data: &Dataset) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    let mut header = data.names.clone();
    header.push(data.response_name.clone());
    w.write_record(&header).map_err(|e| CliError::io(path, e))?;
    for i in 0..data.n() {
        let rec: Vec<String> = data
            .x
            .row(i)
            .iter()
            .chain(std::iter::once(&data.y[i]))
            .map(|v| format!("{v:?}"))
            .collect();
        w.write_record(&rec).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Seeded uniform shuffle, then the first `round(fraction * n)` rows train.
pub fn split(data: &Dataset, fraction: f64, seed: u64) -> CliResult<SplitSample> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CliError::Config(format!("split fraction {fraction} not in (0, 1)")));
    }
    let n1 = (fraction * data.n() as f64).round() as usize;
    split_sizes(data, n1, data.n().saturating_sub(n1), seed)
}

/// Seeded shuffle, then `n1` training rows followed by `n2` test rows.
pub fn split_sizes(data: &Dataset, n1: usize, n2: usize, seed: u64) -> CliResult<SplitSample> {
    let (train, test) = split_indices(data.n(), n1, n2, data.p(), seed)?;
    SplitSample::new(data.select_rows(&train), data.select_rows(&test)).map_err(|e| CliError::Data(e.to_string()))
}

/// Row indices of the train and test parts.
pub fn split_indices(n: usize, n1: usize, n2: usize, p: usize, seed: u64) -> CliResult<(Vec<usize>, Vec<usize>)> {
    if n1.saturating_add(n2) > n {
        return Err(CliError::TooFewRows(format!("{n1} + {n2} rows requested, {n} available")));
    }
    if n1 < p + 2 || n2 < p + 2 {
        return Err(CliError::TooFewRows(format!(
            "train ({n1}) and test ({n2}) need at least p + 2 = {} rows each",
            p + 2
        )));
    }
    let mut rows = RngState::stream(seed, 0).permutation(n);
    let test = rows[n1..n1 + n2].to_vec();
    rows.truncate(n1);
    Ok((rows, test))
}

/// Writes `train.csv`, `test.csv` and `truth.json` for a synthetic design.
pub fn export_scenario(spec: &ScenarioSpec, dir: &Path) -> CliResult<()> {
    #[derive(Serialize)]
    struct Truth<'a> {
        spec: &'a ScenarioSpec,
        truth: &'a ghostvar_core::synthetic::GroundTruth,
        #[serde(skip_serializing_if = "Option::is_none")]
        oracle_basis: Option<&'a ghostvar_core::BasisSpec>,
    }
    let data = generate(spec).stage("scenario")?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_csv(&dir.join("train.csv"), &data.split.train)?;
    write_csv(&dir.join("test.csv"), &data.split.test)?;
    let truth = Truth { spec, truth: &data.truth, oracle_basis: data.oracle_basis.as_ref() };
    let path = dir.join("truth.json");
    let json = serde_json::to_string_pretty(&truth).expect("truth serializes");
    std::fs::write(&path, json).map_err(|e| CliError::io(&path, e))
}
