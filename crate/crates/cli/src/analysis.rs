//! Orchestration of one relevance analysis run.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ghostvar_core::linalg::RngState;
use ghostvar_core::predictors::{
    external_predictor, BasisFactory, LinearFactory, MlpFactory,
};
use ghostvar_core::relevance::{
    critical_value, estimate_mspe, fit_ghosts, relevance_ghost, relevance_omission, relevance_permutation,
    RelevanceValues,
};
use ghostvar_core::relmatrix::{build_a, eigen_report, partial_corr_linear, relevance_matrix, Replacement};
use ghostvar_core::synthetic::generate;
use ghostvar_core::{
    cluster_variables, BasisSpec, ClusterTree, EigenComponent, Error, ExternalPredictorConfig, Matrix,
    ModelFactory, ModelFamily, PermutationPlan, PredictionFunction, RelevanceMatrix, RelevanceReport,
    ReplacementMethod, ScenarioSpec, SplitSample,
};
use serde::{Deserialize, Serialize};

use crate::config::{DataSource, Method, ModelSpec, RunConfig, SplitPolicy};
use crate::data::{ingest_csv, split, split_sizes};
use crate::error::{CliError, CliResult, StageContext};
use crate::svg::BarChart;

/// Version of the JSON layout in `schema/report.schema.json`.
pub const SCHEMA_VERSION: &str = "1.0.0";

/// RNG stream used for permutation plans.
const PERMUTATION_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub ghostvar_core: String,
    pub ghostvar_cli: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub config_hash: String,
    pub config: RunConfig,
    pub versions: Versions,
    pub model_family: ModelFamily,
    pub hyperparameters: BTreeMap<String, String>,
    pub response: String,
    pub variables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub method: ReplacementMethod,
    pub v: Vec<Vec<f64>>,
    /// Covariance of the columns of `A`.
    pub centered: Vec<Vec<f64>>,
    pub total_relevance: f64,
    pub eigenvalues: Vec<f64>,
    pub explained: Vec<f64>,
    /// Eigenpairs above the configured threshold.
    pub components: Vec<Component>,
    /// Linear models only; `null` where a variable has zero relevance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial_correlations: Option<Vec<Vec<Option<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub index: usize,
    pub eigenvalue: f64,
    pub explained: f64,
    pub vector: Vec<f64>,
}

impl From<EigenComponent> for Component {
    fn from(c: EigenComponent) -> Self {
        Self { index: c.index, eigenvalue: c.eigenvalue, explained: c.explained, vector: c.vector }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    /// Relevance matrix the tree was built from.
    pub method: ReplacementMethod,
    pub tree: ClusterTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: String,
    pub metadata: RunMetadata,
    pub report: RelevanceReport,
    pub matrices: Vec<MatrixSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<ClusterSummary>,
    /// Non-fatal conditions met during the run.
    pub notes: Vec<String>,
}

impl ReportBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn matrix(&self, method: ReplacementMethod) -> Option<&MatrixSummary> {
        self.matrices.iter().find(|m| m.method == method)
    }
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Loads data, returning the split and, for the additive scenario, its basis.
pub fn load_split(config: &RunConfig) -> CliResult<(SplitSample, Option<BasisSpec>)> {
    match &config.source {
        DataSource::Scenario { id, n1, n2 } => {
            let mut spec = ScenarioSpec::new(*id, config.seed);
            spec.n1 = n1.unwrap_or(spec.n1);
            spec.n2 = n2.unwrap_or(spec.n2);
            let data = generate(&spec).stage("scenario")?;
            Ok((data.split, data.oracle_basis))
        }
        DataSource::Csv { path, test_path: Some(test), response } => {
            let train = ingest_csv(path, response)?;
            let test = ingest_csv(test, response)?;
            let s = SplitSample::new(train, test).map_err(|e| CliError::Data(e.to_string()))?;
            Ok((s, None))
        }
        DataSource::Csv { path, test_path: None, response } => {
            let data = ingest_csv(path, response)?;
            let s = match config.split {
                SplitPolicy::Fraction { train } => split(&data, train, config.seed)?,
                SplitPolicy::Sizes { n1, n2 } => {
                    split_sizes(&data, n1, n2.unwrap_or(data.n().saturating_sub(n1)), config.seed)?
                }
            };
            Ok((s, None))
        }
    }
}

struct Fitted {
    model: Box<dyn PredictionFunction>,
    factory: Option<Box<dyn ModelFactory>>,
}

fn fit_model(config: &RunConfig, split: &SplitSample, oracle: Option<BasisSpec>) -> CliResult<Fitted> {
    let factory: Box<dyn ModelFactory> = match &config.model {
        ModelSpec::Linear => Box::new(LinearFactory),
        ModelSpec::Basis { basis } => {
            let basis = basis
                .clone()
                .or(oracle)
                .ok_or_else(|| CliError::Config("no basis given".into()))?;
            basis.validate(split.p()).stage("basis")?;
            Box::new(BasisFactory { basis })
        }
        ModelSpec::Mlp { config: mlp } => Box::new(MlpFactory { config: *mlp, seed: config.seed }),
        ModelSpec::External { command, timeout_secs, max_batch_rows } => {
            let mut cfg = ExternalPredictorConfig::new(command[0].clone(), command[1..].to_vec());
            cfg.timeout_secs = *timeout_secs;
            cfg.max_batch_rows = *max_batch_rows;
            let model = external_predictor(cfg, split.names().to_vec()).stage("external predictor")?;
            return Ok(Fitted { model: Box::new(model), factory: None });
        }
    };
    let model = factory.fit(&split.train).stage("fit")?;
    Ok(Fitted { model, factory: Some(factory) })
}

fn summarize(rm: &RelevanceMatrix, threshold: f64, slopes: Option<&[f64]>) -> CliResult<MatrixSummary> {
    let partial_correlations = match slopes {
        Some(b) => {
            let pc = partial_corr_linear(rm, b).stage("partial correlations")?;
            let p = rm.p();
            Some((0..p).map(|j| (0..p).map(|k| pc.get(j, k).ok()).collect()).collect())
        }
        None => None,
    };
    Ok(MatrixSummary {
        method: rm.method,
        v: rows(&rm.v),
        centered: rows(&rm.centered),
        total_relevance: rm.total_relevance,
        eigenvalues: rm.eigen.eigenvalues.clone(),
        explained: rm.explained.clone(),
        components: eigen_report(rm, threshold).into_iter().map(Component::from).collect(),
        partial_correlations,
    })
}

/// Computes the full bundle; writes nothing.
pub fn analyze(config: &RunConfig) -> CliResult<ReportBundle> {
    config.validate()?;
    let (split, oracle) = load_split(config)?;
    let fitted = fit_model(config, &split, oracle)?;
    let model = fitted.model.as_ref();
    let (n1, n2, p) = (split.train.n(), split.test.n(), split.p());
    let linear = model.as_linear();
    let mut notes = Vec::new();

    let mspe = estimate_mspe(model, &split.test).stage("mspe")?;
    let cv = match linear {
        Some(l) => Some(critical_value(l.ols().sigma2_hat, n1, p, config.alpha).stage("critical value")?),
        None => None,
    };

    let mut values = RelevanceValues::default();
    let mut matrices = Vec::new();
    let mut cluster_source = None;
    let wants = |m: Method| config.methods.contains(&m);

    if wants(Method::Ghost) {
        let ghosts = fit_ghosts(&split.test.x).stage("ghost variables")?;
        values.ghost = Some(relevance_ghost(model, &split.test, &ghosts).stage("ghost relevance")?);
        let a = build_a(model, &split.test, Replacement::Ghost(&ghosts)).stage("ghost matrix")?;
        let rm = relevance_matrix(&a).stage("ghost matrix")?;
        let slopes = linear.map(|l| l.slopes());
        matrices.push(summarize(&rm, config.eigen_threshold, slopes)?);
        cluster_source = Some(rm);
    }
    if wants(Method::Permutation) {
        let plan = PermutationPlan::independent(n2, p, &mut RngState::stream(config.seed, PERMUTATION_STREAM));
        values.permutation = Some(relevance_permutation(model, &split.test, &plan).stage("permutation relevance")?);
        let a = build_a(model, &split.test, Replacement::Permutation(&plan)).stage("permutation matrix")?;
        let rm = relevance_matrix(&a).stage("permutation matrix")?;
        matrices.push(summarize(&rm, config.eigen_threshold, None)?);
        cluster_source.get_or_insert(rm);
    }
    if wants(Method::Omission) {
        let factory = fitted
            .factory
            .as_deref()
            .ok_or_else(|| CliError::Config("omission needs a refittable model".into()))?;
        let om = (0..p)
            .map(|j| relevance_omission(model, factory, &split, &[j]))
            .collect::<ghostvar_core::Result<Vec<f64>>>()
            .stage("omission relevance")?;
        values.omission = Some(om);
    }

    let cluster = match cluster_source {
        Some(rm) if p >= 2 => match cluster_variables(&rm.v, split.names(), config.linkage) {
            Ok(tree) => Some(ClusterSummary { method: rm.method, tree }),
            Err(Error::DegenerateSimilarity) => {
                notes.push("no off-diagonal relevance; variables not clustered".into());
                None
            }
            Err(e) => return Err(e).stage("clustering"),
        },
        _ => None,
    };

    let report = RelevanceReport::assemble(split.names(), values, mspe, cv, n1, n2, config.alpha).stage("report")?;
    let metadata = RunMetadata {
        seed: config.seed,
        config_hash: config.hash(),
        config: {
            let mut c = config.clone();
            c.out_dir = None;
            c
        },
        versions: Versions {
            ghostvar_core: ghostvar_core::VERSION.into(),
            ghostvar_cli: env!("CARGO_PKG_VERSION").into(),
        },
        model_family: model.family(),
        hyperparameters: model.hyperparameters().into_iter().collect(),
        response: split.train.response_name.clone(),
        variables: split.names().to_vec(),
    };
    Ok(ReportBundle { schema_version: SCHEMA_VERSION.into(), metadata, report, matrices, cluster, notes })
}

/// Computes the bundle and, when an output directory is configured, writes
/// `report.json`, `relevance.csv` and the SVG figures into it.
pub fn run_analysis(config: &RunConfig) -> CliResult<ReportBundle> {
    let bundle = analyze(config)?;
    if let Some(dir) = &config.out_dir {
        write_outputs(&bundle, dir)?;
    }
    Ok(bundle)
}

fn method_slug(m: ReplacementMethod) -> &'static str {
    match m {
        ReplacementMethod::Ghost => "ghost",
        ReplacementMethod::Permutation => "permutation",
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn write_outputs(bundle: &ReportBundle, dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_file(&dir.join("report.json"), &bundle.to_json())?;
    write_relevance_csv(bundle, &dir.join("relevance.csv"))?;

    let names = &bundle.metadata.variables;
    let vars = &bundle.report.variables;
    let columns: [(&str, Vec<Option<f64>>); 3] = [
        ("ghost", vars.iter().map(|v| v.ghost).collect()),
        ("permutation", vars.iter().map(|v| v.permutation).collect()),
        ("omission", vars.iter().map(|v| v.omission).collect()),
    ];
    for (slug, col) in columns {
        let Some(values) = col.into_iter().collect::<Option<Vec<f64>>>() else { continue };
        let reference = match (slug, bundle.report.critical_value) {
            ("ghost" | "omission", Some(c)) => Some((c, "critical value")),
            _ => None,
        };
        let title = format!("Relevance by {slug}");
        let chart = BarChart { title: &title, labels: names, values: &values, reference };
        write_file(&dir.join(format!("relevance_{slug}.svg")), &chart.render())?;
    }

    for m in &bundle.matrices {
        let slug = method_slug(m.method);
        let idx: Vec<String> = (1..=m.eigenvalues.len()).map(|i| i.to_string()).collect();
        let title = format!("Eigenvalues of the {slug} relevance matrix");
        let chart = BarChart { title: &title, labels: &idx, values: &m.eigenvalues, reference: None };
        write_file(&dir.join(format!("eigenvalues_{slug}.svg")), &chart.render())?;
        for c in &m.components {
            let title = format!(
                "{slug} eigenvector {} ({:.1}% of total relevance)",
                c.index + 1,
                100.0 * c.explained
            );
            let chart = BarChart { title: &title, labels: names, values: &c.vector, reference: None };
            write_file(&dir.join(format!("eigenvector_{slug}_{}.svg", c.index + 1)), &chart.render())?;
        }
    }
    Ok(())
}

fn write_relevance_csv(bundle: &ReportBundle, path: &Path) -> CliResult<()> {
    let vars = &bundle.report.variables;
    type Getter = fn(&ghostvar_core::relevance::VariableRelevance) -> Option<f64>;
    let all: [(&str, Getter); 6] = [
        ("ghost", |v| v.ghost),
        ("permutation", |v| v.permutation),
        ("omission", |v| v.omission),
        ("ghost_scaled", |v| v.ghost_scaled),
        ("permutation_scaled", |v| v.permutation_scaled),
        ("omission_scaled", |v| v.omission_scaled),
    ];
    let present: Vec<_> = all.iter().filter(|(_, g)| vars.iter().any(|v| g(v).is_some())).collect();
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    let mut header = vec!["variable"];
    header.extend(present.iter().map(|(n, _)| *n));
    w.write_record(&header).map_err(|e| CliError::io(path, e))?;
    for v in vars {
        let mut rec = vec![v.name.clone()];
        rec.extend(present.iter().map(|(_, g)| g(v).map(|x| format!("{x:?}")).unwrap_or_default()));
        w.write_record(&rec).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
