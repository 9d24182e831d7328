//! Per-variable relevance on a test sample.
//!
//! For a fitted `m̂` and test features `X₂`, the relevance of variable `j`
//! under a replacement scheme is
//!
//! ```text
//! Rel(X_j) = (1/n₂) ‖ m̂(X₂) − m̂(X₂ with column j replaced) ‖²
//! ```
//!
//! where the replacement is the ghost column `x̂₂.ⱼ` (the OLS prediction of
//! column `j` from the other test columns), a random permutation of column
//! `j`, or, for relevance by omission, a model refitted without `j`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SplitSample};
use crate::error::{Error, Result};
use crate::linalg::{dot, f_quantile, mean_sq_diff, ols_fit, Matrix, PivotedQr, RngState};
use crate::predictors::{fit_linear, LinearModel, ModelFactory, PredictionFunction};

/// Where the ghost regressions are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhostSource {
    /// Fitted on the test sample, so the training data is only reached
    /// through the prediction function.
    #[default]
    Test,
    /// Fitted on the training sample and applied to the test sample.
    Train,
}

/// Ghost columns for every variable of a test matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GhostColumnSet {
    /// `n₂ × p`; column `j` is the ghost of variable `j`.
    pub ghosts: Matrix,
    /// `σ̂²_[j] = (1/n₂) ‖x₂.ⱼ − x̂₂.ⱼ‖²`.
    pub residual_variances: Vec<f64>,
    /// Per variable: intercept followed by the coefficients of the other
    /// columns in their original order.
    pub coefficients: Vec<Vec<f64>>,
    pub source: GhostSource,
}

impl GhostColumnSet {
    pub fn p(&self) -> usize {
        self.ghosts.cols()
    }

    pub fn ghost(&self, j: usize) -> Vec<f64> {
        self.ghosts.column(j)
    }

    /// `X₂ − X̂₂`.
    pub fn residuals(&self, x: &Matrix) -> Result<Matrix> {
        x.sub(&self.ghosts)
    }

    /// `G = (1/n₂)(X₂ − X̂₂)ᵀ(X₂ − X̂₂)`.
    pub fn g_matrix(&self, x: &Matrix) -> Result<Matrix> {
        let r = self.residuals(x)?;
        Ok(r.gram().scale(1.0 / x.rows() as f64))
    }
}

/// Regression of every column on all the others, with intercept, derived
/// from one pivoted QR of the centred matrix: with `Θ = (X_cᵀX_c)⁻¹`, the
/// residual of column `j` is `X_c Θ_{·j} / Θ_jj`.
fn ghost_regressions(x: &Matrix) -> Result<(Matrix, Vec<Vec<f64>>)> {
    let (n, p) = x.shape();
    if n <= p + 1 {
        return Err(Error::InvalidArgument(format!(
            "ghost regressions need more than {} rows, got {n}",
            p + 1
        )));
    }
    if p < 2 {
        return Err(Error::InvalidArgument(
            "ghost variables need at least two explanatory variables".into(),
        ));
    }
    let (xc, means) = x.centered();
    let theta = PivotedQr::new(&xc)?.gram_inverse();
    let residuals = xc.matmul(&theta)?.scale_rows_cols(
        &vec![1.0; n],
        &theta.diag().iter().map(|d| 1.0 / d).collect::<Vec<_>>(),
    );
    let coefficients = (0..p)
        .map(|j| {
            let slopes: Vec<f64> = (0..p)
                .filter(|&k| k != j)
                .map(|k| -theta[(k, j)] / theta[(j, j)])
                .collect();
            let others: Vec<f64> = (0..p).filter(|&k| k != j).map(|k| means[k]).collect();
            let mut c = vec![means[j] - dot(&slopes, &others)];
            c.extend(slopes);
            c
        })
        .collect();
    Ok((residuals, coefficients))
}

/// Ghost variables of the test features, each column regressed by OLS (with
/// intercept) on all the other test columns.
pub fn fit_ghosts(test_features: &Matrix) -> Result<GhostColumnSet> {
    let (residuals, coefficients) = ghost_regressions(test_features)?;
    let ghosts = test_features.sub(&residuals)?;
    let n = test_features.rows() as f64;
    let residual_variances = (0..test_features.cols())
        .map(|j| {
            let r = residuals.column(j);
            dot(&r, &r) / n
        })
        .collect();
    Ok(GhostColumnSet {
        ghosts,
        residual_variances,
        coefficients,
        source: GhostSource::Test,
    })
}

/// Ghost regressions estimated on `train_features` and evaluated on
/// `test_features`.
pub fn fit_ghosts_on_train(train_features: &Matrix, test_features: &Matrix) -> Result<GhostColumnSet> {
    if train_features.cols() != test_features.cols() {
        return Err(Error::SchemaMismatch("train and test widths differ".into()));
    }
    let (_, coefficients) = ghost_regressions(train_features)?;
    Ok(apply_ghost_coefficients(test_features, coefficients, GhostSource::Train))
}

fn apply_ghost_coefficients(x: &Matrix, coefficients: Vec<Vec<f64>>, source: GhostSource) -> GhostColumnSet {
    let (n, p) = x.shape();
    let mut ghosts = Matrix::zeros(n, p);
    let mut residual_variances = vec![0.0; p];
    for (j, c) in coefficients.iter().enumerate() {
        let mut rss = 0.0;
        for i in 0..n {
            let row = x.row(i);
            let others = (0..p).filter(|&k| k != j).map(|k| row[k]);
            let g = c[0] + others.zip(&c[1..]).map(|(v, b)| v * b).sum::<f64>();
            ghosts[(i, j)] = g;
            rss += (row[j] - g) * (row[j] - g);
        }
        residual_variances[j] = rss / n as f64;
    }
    GhostColumnSet {
        ghosts,
        residual_variances,
        coefficients,
        source,
    }
}

/// Reference route: `p` separate OLS fits. Slower but independent of the
/// inverse-Gram shortcut used by [`fit_ghosts`].
pub fn fit_ghosts_independent(test_features: &Matrix) -> Result<GhostColumnSet> {
    let p = test_features.cols();
    let coefficients = (0..p)
        .map(|j| {
            let others = test_features.without_column(j);
            ols_fit(&others, &test_features.column(j), true).map(|f| f.coefficients)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(apply_ghost_coefficients(test_features, coefficients, GhostSource::Test))
}

/// Per-variable permutations of the test rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationPlan {
    pub seed: Option<u64>,
    pub permutations: Vec<Vec<usize>>,
}

impl PermutationPlan {
    /// One independent Fisher–Yates shuffle per variable.
    pub fn independent(n: usize, p: usize, rng: &mut RngState) -> Self {
        Self {
            seed: Some(rng.seed()),
            permutations: (0..p).map(|_| rng.permutation(n)).collect(),
        }
    }

    /// The same row permutation for every variable.
    pub fn shared(n: usize, p: usize, rng: &mut RngState) -> Self {
        let perm = rng.permutation(n);
        Self {
            seed: Some(rng.seed()),
            permutations: vec![perm; p],
        }
    }

    pub fn identity(n: usize, p: usize) -> Self {
        Self {
            seed: None,
            permutations: vec![(0..n).collect(); p],
        }
    }

    /// Validates that every entry is a bijection of `0..n`.
    pub fn from_permutations(permutations: Vec<Vec<usize>>) -> Result<Self> {
        for (j, perm) in permutations.iter().enumerate() {
            let mut seen = vec![false; perm.len()];
            for &i in perm {
                if i >= perm.len() || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidArgument(format!(
                        "permutation {j} is not a bijection"
                    )));
                }
            }
        }
        Ok(Self {
            seed: None,
            permutations,
        })
    }

    pub fn p(&self) -> usize {
        self.permutations.len()
    }

    pub fn check(&self, n: usize, p: usize) -> Result<()> {
        if self.permutations.len() != p || self.permutations.iter().any(|q| q.len() != n) {
            return Err(Error::SchemaMismatch(format!(
                "permutation plan does not cover a {n}x{p} test matrix"
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_model_schema(model: &dyn PredictionFunction, test: &Dataset) -> Result<()> {
    if model.variable_names() != test.names.as_slice() {
        return Err(Error::SchemaMismatch(format!(
            "model variables {:?}, test columns {:?}",
            model.variable_names(),
            test.names
        )));
    }
    Ok(())
}

/// Matrix whose column `j` is `base − m̂(X with column j replaced)`.
pub(crate) fn prediction_changes(
    model: &dyn PredictionFunction,
    x: &Matrix,
    base: &[f64],
    replacement: &(dyn Fn(usize) -> Vec<f64> + Sync),
) -> Result<Matrix> {
    let p = x.cols();
    let columns: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|j| {
            let mut xj = x.clone();
            xj.set_column(j, &replacement(j));
            let pred = model.predict(&xj)?;
            Ok(base.iter().zip(&pred).map(|(a, b)| a - b).collect())
        })
        .collect::<Result<_>>()?;
    Matrix::from_columns(&columns)
}

pub(crate) fn column_mean_squares(a: &Matrix) -> Vec<f64> {
    let n = a.rows() as f64;
    (0..a.cols())
        .map(|j| a.column(j).iter().map(|v| v * v).sum::<f64>() / n)
        .collect()
}

pub(crate) fn permuted_column(x: &Matrix, j: usize, perm: &[usize]) -> Vec<f64> {
    perm.iter().map(|&i| x[(i, j)]).collect()
}

/// `(1/n₂) Σ (y₂ᵢ − m̂(x₂ᵢ))²`.
pub fn estimate_mspe(model: &dyn PredictionFunction, test: &Dataset) -> Result<f64> {
    check_model_schema(model, test)?;
    let pred = model.predict(&test.x)?;
    Ok(mean_sq_diff(&test.y, &pred))
}

pub fn relevance_ghost(
    model: &dyn PredictionFunction,
    test: &Dataset,
    ghosts: &GhostColumnSet,
) -> Result<Vec<f64>> {
    check_model_schema(model, test)?;
    if ghosts.ghosts.shape() != test.x.shape() {
        return Err(Error::SchemaMismatch("ghosts built on a different test matrix".into()));
    }
    let base = model.predict(&test.x)?;
    let a = prediction_changes(model, &test.x, &base, &|j| ghosts.ghost(j))?;
    Ok(column_mean_squares(&a))
}

pub fn relevance_permutation(
    model: &dyn PredictionFunction,
    test: &Dataset,
    plan: &PermutationPlan,
) -> Result<Vec<f64>> {
    check_model_schema(model, test)?;
    plan.check(test.n(), test.p())?;
    let base = model.predict(&test.x)?;
    let a = prediction_changes(model, &test.x, &base, &|j| {
        permuted_column(&test.x, j, &plan.permutations[j])
    })?;
    Ok(column_mean_squares(&a))
}

/// Average of `repeats` permutation relevances, each with a fresh
/// independent plan drawn from `rng`.
pub fn relevance_permutation_repeated(
    model: &dyn PredictionFunction,
    test: &Dataset,
    rng: &mut RngState,
    repeats: usize,
) -> Result<Vec<f64>> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let mut acc = vec![0.0; test.p()];
    for _ in 0..repeats {
        let plan = PermutationPlan::independent(test.n(), test.p(), rng);
        let rel = relevance_permutation(model, test, &plan)?;
        acc.iter_mut().zip(rel).for_each(|(a, r)| *a += r);
    }
    Ok(acc.into_iter().map(|a| a / repeats as f64).collect())
}

fn kept_columns(p: usize, omit: &[usize]) -> Result<Vec<usize>> {
    if omit.is_empty() {
        return Err(Error::InvalidArgument("nothing to omit".into()));
    }
    if let Some(&bad) = omit.iter().find(|&&j| j >= p) {
        return Err(Error::InvalidArgument(format!("variable {bad} out of range")));
    }
    let keep: Vec<usize> = (0..p).filter(|j| !omit.contains(j)).collect();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("cannot omit every variable".into()));
    }
    Ok(keep)
}

fn refit_without(
    factory: &dyn ModelFactory,
    train: &Dataset,
    keep: &[usize],
) -> Result<Box<dyn PredictionFunction>> {
    factory.fit_subset(train, keep).map_err(|e| match e {
        e @ Error::RankDeficient { .. } => e,
        Error::RefitFailed(m) => Error::RefitFailed(m),
        other => Error::RefitFailed(other.to_string()),
    })
}

/// Relevance by omission of the variables `omit` (one or a group): the
/// family is refitted on the training sample without them and compared with
/// `full` on the test sample.
pub fn relevance_omission(
    full: &dyn PredictionFunction,
    factory: &dyn ModelFactory,
    split: &SplitSample,
    omit: &[usize],
) -> Result<f64> {
    check_model_schema(full, &split.test)?;
    let keep = kept_columns(split.p(), omit)?;
    let reduced = refit_without(factory, &split.train, &keep)?;
    let base = full.predict(&split.test.x)?;
    let pred = reduced.predict(&split.test.x.select_columns(&keep))?;
    Ok(mean_sq_diff(&base, &pred))
}

/// Relevance by omission evaluated on the training sample itself.
pub fn relevance_omission_train(
    full: &dyn PredictionFunction,
    factory: &dyn ModelFactory,
    train: &Dataset,
    omit: &[usize],
) -> Result<f64> {
    let keep = kept_columns(train.p(), omit)?;
    let reduced = refit_without(factory, train, &keep)?;
    let base = full.predict(&train.x)?;
    let pred = reduced.predict(&train.x.select_columns(&keep))?;
    Ok(mean_sq_diff(&base, &pred))
}

/// `F_{1, n₁−p−1, 1−α} · σ̂² / n₁`, the level-`α` threshold for ghost (or
/// omission) relevance of a linear model.
pub fn critical_value(sigma2_hat: f64, n1: usize, p: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidProbability(alpha));
    }
    if n1 < p + 2 {
        return Err(Error::InvalidArgument(format!(
            "need n1 >= p + 2, got n1 = {n1}, p = {p}"
        )));
    }
    if sigma2_hat == 0.0 {
        return Ok(0.0);
    }
    Ok(f_quantile(1, n1 - p - 1, 1.0 - alpha)? * sigma2_hat / n1 as f64)
}

/// Both sides of the exact ghost/F identity for one variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GhostIdentityRow {
    pub rel_ghost: f64,
    pub f_value: f64,
    /// `(n₁/σ̂²) Rel_Gh`.
    pub scaled_relevance: f64,
    /// `F_z σ̂²_{z.x,n₂} / σ̂²_{z.x,n₁}`.
    pub transformed_f: f64,
    /// `β̂_z² σ̂²_{z.x,n₂}`.
    pub closed_form: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GhostIdentityCheck {
    pub rows: Vec<GhostIdentityRow>,
    pub max_rel_discrepancy_f: f64,
    pub max_rel_discrepancy_closed_form: f64,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Residual variance (denominator `n`) of column `j` regressed with
/// intercept on the other columns.
fn partial_residual_variance(x: &Matrix, j: usize) -> Result<f64> {
    let fit = ols_fit(&x.without_column(j), &x.column(j), true)?;
    Ok(fit.sigma2_n)
}

/// Evaluates, for every variable of a linear model fitted on `split.train`,
/// `(n₁/σ̂²) Rel_Gh(Z) = F_z σ̂²_{z.x,n₂}/σ̂²_{z.x,n₁}` and
/// `Rel_Gh(Z) = β̂_z² σ̂²_{z.x,n₂}`. Rel_Gh goes through the generic
/// prediction path; the right-hand sides come from separate regressions.
pub fn ghost_identity_check(split: &SplitSample) -> Result<GhostIdentityCheck> {
    let model = fit_linear(&split.train)?;
    let ghosts = fit_ghosts(&split.test.x)?;
    let rel = relevance_ghost(&model, &split.test, &ghosts)?;
    ghost_identity_rows(&model, split, &ghosts, &rel)
}

fn ghost_identity_rows(
    model: &LinearModel,
    split: &SplitSample,
    ghosts: &GhostColumnSet,
    rel: &[f64],
) -> Result<GhostIdentityCheck> {
    let fit = model.ols();
    let n1 = split.train.n() as f64;
    let mut rows = Vec::with_capacity(rel.len());
    for (j, &r) in rel.iter().enumerate() {
        let s2_train = partial_residual_variance(&split.train.x, j)?;
        let s2_test = ghosts.residual_variances[j];
        let f = fit.f_value(j);
        let beta = fit.slopes()[j];
        rows.push(GhostIdentityRow {
            rel_ghost: r,
            f_value: f,
            scaled_relevance: n1 / fit.sigma2_hat * r,
            transformed_f: f * s2_test / s2_train,
            closed_form: beta * beta * s2_test,
        });
    }
    let max_f = rows
        .iter()
        .map(|r| rel_diff(r.scaled_relevance, r.transformed_f))
        .fold(0.0, f64::max);
    let max_c = rows
        .iter()
        .map(|r| rel_diff(r.rel_ghost, r.closed_form))
        .fold(0.0, f64::max);
    Ok(GhostIdentityCheck {
        rows,
        max_rel_discrepancy_f: max_f,
        max_rel_discrepancy_closed_form: max_c,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmissionIdentityRow {
    pub rel_omission_train: f64,
    pub rel_omission_test: f64,
    pub f_value: f64,
    /// `(n₁/σ̂²) Rel_Om^Train`.
    pub scaled_train_relevance: f64,
    /// `β̂_z² σ̂²_{z.x,n₁,n₂}`.
    pub closed_form_test: f64,
    /// `β̂_z² σ̂²_{z.x,n₁}`.
    pub closed_form_train: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmissionIdentityCheck {
    pub rows: Vec<OmissionIdentityRow>,
    pub max_rel_discrepancy_f: f64,
    pub max_rel_discrepancy_closed_form_test: f64,
    pub max_rel_discrepancy_closed_form_train: f64,
}

/// For a linear model: `(n₁/σ̂²) Rel_Om^Train(Z) = F_z` and
/// `Rel_Om(Z) = β̂_z² σ̂²_{z.x,n₁,n₂}` with
/// `σ̂²_{z.x,n₁,n₂} = ‖z₂ − X₂ α̂₁‖² / n₂`, `α̂₁` the training regression of
/// `Z` on the other variables.
pub fn omission_check(split: &SplitSample) -> Result<OmissionIdentityCheck> {
    use crate::predictors::LinearFactory;
    let model = fit_linear(&split.train)?;
    let fit = model.ols();
    let n1 = split.train.n() as f64;
    let mut rows = Vec::new();
    for j in 0..split.p() {
        let om_train = relevance_omission_train(&model, &LinearFactory, &split.train, &[j])?;
        let om_test = relevance_omission(&model, &LinearFactory, split, &[j])?;
        let alpha = ols_fit(&split.train.x.without_column(j), &split.train.x.column(j), true)?;
        let z_hat = alpha.predict(&split.test.x.without_column(j))?;
        let s2_cross = mean_sq_diff(&split.test.x.column(j), &z_hat);
        let beta = fit.slopes()[j];
        rows.push(OmissionIdentityRow {
            rel_omission_train: om_train,
            rel_omission_test: om_test,
            f_value: fit.f_value(j),
            scaled_train_relevance: n1 / fit.sigma2_hat * om_train,
            closed_form_test: beta * beta * s2_cross,
            closed_form_train: beta * beta * alpha.sigma2_n,
        });
    }
    Ok(OmissionIdentityCheck {
        max_rel_discrepancy_f: rows
            .iter()
            .map(|r| rel_diff(r.scaled_train_relevance, r.f_value))
            .fold(0.0, f64::max),
        max_rel_discrepancy_closed_form_test: rows
            .iter()
            .map(|r| rel_diff(r.rel_omission_test, r.closed_form_test))
            .fold(0.0, f64::max),
        max_rel_discrepancy_closed_form_train: rows
            .iter()
            .map(|r| rel_diff(r.rel_omission_train, r.closed_form_train))
            .fold(0.0, f64::max),
        rows,
    })
}

/// Relevances of one variable, raw and divided by the estimated MSPE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableRelevance {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ghost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omission: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ghost_scaled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation_scaled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omission_scaled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceReport {
    pub variables: Vec<VariableRelevance>,
    pub mspe_hat: f64,
    /// Only for linear models.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_value: Option<f64>,
    pub n1: usize,
    pub n2: usize,
    pub alpha: f64,
}

/// Inputs for [`RelevanceReport::assemble`].
#[derive(Debug, Clone, Default)]
pub struct RelevanceValues {
    pub ghost: Option<Vec<f64>>,
    pub permutation: Option<Vec<f64>>,
    pub omission: Option<Vec<f64>>,
}

impl RelevanceReport {
    pub fn assemble(
        names: &[String],
        values: RelevanceValues,
        mspe_hat: f64,
        critical_value: Option<f64>,
        n1: usize,
        n2: usize,
        alpha: f64,
    ) -> Result<Self> {
        let p = names.len();
        for v in [&values.ghost, &values.permutation, &values.omission].into_iter().flatten() {
            if v.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "{} relevances for {p} variables",
                    v.len()
                )));
            }
        }
        let scale = |x: f64| if mspe_hat > 0.0 { Some(x / mspe_hat) } else { None };
        let pick = |v: &Option<Vec<f64>>, j: usize| v.as_ref().map(|v| v[j]);
        let variables = names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let ghost = pick(&values.ghost, j);
                let permutation = pick(&values.permutation, j);
                let omission = pick(&values.omission, j);
                VariableRelevance {
                    name: name.clone(),
                    ghost,
                    permutation,
                    omission,
                    ghost_scaled: ghost.and_then(scale),
                    permutation_scaled: permutation.and_then(scale),
                    omission_scaled: omission.and_then(scale),
                }
            })
            .collect();
        Ok(Self {
            variables,
            mspe_hat,
            critical_value,
            n1,
            n2,
            alpha,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::variance_n;

    fn random_split(n1: usize, n2: usize, p: usize, seed: u64) -> SplitSample {
        let mut rng = RngState::new(seed);
        let mut draw = |n: usize| {
            let x = Matrix::from_fn(n, p, |_, _| rng.standard_normal());
            // mild correlation between neighbouring columns
            let x = Matrix::from_fn(n, p, |i, j| x[(i, j)] + if j > 0 { 0.5 * x[(i, j - 1)] } else { 0.0 });
            let y: Vec<f64> = (0..n)
                .map(|i| x.row(i).iter().enumerate().map(|(j, v)| (j as f64 + 1.0) * 0.3 * v).sum::<f64>() + rng.standard_normal())
                .collect();
            Dataset::with_default_names(x, y).unwrap()
        };
        let train = draw(n1);
        let test = draw(n2);
        SplitSample::new(train, test).unwrap()
    }

    #[test]
    fn fast_ghosts_match_independent_regressions() {
        let split = random_split(50, 80, 5, 11);
        let fast = fit_ghosts(&split.test.x).unwrap();
        let slow = fit_ghosts_independent(&split.test.x).unwrap();
        assert!(fast.ghosts.sub(&slow.ghosts).unwrap().max_abs() < 1e-9);
        for (a, b) in fast.coefficients.iter().flatten().zip(slow.coefficients.iter().flatten()) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in fast.residual_variances.iter().zip(&slow.residual_variances) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn ghost_residual_variance_below_marginal() {
        let split = random_split(50, 120, 4, 5);
        let g = fit_ghosts(&split.test.x).unwrap();
        for j in 0..4 {
            let col = split.test.x.column(j);
            assert!(g.residual_variances[j] <= variance_n(&col) * (1.0 + 1e-9));
            let r: Vec<f64> = col.iter().zip(g.ghost(j)).map(|(a, b)| a - b).collect();
            assert!((g.residual_variances[j] - dot(&r, &r) / 120.0).abs() < 1e-10);
        }
    }

    #[test]
    fn collinear_test_columns_rejected() {
        let x = Matrix::from_fn(30, 3, |i, j| match j {
            0 => i as f64,
            1 => (i as f64).sin(),
            _ => 2.0 * i as f64 - (i as f64).sin(),
        });
        assert!(matches!(fit_ghosts(&x), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn identity_permutation_gives_zero() {
        let split = random_split(60, 40, 3, 2);
        let model = fit_linear(&split.train).unwrap();
        let plan = PermutationPlan::identity(40, 3);
        let rel = relevance_permutation(&model, &split.test, &plan).unwrap();
        assert_eq!(rel, vec![0.0; 3]);
    }

    #[test]
    fn constant_column_permuted_gives_zero() {
        let mut split = random_split(60, 40, 3, 8);
        for i in 0..40 {
            split.test.x[(i, 1)] = 1.5;
        }
        let model = fit_linear(&split.train).unwrap();
        let plan = PermutationPlan::independent(40, 3, &mut RngState::new(1));
        let rel = relevance_permutation(&model, &split.test, &plan).unwrap();
        assert_eq!(rel[1], 0.0);
    }

    #[test]
    fn bad_plan_rejected() {
        assert!(PermutationPlan::from_permutations(vec![vec![0, 0, 1]]).is_err());
        assert!(PermutationPlan::from_permutations(vec![vec![2, 0, 1]]).is_ok());
    }

    #[test]
    fn critical_value_edges() {
        assert_eq!(critical_value(0.0, 100, 3, 0.01).unwrap(), 0.0);
        let direct = f_quantile(1, 96, 0.5).unwrap();
        assert!((critical_value(100.0, 100, 3, 0.5).unwrap() - direct).abs() < 1e-12);
        assert!(matches!(
            critical_value(1.0, 100, 3, 1.0),
            Err(Error::InvalidProbability(_))
        ));
    }

    #[test]
    fn omission_requires_proper_subset() {
        let split = random_split(60, 40, 3, 2);
        let model = fit_linear(&split.train).unwrap();
        let f = crate::predictors::LinearFactory;
        assert!(relevance_omission(&model, &f, &split, &[]).is_err());
        assert!(relevance_omission(&model, &f, &split, &[0, 1, 2]).is_err());
        assert!(relevance_omission(&model, &f, &split, &[0, 2]).unwrap() > 0.0);
    }

    #[test]
    fn degenerate_reuse_of_train_as_test() {
        let split = random_split(80, 10, 3, 4);
        let same = SplitSample::new(split.train.clone(), split.train.clone()).unwrap();
        let check = ghost_identity_check(&same).unwrap();
        assert!(check.max_rel_discrepancy_f < 1e-8);
        // with test == train the variance ratio is exactly one
        for r in &check.rows {
            assert!((r.scaled_relevance - r.f_value).abs() <= 1e-8 * r.f_value);
        }
    }

    #[test]
    fn report_scaling() {
        let names = vec!["a".to_string(), "b".to_string()];
        let values = RelevanceValues {
            ghost: Some(vec![1.0, 0.5]),
            ..Default::default()
        };
        let r = RelevanceReport::assemble(&names, values, 2.0, None, 10, 5, 0.01).unwrap();
        assert_eq!(r.variables[1].ghost_scaled, Some(0.25));
        assert_eq!(r.variables[0].permutation, None);
    }
}
