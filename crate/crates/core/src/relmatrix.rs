//! Case-variable matrix `A`, relevance matrix `V = AᵀA / n₂` and what can be
//! read from it.
//!
//! For a linear model with ghost replacement, `A = (X₂ − X̂₂) diag(β̂)`, so
//! `V = diag(β̂) G diag(β̂)` with `G` the cross-product of ghost residuals, and
//! the normalized off-diagonal entries of `V` are (minus) the partial
//! correlations of the test sample.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, sym_eigen, Matrix, SymEigen};
use crate::predictors::{LinearModel, PredictionFunction};
use crate::relevance::{
    check_model_schema, permuted_column, prediction_changes, GhostColumnSet, PermutationPlan,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementMethod {
    Ghost,
    Permutation,
}

/// How each column is replaced when building `A`.
#[derive(Debug, Clone, Copy)]
pub enum Replacement<'a> {
    Ghost(&'a GhostColumnSet),
    Permutation(&'a PermutationPlan),
}

impl Replacement<'_> {
    pub fn method(&self) -> ReplacementMethod {
        match self {
            Replacement::Ghost(_) => ReplacementMethod::Ghost,
            Replacement::Permutation(_) => ReplacementMethod::Permutation,
        }
    }
}

/// `A`, `n₂ × p`, column `j` = `Ŷ₂ − Ŷ₂.ⱼ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseVariableMatrix {
    pub a: Matrix,
    pub method: ReplacementMethod,
    pub names: Vec<String>,
}

pub fn build_a(
    model: &dyn PredictionFunction,
    test: &Dataset,
    replacement: Replacement<'_>,
) -> Result<CaseVariableMatrix> {
    check_model_schema(model, test)?;
    let x = &test.x;
    let base = model.predict(x)?;
    let a = match replacement {
        Replacement::Ghost(g) => {
            if g.ghosts.shape() != x.shape() {
                return Err(Error::SchemaMismatch(
                    "ghosts built on a different test matrix".into(),
                ));
            }
            prediction_changes(model, x, &base, &|j| g.ghost(j))?
        }
        Replacement::Permutation(plan) => {
            plan.check(x.rows(), x.cols())?;
            prediction_changes(model, x, &base, &|j| {
                permuted_column(x, j, &plan.permutations[j])
            })?
        }
    };
    Ok(CaseVariableMatrix {
        a,
        method: replacement.method(),
        names: test.names.clone(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelevanceMatrix {
    pub v: Matrix,
    pub eigen: SymEigen,
    pub total_relevance: f64,
    pub explained: Vec<f64>,
    /// Covariance of the columns of `A` (denominator `n₂`); equals `V` when
    /// every column of `A` has mean zero.
    pub centered: Matrix,
    pub method: ReplacementMethod,
    pub names: Vec<String>,
}

impl RelevanceMatrix {
    pub fn p(&self) -> usize {
        self.v.rows()
    }

    pub fn relevances(&self) -> Vec<f64> {
        self.v.diag()
    }
}

pub fn relevance_matrix(a: &CaseVariableMatrix) -> Result<RelevanceMatrix> {
    let n = a.a.rows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty case-variable matrix".into()));
    }
    let v = a.a.gram().scale(1.0 / n as f64);
    let mut eigen = sym_eigen(&v)?;
    let trace = v.trace();
    for l in eigen.eigenvalues.iter_mut() {
        if *l < 1e-12 * trace {
            *l = 0.0;
        }
    }
    let explained = eigen
        .eigenvalues
        .iter()
        .map(|l| if trace > 0.0 { l / trace } else { 0.0 })
        .collect();
    let (ac, _) = a.a.centered();
    let centered = ac.gram().scale(1.0 / n as f64);
    Ok(RelevanceMatrix {
        v,
        eigen,
        total_relevance: trace,
        explained,
        centered,
        method: a.method,
        names: a.names.clone(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenComponent {
    /// Zero-based rank in the descending spectrum.
    pub index: usize,
    pub eigenvalue: f64,
    pub explained: f64,
    pub vector: Vec<f64>,
}

/// Eigenpairs explaining at least `threshold` of the total relevance.
pub fn eigen_report(rm: &RelevanceMatrix, threshold: f64) -> Vec<EigenComponent> {
    rm.eigen
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(i, _)| rm.explained[i] >= threshold)
        .map(|(i, &l)| EigenComponent {
            index: i,
            eigenvalue: l,
            explained: rm.explained[i],
            vector: rm.eigen.eigenvector(i),
        })
        .collect()
}

/// Off-diagonal `−v_jk / √(v_jj v_kk)`, `−1` on the diagonal, NaN where a
/// variable has zero relevance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartialCorrelationMatrix {
    #[serde(with = "nan_as_null")]
    pub values: Matrix,
    pub names: Vec<String>,
}

impl PartialCorrelationMatrix {
    pub fn get(&self, j: usize, k: usize) -> Result<f64> {
        let v = self.values[(j, k)];
        if v.is_nan() {
            let zero = if self.values[(j, j)].is_nan() { j } else { k };
            return Err(Error::ZeroRelevanceVariable(zero));
        }
        Ok(v)
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::Matrix;

    #[derive(Serialize, Deserialize)]
    struct Repr {
        rows: usize,
        cols: usize,
        data: Vec<Option<f64>>,
    }

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().iter().map(|v| (!v.is_nan()).then_some(*v)).collect(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let r = Repr::deserialize(d)?;
        let data = r.data.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        Matrix::from_vec(r.rows, r.cols, data).map_err(serde::de::Error::custom)
    }
}

/// `−v_jk / √(v_jj v_kk)` for every pair. For a linear model this is the
/// test-sample partial correlation only when `β̂_j β̂_k > 0`; see
/// [`partial_corr_linear`].
pub fn partial_corr_from_v(rm: &RelevanceMatrix) -> PartialCorrelationMatrix {
    partial_corr_signed(rm, |_, _| 1.0)
}

/// Partial correlations from `V` of a linear model, undoing the sign of
/// `β̂_j β̂_k` carried by `v_jk = β̂_j β̂_k g_jk`.
pub fn partial_corr_linear(rm: &RelevanceMatrix, slopes: &[f64]) -> Result<PartialCorrelationMatrix> {
    if slopes.len() != rm.p() {
        return Err(Error::DimensionMismatch(format!(
            "{} slopes for {} variables",
            slopes.len(),
            rm.p()
        )));
    }
    Ok(partial_corr_signed(rm, |j, k| (slopes[j] * slopes[k]).signum()))
}

fn partial_corr_signed(rm: &RelevanceMatrix, sign: impl Fn(usize, usize) -> f64) -> PartialCorrelationMatrix {
    let v = &rm.v;
    let p = v.rows();
    let values = Matrix::from_fn(p, p, |j, k| {
        if v[(j, j)] <= 0.0 || v[(k, k)] <= 0.0 {
            f64::NAN
        } else if j == k {
            -1.0
        } else {
            -sign(j, k) * v[(j, k)] / (v[(j, j)] * v[(k, k)]).sqrt()
        }
    });
    PartialCorrelationMatrix {
        values,
        names: rm.names.clone(),
    }
}

/// `V = diag(β̂) G diag(β̂)` for a linear model, from the ghost residuals.
pub fn linear_v_closed_form(model: &LinearModel, test_features: &Matrix, ghosts: &GhostColumnSet) -> Result<Matrix> {
    let g = ghosts.g_matrix(test_features)?;
    let b = model.slopes();
    Ok(g.scale_rows_cols(b, b))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InverseCovarianceCheck {
    /// `max |G − ((n₂−1)/n₂) D S₂⁻¹ D|` with `D = diag(σ̃²_[j])`,
    /// `σ̃²_[j] = RSS_j / (n₂ − 1)` and `S₂` the unbiased test covariance.
    pub max_abs_discrepancy: f64,
    pub relative_discrepancy: f64,
    /// Same comparison with `D` built from `σ̂²_[j] = RSS_j / n₂`; off by
    /// the factor `((n₂−1)/n₂)²` in every entry.
    pub relative_discrepancy_n_denominator: f64,
}

/// Compares the ghost-residual cross-product `G` with the inverse test
/// covariance. Requires ghosts fitted on `test_features` with intercepts.
pub fn inverse_covariance_check(test_features: &Matrix, ghosts: &GhostColumnSet) -> Result<InverseCovarianceCheck> {
    let n = test_features.rows() as f64;
    let g = ghosts.g_matrix(test_features)?;
    let s_inv = spd_inverse(&test_features.covariance())?;
    let gmax = g.max_abs();
    let compare = |d: &[f64]| -> Result<f64> {
        let rhs = s_inv.scale_rows_cols(d, d).scale((n - 1.0) / n);
        Ok(g.sub(&rhs)?.max_abs())
    };
    let d_unbiased: Vec<f64> = ghosts
        .residual_variances
        .iter()
        .map(|s| s * n / (n - 1.0))
        .collect();
    let abs = compare(&d_unbiased)?;
    let abs_n = compare(&ghosts.residual_variances)?;
    Ok(InverseCovarianceCheck {
        max_abs_discrepancy: abs,
        relative_discrepancy: abs / gmax,
        relative_discrepancy_n_denominator: abs_n / gmax,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RpStructureCheck {
    pub v_tilde: Matrix,
    /// `2 diag(β̂) S₂ diag(β̂)`, `S₂` with denominator `n₂`.
    pub approximation: Matrix,
    /// `max|Ṽ − approximation| / max|Ṽ|`.
    pub relative_max_discrepancy: f64,
    pub diagonal_relative_errors: Vec<f64>,
}

/// Permutation relevance matrix of a linear model against
/// `2 diag(β̂) S₂ diag(β̂)`. The off-diagonal approximation presumes the
/// same row permutation for every variable.
pub fn rp_matrix_structure_check(
    model: &LinearModel,
    test: &Dataset,
    plan: &PermutationPlan,
) -> Result<RpStructureCheck> {
    let a = build_a(model, test, Replacement::Permutation(plan))?;
    let n = test.n() as f64;
    let v_tilde = a.a.gram().scale(1.0 / n);
    let b = model.slopes();
    let s2 = test.x.covariance().scale((n - 1.0) / n);
    let approximation = s2.scale_rows_cols(b, b).scale(2.0);
    let vmax = v_tilde.max_abs();
    if vmax == 0.0 {
        return Err(Error::InvalidArgument(
            "permutation relevance matrix is zero".into(),
        ));
    }
    let relative_max_discrepancy = v_tilde.sub(&approximation)?.max_abs() / vmax;
    let diagonal_relative_errors = (0..test.p())
        .map(|j| {
            let approx = approximation[(j, j)];
            if approx == 0.0 {
                v_tilde[(j, j)].abs()
            } else {
                (v_tilde[(j, j)] - approx).abs() / approx
            }
        })
        .collect();
    Ok(RpStructureCheck {
        v_tilde,
        approximation,
        relative_max_discrepancy,
        diagonal_relative_errors,
    })
}
