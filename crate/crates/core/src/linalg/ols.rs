//! Ordinary least squares with the usual inference statistics.
//!
//! The solver is a column-pivoted Householder QR of the design matrix, so the
//! normal equations are never formed. Rank deficiency is declared when a
//! pivot drops below `1e-10` times the largest one.

use serde::{Deserialize, Serialize};

use super::matrix::{dot, mean, Matrix};
use super::qr::PivotedQr;
use crate::error::{Error, Result};

/// Result of an OLS fit.
///
/// When fitted with an intercept, `coefficients[0]` is the intercept and the
/// slopes follow in column order; [`OlsFit::slopes`] hides that offset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Residual variance with denominator `n - k` (`k` counts the intercept).
    pub sigma2_hat: f64,
    /// Residual variance with denominator `n`.
    pub sigma2_n: f64,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    /// Squared t-values.
    pub f_values: Vec<f64>,
    pub r2: f64,
    pub r2_adjusted: f64,
    pub n: usize,
    /// Number of regressors, intercept excluded.
    pub p: usize,
    pub intercept: bool,
}

impl OlsFit {
    /// Coefficients of the regressors, intercept excluded.
    pub fn slopes(&self) -> &[f64] {
        &self.coefficients[self.offset()..]
    }

    pub fn intercept_value(&self) -> f64 {
        if self.intercept {
            self.coefficients[0]
        } else {
            0.0
        }
    }

    /// F statistic of regressor `j` (intercept excluded from indexing).
    pub fn f_value(&self, j: usize) -> f64 {
        self.f_values[self.offset() + j]
    }

    pub fn t_value(&self, j: usize) -> f64 {
        self.t_values[self.offset() + j]
    }

    fn offset(&self) -> usize {
        usize::from(self.intercept)
    }

    /// Degrees of freedom of the residual variance.
    pub fn df_resid(&self) -> usize {
        self.n - self.p - self.offset()
    }

    /// `intercept + X β`.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "model has {} regressors, input has {} columns",
                self.p,
                x.cols()
            )));
        }
        let b0 = self.intercept_value();
        let slopes = self.slopes();
        Ok((0..x.rows()).map(|i| b0 + dot(x.row(i), slopes)).collect())
    }
}

/// Fits `y ~ X` (optionally with an intercept) by least squares.
pub fn ols_fit(x: &Matrix, y: &[f64], intercept: bool) -> Result<OlsFit> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "X has {n} rows, y has {} entries",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response".into()));
    }
    let design = if intercept { x.with_intercept() } else { x.clone() };
    let k = design.cols();
    if n <= k {
        return Err(Error::InvalidArgument(format!(
            "need more than {k} rows to fit {k} coefficients, got {n}"
        )));
    }
    let qr = PivotedQr::new(&design).map_err(|e| match e {
        // report the user's column index, not the augmented one
        Error::RankDeficient { column } if intercept => Error::RankDeficient {
            column: column.saturating_sub(1),
        },
        other => other,
    })?;
    let coefficients = qr.solve(y)?;
    let fitted = design.matvec(&coefficients)?;
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let rss = dot(&residuals, &residuals);
    let df = (n - k) as f64;
    let sigma2_hat = rss / df;
    let sigma2_n = rss / n as f64;

    let inv_diag = qr.gram_inverse().diag();
    let std_errors: Vec<f64> = inv_diag.iter().map(|d| (sigma2_hat * d).sqrt()).collect();
    let t_values: Vec<f64> = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| b / se)
        .collect();
    let f_values = t_values.iter().map(|t| t * t).collect();

    let tss = if intercept {
        let ym = mean(y);
        y.iter().map(|v| (v - ym) * (v - ym)).sum::<f64>()
    } else {
        dot(y, y)
    };
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let tss_df = if intercept { n as f64 - 1.0 } else { n as f64 };
    let r2_adjusted = if tss > 0.0 {
        1.0 - (rss / df) / (tss / tss_df)
    } else {
        1.0
    };

    Ok(OlsFit {
        coefficients,
        residuals,
        sigma2_hat,
        sigma2_n,
        std_errors,
        t_values,
        f_values,
        r2,
        r2_adjusted,
        n,
        p: x.cols(),
        intercept,
    })
}

/// Coefficients of the reduced regression obtained by dropping regressor
/// `z_index` from `full`.
///
/// `alpha_hat` holds the coefficients of the dropped column regressed on the
/// remaining ones (same intercept convention and column order as `full`
/// minus the dropped column). Uses `β̂₀ = β̂_x + α̂ β̂_z`.
pub fn ols_omit_update(full: &OlsFit, z_index: usize, alpha_hat: &[f64]) -> Result<Vec<f64>> {
    let offset = usize::from(full.intercept);
    let zpos = offset + z_index;
    if zpos >= full.coefficients.len() {
        return Err(Error::DimensionMismatch(format!(
            "regressor {z_index} out of range for {} regressors",
            full.p
        )));
    }
    if alpha_hat.len() + 1 != full.coefficients.len() {
        return Err(Error::DimensionMismatch(format!(
            "alpha has {} coefficients, expected {}",
            alpha_hat.len(),
            full.coefficients.len() - 1
        )));
    }
    let beta_z = full.coefficients[zpos];
    Ok(full
        .coefficients
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != zpos)
        .zip(alpha_hat)
        .map(|((_, b), a)| b + a * beta_z)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_without_intercept() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let fit = ols_fit(&x, &[2.0, 4.0, 6.0], false).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-14);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-14));
        assert!(fit.sigma2_hat.abs() < 1e-28);
    }

    #[test]
    fn constant_response_has_zero_slopes() {
        let x = Matrix::from_fn(20, 2, |i, j| ((i * (j + 3)) % 7) as f64 + 0.1 * i as f64);
        let fit = ols_fit(&x, &[4.5; 20], true).unwrap();
        assert!((fit.coefficients[0] - 4.5).abs() < 1e-12);
        assert!(fit.slopes().iter().all(|b| b.abs() < 1e-12));
        let pred = fit.predict(&x).unwrap();
        assert!(pred.iter().all(|v| (v - 4.5).abs() < 1e-12));
    }

    #[test]
    fn rank_deficiency_reported_on_user_column() {
        let x = Matrix::from_columns(&[
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![0.5, 0.1, 0.9, 0.3, 0.2],
            vec![2.0, 4.0, 6.0, 8.0, 10.0],
        ])
        .unwrap();
        let err = ols_fit(&x, &[1.0, 2.0, 3.0, 4.0, 6.0], true).unwrap_err();
        match err {
            Error::RankDeficient { column } => assert!(column == 0 || column == 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mismatched_lengths() {
        let x = Matrix::zeros(4, 1);
        assert!(matches!(
            ols_fit(&x, &[1.0, 2.0], false),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn f_values_are_squared_t_values() {
        let x = Matrix::from_fn(30, 2, |i, j| ((i as f64) * 0.37 + j as f64).sin());
        let y: Vec<f64> = (0..30).map(|i| (i as f64 * 0.11).cos()).collect();
        let fit = ols_fit(&x, &y, true).unwrap();
        for (t, f) in fit.t_values.iter().zip(&fit.f_values) {
            assert_eq!(t * t, *f);
        }
        let rss: f64 = fit.residuals.iter().map(|r| r * r).sum();
        assert!((fit.sigma2_hat - rss / 27.0).abs() < 1e-15);
    }
}
