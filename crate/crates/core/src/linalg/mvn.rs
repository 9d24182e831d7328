//! Pivoted Cholesky and multivariate-normal sampling.

use super::matrix::Matrix;
use super::rng::RngState;
use crate::error::{Error, Result};

const PSD_TOLERANCE: f64 = 1e-12;

/// Lower-triangular `L` with `L Lᵀ = cov` for a symmetric positive
/// semi-definite `cov`, computed with diagonal pivoting. Pivots below
/// `1e-12 × max diagonal` are treated as zero; a clearly negative pivot
/// fails with `NotPositiveSemiDefinite`.
pub fn psd_factor(cov: &Matrix) -> Result<Matrix> {
    if !cov.is_square() {
        return Err(Error::DimensionMismatch("covariance must be square".into()));
    }
    let n = cov.rows();
    let scale = cov.diag().iter().fold(0.0_f64, |m, &d| m.max(d.abs()));
    if cov.asymmetry() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotPositiveSemiDefinite);
    }
    let tol = PSD_TOLERANCE * scale;
    let mut a = cov.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    // rows of `l` follow the pivoted order until the final un-permutation
    let mut l = Matrix::zeros(n, n);
    for k in 0..n {
        let (best, best_val) = (k..n)
            .map(|i| (i, a[(i, i)]))
            .fold((k, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_val < -tol {
            return Err(Error::NotPositiveSemiDefinite);
        }
        if best_val <= tol {
            // remaining Schur complement is numerically zero
            for i in k..n {
                for j in k..n {
                    if a[(i, j)].abs() > 1e-8 * scale.max(f64::MIN_POSITIVE) {
                        return Err(Error::NotPositiveSemiDefinite);
                    }
                }
            }
            break;
        }
        if best != k {
            swap_sym(&mut a, k, best);
            for j in 0..k {
                let t = l[(k, j)];
                l[(k, j)] = l[(best, j)];
                l[(best, j)] = t;
            }
            perm.swap(k, best);
        }
        let pivot = a[(k, k)].sqrt();
        l[(k, k)] = pivot;
        for i in (k + 1)..n {
            l[(i, k)] = a[(i, k)] / pivot;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..=i {
                let v = a[(i, j)] - l[(i, k)] * l[(j, k)];
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
    }
    let mut out = Matrix::zeros(n, n);
    for (k, &orig) in perm.iter().enumerate() {
        for j in 0..n {
            out[(orig, j)] = l[(k, j)];
        }
    }
    Ok(out)
}

fn swap_sym(a: &mut Matrix, i: usize, j: usize) {
    let n = a.rows();
    for k in 0..n {
        let t = a[(i, k)];
        a[(i, k)] = a[(j, k)];
        a[(j, k)] = t;
    }
    for k in 0..n {
        let t = a[(k, i)];
        a[(k, i)] = a[(k, j)];
        a[(k, j)] = t;
    }
}

/// Draws `n` i.i.d. rows from `N(mean, cov)`.
pub fn mvn_sample(mean: &[f64], cov: &Matrix, n: usize, rng: &mut RngState) -> Result<Matrix> {
    if cov.rows() != mean.len() {
        return Err(Error::DimensionMismatch(format!(
            "mean has length {}, covariance is {}x{}",
            mean.len(),
            cov.rows(),
            cov.cols()
        )));
    }
    let l = psd_factor(cov)?;
    let p = mean.len();
    let mut out = Matrix::zeros(n, p);
    let mut z = vec![0.0; p];
    for i in 0..n {
        z.iter_mut().for_each(|v| *v = rng.standard_normal());
        let row = out.row_mut(i);
        for (a, r) in row.iter_mut().enumerate() {
            *r = mean[a] + (0..p).map(|b| l[(a, b)] * z[b]).sum::<f64>();
        }
    }
    Ok(out)
}

/// Inverse of a symmetric positive definite matrix by Cholesky;
/// fails with `RankDeficient` when a pivot vanishes.
pub fn spd_inverse(s: &Matrix) -> Result<Matrix> {
    let n = s.rows();
    if !s.is_square() {
        return Err(Error::DimensionMismatch("inverse needs a square matrix".into()));
    }
    let mut l = Matrix::zeros(n, n);
    let max_diag = s.diag().iter().fold(0.0_f64, |m, &d| m.max(d));
    for j in 0..n {
        let d = s[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if d <= 1e-14 * max_diag || !d.is_finite() {
            return Err(Error::RankDeficient { column: j });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let v = s[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = v / dj;
        }
    }
    // L⁻¹ by forward substitution, then S⁻¹ = L⁻ᵀ L⁻¹
    let mut linv = Matrix::zeros(n, n);
    for j in 0..n {
        linv[(j, j)] = 1.0 / l[(j, j)];
        for i in (j + 1)..n {
            let s: f64 = (j..i).map(|k| l[(i, k)] * linv[(k, j)]).sum();
            linv[(i, j)] = -s / l[(i, i)];
        }
    }
    Ok(Matrix::from_fn(n, n, |i, j| {
        (i.max(j)..n).map(|k| linv[(k, i)] * linv[(k, j)]).sum()
    }))
}
