use super::matrix::{dot, Matrix};
use super::ols::ols_fit;
use crate::error::{Error, Result};

/// Partial correlation of columns `j` and `k` given all remaining columns,
/// computed as the correlation of the residuals of `x_j` and `x_k` each
/// regressed (with intercept) on the rest.
pub fn partial_correlation_direct(x: &Matrix, j: usize, k: usize) -> Result<f64> {
    let p = x.cols();
    if j >= p || k >= p || j == k {
        return Err(Error::InvalidArgument(format!(
            "need two distinct columns below {p}, got ({j}, {k})"
        )));
    }
    let rest: Vec<usize> = (0..p).filter(|&c| c != j && c != k).collect();
    let r = x.select_columns(&rest);
    let ej = ols_fit(&r, &x.column(j), true)?.residuals;
    let ek = ols_fit(&r, &x.column(k), true)?.residuals;
    Ok(dot(&ej, &ek) / (dot(&ej, &ej) * dot(&ek, &ek)).sqrt())
}

fn residual(a: &[f64], b: &[f64]) -> Vec<f64> {
    let bb = dot(b, b);
    let mut r = a.to_vec();
    // second pass removes what cancellation left behind
    for _ in 0..2 {
        let c = dot(&r, b) / bb;
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
    }
    r
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (dot(a, a) * dot(b, b)).sqrt()
}

/// `(cos∠(a − P_b a, b − P_a b), cos∠(a, b))`; the first is the negative
/// of the second for any non-collinear pair.
pub fn residual_angle_cosines(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "vectors of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let ra = residual(a, b);
    let rb = residual(b, a);
    if dot(&ra, &ra) == 0.0 || dot(&rb, &rb) == 0.0 {
        return Err(Error::RankDeficient { column: 1 });
    }
    Ok((cosine(&ra, &rb), cosine(a, b)))
}
