//! Householder QR with column pivoting.

use super::matrix::{dot, Matrix};
use crate::error::{Error, Result};

/// A column is declared collinear when its pivot falls below this fraction
/// of the largest pivot.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// `X P = Q R`, stored compactly: Householder vectors on and below the
/// diagonal of `factors`, the strict upper triangle of `R` above it, and the
/// diagonal of `R` in `r_diag`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    factors: Matrix,
    r_diag: Vec<f64>,
    betas: Vec<f64>,
    perm: Vec<usize>,
}

impl PivotedQr {
    /// Factorizes `x`, failing with `RankDeficient` if it does not have full
    /// column rank within [`RANK_TOLERANCE`].
    pub fn new(x: &Matrix) -> Result<Self> {
        let (n, p) = x.shape();
        if n < p {
            return Err(Error::RankDeficient { column: n });
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("design matrix".into()));
        }
        let mut a = x.clone();
        let mut perm: Vec<usize> = (0..p).collect();
        let mut r_diag = vec![0.0; p];
        let mut betas = vec![0.0; p];
        let mut largest = 0.0_f64;

        for k in 0..p {
            // pick the remaining column with the largest residual norm
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..p {
                let s: f64 = (k..n).map(|i| a[(i, j)] * a[(i, j)]).sum();
                if s > best_norm {
                    best_norm = s;
                    best = j;
                }
            }
            if best != k {
                for i in 0..n {
                    let tmp = a[(i, k)];
                    a[(i, k)] = a[(i, best)];
                    a[(i, best)] = tmp;
                }
                perm.swap(k, best);
            }
            let col_norm = best_norm.sqrt();
            if k == 0 {
                largest = col_norm;
            }
            if largest == 0.0 || col_norm <= RANK_TOLERANCE * largest {
                return Err(Error::RankDeficient { column: perm[k] });
            }
            let x0 = a[(k, k)];
            let alpha = if x0 >= 0.0 { -col_norm } else { col_norm };
            a[(k, k)] = x0 - alpha;
            let vtv: f64 = (k..n).map(|i| a[(i, k)] * a[(i, k)]).sum();
            let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
            r_diag[k] = alpha;
            betas[k] = beta;
            for j in (k + 1)..p {
                let s: f64 = (k..n).map(|i| a[(i, k)] * a[(i, j)]).sum();
                let f = beta * s;
                if f != 0.0 {
                    for i in k..n {
                        let v = a[(i, k)];
                        a[(i, j)] -= f * v;
                    }
                }
            }
        }
        Ok(Self {
            factors: a,
            r_diag,
            betas,
            perm,
        })
    }

    pub fn ncols(&self) -> usize {
        self.r_diag.len()
    }

    /// Column permutation: factor column `k` is original column `perm()[k]`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Overwrites `y` with `Qᵀ y`.
    pub fn apply_qt(&self, y: &mut [f64]) {
        let n = self.factors.rows();
        for k in 0..self.ncols() {
            let s: f64 = (k..n).map(|i| self.factors[(i, k)] * y[i]).sum();
            let f = self.betas[k] * s;
            if f != 0.0 {
                for (i, yi) in y.iter_mut().enumerate().skip(k) {
                    *yi -= f * self.factors[(i, k)];
                }
            }
        }
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.r_diag[i]
        } else {
            self.factors[(i, j)]
        }
    }

    /// Least-squares solution of `X b = y`, in the original column order.
    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.factors.rows() {
            return Err(Error::DimensionMismatch(format!(
                "response has {} rows, design has {}",
                y.len(),
                self.factors.rows()
            )));
        }
        let p = self.ncols();
        let mut qty = y.to_vec();
        self.apply_qt(&mut qty);
        let mut z = vec![0.0; p];
        for k in (0..p).rev() {
            let s: f64 = ((k + 1)..p).map(|j| self.r(k, j) * z[j]).sum();
            z[k] = (qty[k] - s) / self.r_diag[k];
        }
        let mut b = vec![0.0; p];
        for (k, &orig) in self.perm.iter().enumerate() {
            b[orig] = z[k];
        }
        Ok(b)
    }

    /// `R⁻¹` (upper triangular, permuted order).
    fn r_inverse(&self) -> Matrix {
        let p = self.ncols();
        let mut inv = Matrix::zeros(p, p);
        for j in 0..p {
            inv[(j, j)] = 1.0 / self.r_diag[j];
            for i in (0..j).rev() {
                let s: f64 = ((i + 1)..=j).map(|k| self.r(i, k) * inv[(k, j)]).sum();
                inv[(i, j)] = -s / self.r_diag[i];
            }
        }
        inv
    }

    /// `(XᵀX)⁻¹` in the original column order.
    pub fn gram_inverse(&self) -> Matrix {
        let p = self.ncols();
        let rinv = self.r_inverse();
        let mut out = Matrix::zeros(p, p);
        for a in 0..p {
            for b in a..p {
                let start = a.max(b);
                let s = dot(&rinv.row(a)[start..], &rinv.row(b)[start..]);
                let (oa, ob) = (self.perm[a], self.perm[b]);
                out[(oa, ob)] = s;
                out[(ob, oa)] = s;
            }
        }
        out
    }
}
