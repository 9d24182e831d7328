//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// stored as columns. Each eigenvector is signed so that its
/// largest-magnitude component is positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl SymEigen {
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let q = &self.eigenvectors;
        let n = q.rows();
        Matrix::from_fn(n, n, |i, j| {
            self.eigenvalues
                .iter()
                .enumerate()
                .map(|(k, l)| q[(i, k)] * l * q[(j, k)])
                .sum()
        })
    }
}

pub fn sym_eigen(s: &Matrix) -> Result<SymEigen> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if !s.is_finite() {
        return Err(Error::NonFinite("matrix passed to sym_eigen".into()));
    }
    let scale = s.max_abs();
    let asym = s.asymmetry();
    if asym > SYMMETRY_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric(asym));
    }

    let n = s.rows();
    // symmetrize exactly, work on the upper triangle
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let mut v = Matrix::identity(n);
    let mut converged = n <= 1;

    for _sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag_norm: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off == 0.0 || off.sqrt() <= f64::EPSILON * 1e-2 * diag_norm.sqrt() {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // negligible next to both diagonal entries
                let g = 100.0 * apq.abs();
                if g + app.abs() == app.abs() && g + aqq.abs() == aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = v.column(src);
        let lead = col
            .iter()
            .copied()
            .fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for (i, x) in col.iter().enumerate() {
            eigenvectors[(i, dst)] = sign * x;
        }
    }
    Ok(SymEigen {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_spectrum() {
        let e = sym_eigen(&Matrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_is_sorted_with_axis_vectors() {
        let e = sym_eigen(&Matrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.eigenvector(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(e.eigenvector(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(e.eigenvector(2), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eigen(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn largest_component_is_positive() {
        let m = Matrix::from_rows(&[[2.0, -1.0], [-1.0, 2.0]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        for k in 0..2 {
            let v = e.eigenvector(k);
            let lead = v.iter().fold(0.0_f64, |b, &x| if x.abs() > b.abs() { x } else { b });
            assert!(lead > 0.0);
        }
    }
}
