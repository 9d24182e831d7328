//! Reference computations written independently of the library's solvers.
#![allow(dead_code)]

use ghostvar_core::linalg::RngState;
use ghostvar_core::{Dataset, Matrix, SplitSample};

/// Gauss–Jordan inverse with partial pivoting.
pub fn gj_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        assert!(d.abs() > 1e-300, "singular oracle system");
        for v in m[c].iter_mut() {
            *v /= d;
        }
        let pivot_row = m[c].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != c {
                let f = row[c];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub struct OracleFit {
    /// Intercept first.
    pub coef: Vec<f64>,
    pub rss: f64,
    /// `(ZᵀZ)⁻¹` for the design `Z = [1 X]`.
    pub xtx_inv: Vec<Vec<f64>>,
    pub n: usize,
    pub k: usize,
}

impl OracleFit {
    pub fn sigma2_df(&self) -> f64 {
        self.rss / (self.n - self.k) as f64
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows())
            .map(|i| self.coef[0] + x.row(i).iter().zip(&self.coef[1..]).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    /// Squared t statistic of slope `j`.
    pub fn f_stat(&self, j: usize) -> f64 {
        let b = self.coef[j + 1];
        b * b / (self.sigma2_df() * self.xtx_inv[j + 1][j + 1])
    }
}

/// OLS with intercept through the normal equations.
pub fn oracle_ols(x: &Matrix, y: &[f64]) -> OracleFit {
    let (n, p) = x.shape();
    let k = p + 1;
    let z = |i: usize, j: usize| if j == 0 { 1.0 } else { x[(i, j - 1)] };
    let mut ztz = vec![vec![0.0; k]; k];
    let mut zty = vec![0.0; k];
    for i in 0..n {
        for a in 0..k {
            zty[a] += z(i, a) * y[i];
            for b in 0..k {
                ztz[a][b] += z(i, a) * z(i, b);
            }
        }
    }
    let inv = gj_inverse(&ztz);
    let coef: Vec<f64> = (0..k).map(|a| (0..k).map(|b| inv[a][b] * zty[b]).sum()).collect();
    let fit = OracleFit {
        coef,
        rss: 0.0,
        xtx_inv: inv,
        n,
        k,
    };
    let pred = fit.predict(x);
    let rss = y.iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum();
    OracleFit { rss, ..fit }
}

/// Residuals of column `j` regressed with intercept on the other columns.
pub fn oracle_residual(x: &Matrix, j: usize) -> Vec<f64> {
    let others = x.without_column(j);
    let col = x.column(j);
    let fit = oracle_ols(&others, &col);
    col.iter().zip(fit.predict(&others)).map(|(a, b)| a - b).collect()
}

/// Unbiased covariance, computed directly.
pub fn oracle_covariance(x: &Matrix) -> Vec<Vec<f64>> {
    let (n, p) = x.shape();
    let means: Vec<f64> = (0..p).map(|j| x.column(j).iter().sum::<f64>() / n as f64).collect();
    let mut s = vec![vec![0.0; p]; p];
    for i in 0..n {
        for a in 0..p {
            for b in 0..p {
                s[a][b] += (x[(i, a)] - means[a]) * (x[(i, b)] - means[b]);
            }
        }
    }
    s.iter()
        .map(|r| r.iter().map(|v| v / (n - 1) as f64).collect())
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// A linear instance with correlated columns and mixed-sign slopes; train
/// and test drawn from the same law.
pub fn random_linear_split(n1: usize, n2: usize, p: usize, seed: u64) -> SplitSample {
    let mut rng = RngState::new(seed);
    let mix = Matrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { 0.6 * rng.standard_normal() });
    let beta: Vec<f64> = (0..p).map(|_| 2.0 * rng.standard_normal()).collect();
    let means: Vec<f64> = (0..p).map(|_| rng.uniform(-3.0, 3.0)).collect();
    let mut draw = |n: usize| {
        let z = Matrix::from_fn(n, p, |_, _| rng.standard_normal());
        let x = z.matmul(&mix).unwrap();
        let x = Matrix::from_fn(n, p, |i, j| x[(i, j)] + means[j]);
        let y = (0..n)
            .map(|i| 0.7 + x.row(i).iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + 1.5 * rng.standard_normal())
            .collect();
        Dataset::with_default_names(x, y).unwrap()
    };
    let train = draw(n1);
    let test = draw(n2);
    SplitSample::new(train, test).unwrap()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature over 256 equal panels, so that narrow peaks
/// are not missed by the first coarse estimate.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const PANELS: usize = 256;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (fa, fb, fm) = (f(lo), f(hi), f(0.5 * (lo + hi)));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson(f, lo, hi, fa, fm, fb, whole, tol / PANELS as f64, 40)
        })
        .sum()
}

/// F distribution function by quadrature of the beta density after the
/// substitution `t = s²`, normalized numerically.
pub fn f_cdf_quadrature(x: f64, d1: f64, d2: f64) -> f64 {
    let (a, b) = (d1 / 2.0, d2 / 2.0);
    let g = move |s: f64| {
        if s <= 0.0 && 2.0 * a - 1.0 < 0.0 {
            return 0.0;
        }
        2.0 * s.powf(2.0 * a - 1.0) * (1.0 - s * s).max(0.0).powf(b - 1.0)
    };
    let t = d1 * x / (d1 * x + d2);
    let upper = t.sqrt();
    let scale = integrate(&g, 0.0, 1.0, 1e-15);
    integrate(&g, 0.0, upper, 1e-15) / scale
}

/// Quantile by bisection on the quadrature distribution function.
pub fn f_quantile_quadrature(d1: f64, d2: f64, prob: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while f_cdf_quadrature(hi, d1, d2) < prob {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_cdf_quadrature(mid, d1, d2) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}
