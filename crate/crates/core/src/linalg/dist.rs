//! F-distribution CDF and quantile through the regularized incomplete beta
//! function.

use crate::error::{Error, Result};

/// Lanczos approximation (g = 7, n = 9) of `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` and its complement `1 - I_x(a, b)`,
/// each computed without cancellation.
pub fn beta_reg_pair(x: f64, a: f64, b: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        let v = front * beta_cf(x, a, b) / a;
        (v, 1.0 - v)
    } else {
        let w = front * beta_cf(1.0 - x, b, a) / b;
        (1.0 - w, w)
    }
}

pub fn beta_reg(x: f64, a: f64, b: f64) -> f64 {
    beta_reg_pair(x, a, b).0
}

fn check_df(d1: f64, d2: f64) -> Result<()> {
    if !(d1 >= 1.0 && d2 >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "F degrees of freedom must be >= 1, got ({d1}, {d2})"
        )));
    }
    Ok(())
}

/// CDF of the F(d1, d2) distribution.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_df(d1, d2)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let u = d1 * x / (d1 * x + d2);
    Ok(beta_reg(u, 0.5 * d1, 0.5 * d2))
}

/// Quantile of the F(d1, d2) distribution: the `x` with `F_cdf(x) = prob`.
///
/// Inverts the incomplete beta in `u = d1 x / (d1 x + d2)` by Newton steps
/// safeguarded with bisection, then maps back to `x`.
pub fn f_quantile(d1: usize, d2: usize, prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::InvalidProbability(prob));
    }
    let (d1, d2) = (d1 as f64, d2 as f64);
    check_df(d1, d2)?;
    let (a, b) = (0.5 * d1, 0.5 * d2);
    let ln_b = ln_beta(a, b);

    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut u = 0.5;
    for _ in 0..500 {
        let (cdf, ccdf) = beta_reg_pair(u, a, b);
        // cdf(u) - prob, taken from the upper tail when prob is large
        let err = if prob < 0.5 { cdf - prob } else { (1.0 - prob) - ccdf };
        if err == 0.0 {
            break;
        }
        if err > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let ln_pdf = (a - 1.0) * u.ln() + (b - 1.0) * (1.0 - u).ln() - ln_b;
        let pdf = ln_pdf.exp();
        let mut next = u - err / pdf;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 1e-17 * u.max(1e-300) || hi - lo <= 1e-17 * hi {
            u = next;
            break;
        }
        u = next;
    }
    let one_minus_u = 1.0 - u;
    Ok(d2 * u / (d1 * one_minus_u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0_f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "n = {n}");
            fact *= n as f64;
        }
        let half = ln_gamma(0.5);
        assert!((half - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn beta_reg_symmetry() {
        for &(x, a, b) in &[(0.3, 2.0, 5.0), (0.9, 0.5, 500.0), (0.01, 1.0, 1.0)] {
            let lhs = beta_reg(x, a, b);
            let rhs = 1.0 - beta_reg(1.0 - x, b, a);
            assert!((lhs - rhs).abs() < 1e-14);
        }
        // I_x(1, 1) = x
        assert!((beta_reg(0.37, 1.0, 1.0) - 0.37).abs() < 1e-15);
    }

    #[test]
    fn median_round_trip() {
        let q = f_quantile(1, 10, 0.5).unwrap();
        assert!((f_cdf(q, 1.0, 10.0).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn invalid_probability() {
        assert!(matches!(f_quantile(1, 10, 0.0), Err(Error::InvalidProbability(_))));
        assert!(matches!(f_quantile(1, 10, 1.0), Err(Error::InvalidProbability(_))));
        assert!(matches!(f_quantile(1, 10, f64::NAN), Err(Error::InvalidProbability(_))));
    }

    #[test]
    fn f_one_d2_is_squared_t() {
        // F(1, d) quantile at p equals t(d) quantile at (1 + p)/2, squared.
        // t_{0.975, 10} = 2.228138851986...
        let q = f_quantile(1, 10, 0.95).unwrap();
        assert!((q - 2.228_138_851_986_273_f64.powi(2)).abs() < 1e-9);
    }
}
