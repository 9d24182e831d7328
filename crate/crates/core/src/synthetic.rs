//! Seeded simulation designs.
//!
//! * `ex1`: `(X₁, X₂, X₃)` standard normal, `corr(X₂, X₃) = 0.95`, otherwise
//!   independent; `Y = X₁ + X₂ + X₃ + ε`, `Var(ε) = 1`.
//! * `ex2`: blocks `(X₁, X₂)` and `(X₃, X₄, X₅)` equicorrelated at 0.95;
//!   `Y = cos X₁ + ½(cos X₂ + cos X₃) + ½X₂X₃ + cos X₄ + cos X₅ + ε`,
//!   `Var(ε) = 1/4`.
//! * `ex3`: 200 variables in four blocks of 50; blocks 2 and 4
//!   equicorrelated at 0.95, blocks 1 and 3 independent;
//!   `Y = ½ Σ block₁ + Σ block₂ + ε`, `Var(ε) = 1`.
//!
//! Training rows come from stream 1 of the seed and test rows from stream 2,
//! so the two samples are independent draws of the same law.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SplitSample};
use crate::error::{Error, Result};
use crate::linalg::{mvn_sample, spd_inverse, Matrix, RngState};
use crate::predictors::{BasisSpec, BasisTerm};

pub const EX3_BLOCK: usize = 50;
const RHO: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Ex1,
    Ex2,
    Ex3,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Ex1 => "ex1",
            Scenario::Ex2 => "ex2",
            Scenario::Ex3 => "ex3",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ex1" => Ok(Scenario::Ex1),
            "ex2" => Ok(Scenario::Ex2),
            "ex3" => Ok(Scenario::Ex3),
            other => Err(Error::InvalidArgument(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub n1: usize,
    pub n2: usize,
    pub seed: u64,
    /// Drop every correlation between explanatory variables.
    pub uncorrelated: bool,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            n1: 2000,
            n2: 1000,
            seed,
            uncorrelated: false,
        }
    }

    pub fn p(&self) -> usize {
        match self.scenario {
            Scenario::Ex1 => 3,
            Scenario::Ex2 => 5,
            Scenario::Ex3 => 4 * EX3_BLOCK,
        }
    }

    fn rho(&self) -> f64 {
        if self.uncorrelated {
            0.0
        } else {
            RHO
        }
    }

    /// Population covariance of the explanatory variables.
    pub fn covariance(&self) -> Matrix {
        let rho = self.rho();
        let block_of: Box<dyn Fn(usize) -> Option<usize>> = match self.scenario {
            Scenario::Ex1 => Box::new(|j| (j > 0).then_some(0)),
            Scenario::Ex2 => Box::new(|j| Some(usize::from(j >= 2))),
            Scenario::Ex3 => Box::new(|j| {
                let b = j / EX3_BLOCK;
                (b == 1 || b == 3).then_some(b)
            }),
        };
        let p = self.p();
        Matrix::from_fn(p, p, |j, k| {
            if j == k {
                1.0
            } else {
                match (block_of(j), block_of(k)) {
                    (Some(a), Some(b)) if a == b => rho,
                    _ => 0.0,
                }
            }
        })
    }

    fn check(&self) -> Result<()> {
        if self.n1 < 10 || self.n2 < 10 {
            return Err(Error::InvalidArgument(format!(
                "sample sizes must be at least 10, got {} and {}",
                self.n1, self.n2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Slopes of the linear designs; `None` for the additive design.
    pub coefficients: Option<Vec<f64>>,
    pub covariance: Matrix,
    pub noise_variance: f64,
    /// `Var(X_j | X_{−j}) = 1 / (Σ⁻¹)_jj`.
    pub conditional_variances: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioData {
    pub spec: ScenarioSpec,
    pub split: SplitSample,
    pub truth: GroundTruth,
    /// Correctly specified feature basis for the additive design.
    pub oracle_basis: Option<BasisSpec>,
}

fn ex2_response(row: &[f64]) -> f64 {
    row[0].cos() + 0.5 * (row[1].cos() + row[2].cos()) + 0.5 * row[1] * row[2] + row[3].cos() + row[4].cos()
}

pub fn ex2_oracle_basis() -> BasisSpec {
    let mut terms: Vec<BasisTerm> = (0..5).map(BasisTerm::Cosine).collect();
    terms.push(BasisTerm::Product(1, 2));
    BasisSpec::new(terms)
}

fn ex3_features(n: usize, rho: f64, rng: &mut RngState) -> Matrix {
    let p = 4 * EX3_BLOCK;
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut x = Matrix::zeros(n, p);
    for i in 0..n {
        let row = x.row_mut(i);
        for block in 0..4 {
            let cols = block * EX3_BLOCK..(block + 1) * EX3_BLOCK;
            if block == 1 || block == 3 {
                let f = rng.standard_normal();
                for j in cols {
                    row[j] = a * f + b * rng.standard_normal();
                }
            } else {
                for j in cols {
                    row[j] = rng.standard_normal();
                }
            }
        }
    }
    x
}

fn draw(spec: &ScenarioSpec, n: usize, rng: &mut RngState) -> Result<Dataset> {
    let p = spec.p();
    let x = match spec.scenario {
        Scenario::Ex3 => ex3_features(n, spec.rho(), rng),
        _ => mvn_sample(&vec![0.0; p], &spec.covariance(), n, rng)?,
    };
    let y = (0..n)
        .map(|i| {
            let row = x.row(i);
            match spec.scenario {
                Scenario::Ex1 => row.iter().sum::<f64>() + rng.standard_normal(),
                Scenario::Ex2 => ex2_response(row) + 0.5 * rng.standard_normal(),
                Scenario::Ex3 => {
                    let b1: f64 = row[..EX3_BLOCK].iter().sum();
                    let b2: f64 = row[EX3_BLOCK..2 * EX3_BLOCK].iter().sum();
                    0.5 * b1 + b2 + rng.standard_normal()
                }
            }
        })
        .collect();
    Dataset::with_default_names(x, y)
}

pub fn generate(spec: &ScenarioSpec) -> Result<ScenarioData> {
    spec.check()?;
    let train = draw(spec, spec.n1, &mut RngState::stream(spec.seed, 1))?;
    let test = draw(spec, spec.n2, &mut RngState::stream(spec.seed, 2))?;
    let covariance = spec.covariance();
    let precision = spd_inverse(&covariance)?;
    let conditional_variances = precision.diag().iter().map(|d| 1.0 / d).collect();
    let (coefficients, noise_variance) = match spec.scenario {
        Scenario::Ex1 => (Some(vec![1.0; 3]), 1.0),
        Scenario::Ex2 => (None, 0.25),
        Scenario::Ex3 => {
            let mut c = vec![0.0; 4 * EX3_BLOCK];
            c[..EX3_BLOCK].fill(0.5);
            c[EX3_BLOCK..2 * EX3_BLOCK].fill(1.0);
            (Some(c), 1.0)
        }
    };
    Ok(ScenarioData {
        spec: *spec,
        split: SplitSample::new(train, test)?,
        truth: GroundTruth {
            coefficients,
            covariance,
            noise_variance,
            conditional_variances,
        },
        oracle_basis: (spec.scenario == Scenario::Ex2).then(ex2_oracle_basis),
    })
}

fn generate_as(spec: &ScenarioSpec, scenario: Scenario) -> Result<ScenarioData> {
    generate(&ScenarioSpec { scenario, ..*spec })
}

pub fn gen_example1(spec: &ScenarioSpec) -> Result<SplitSample> {
    Ok(generate_as(spec, Scenario::Ex1)?.split)
}

/// Also returns the oracle basis `{cos x₁, …, cos x₅, x₂x₃}`.
pub fn gen_example2(spec: &ScenarioSpec) -> Result<(SplitSample, BasisSpec)> {
    Ok((generate_as(spec, Scenario::Ex2)?.split, ex2_oracle_basis()))
}

pub fn gen_example3(spec: &ScenarioSpec) -> Result<SplitSample> {
    Ok(generate_as(spec, Scenario::Ex3)?.split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::correlation;

    #[test]
    fn reproducible() {
        let spec = ScenarioSpec { n1: 50, n2: 30, ..ScenarioSpec::new(Scenario::Ex2, 4) };
        let a = gen_example2(&spec).unwrap().0;
        let b = gen_example2(&spec).unwrap().0;
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        assert_ne!(a.train.x.row(0), a.test.x.row(0));
    }

    #[test]
    fn ex3_equicorrelated_conditional_variance() {
        let spec = ScenarioSpec { n1: 10, n2: 10, ..ScenarioSpec::new(Scenario::Ex3, 1) };
        let data = generate(&spec).unwrap();
        let cv = &data.truth.conditional_variances;
        // 1 − ρ²·(k)/(1 + (k−1)ρ) with k = 49 others
        let k = 49.0;
        let expected = 1.0 - RHO * RHO * k / (1.0 + (k - 1.0) * RHO);
        assert!((cv[60] - expected).abs() < 1e-10);
        assert!((cv[10] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ex3_block_correlations() {
        let spec = ScenarioSpec { n1: 4000, n2: 10, ..ScenarioSpec::new(Scenario::Ex3, 2) };
        let x = gen_example3(&spec).unwrap().train.x;
        assert!((correlation(&x.column(50), &x.column(51)) - 0.95).abs() < 0.01);
        assert!(correlation(&x.column(0), &x.column(50)).abs() < 0.05);
        assert!(correlation(&x.column(150), &x.column(199)) > 0.9);
    }

    #[test]
    fn too_small_rejected() {
        let spec = ScenarioSpec { n1: 5, ..ScenarioSpec::new(Scenario::Ex1, 0) };
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in [Scenario::Ex1, Scenario::Ex2, Scenario::Ex3] {
            assert_eq!(s.to_string().parse::<Scenario>().unwrap(), s);
        }
    }
}
