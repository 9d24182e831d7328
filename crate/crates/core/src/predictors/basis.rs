use serde::{Deserialize, Serialize};

use super::{check_width, ModelFactory, ModelFamily, PredictionFunction};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{ols_fit, Matrix, OlsFit};

/// A feature transform over raw column indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTerm {
    Identity(usize),
    Cosine(usize),
    Product(usize, usize),
}

impl BasisTerm {
    fn eval(&self, row: &[f64]) -> f64 {
        match *self {
            BasisTerm::Identity(j) => row[j],
            BasisTerm::Cosine(j) => row[j].cos(),
            BasisTerm::Product(j, k) => row[j] * row[k],
        }
    }

    fn columns(&self) -> Vec<usize> {
        match *self {
            BasisTerm::Identity(j) | BasisTerm::Cosine(j) => vec![j],
            BasisTerm::Product(j, k) => vec![j, k],
        }
    }

    fn remap(&self, map: &dyn Fn(usize) -> Option<usize>) -> Option<BasisTerm> {
        Some(match *self {
            BasisTerm::Identity(j) => BasisTerm::Identity(map(j)?),
            BasisTerm::Cosine(j) => BasisTerm::Cosine(map(j)?),
            BasisTerm::Product(j, k) => BasisTerm::Product(map(j)?, map(k)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub terms: Vec<BasisTerm>,
}

impl BasisSpec {
    pub fn new(terms: Vec<BasisTerm>) -> Self {
        Self { terms }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::InvalidArgument("empty basis".into()));
        }
        for t in &self.terms {
            if let Some(&bad) = t.columns().iter().find(|&&c| c >= p) {
                return Err(Error::InvalidArgument(format!(
                    "basis term {t:?} references column {bad}, only {p} available"
                )));
            }
        }
        Ok(())
    }

    /// Applies every term to every row.
    pub fn featurize(&self, x: &Matrix) -> Matrix {
        Matrix::from_fn(x.rows(), self.terms.len(), |i, t| self.terms[t].eval(x.row(i)))
    }

    /// The basis restricted to the raw columns in `keep`, re-indexed to
    /// positions within `keep`. Terms touching a dropped column disappear.
    pub fn restrict(&self, keep: &[usize]) -> BasisSpec {
        let map = |j: usize| keep.iter().position(|&k| k == j);
        BasisSpec {
            terms: self.terms.iter().filter_map(|t| t.remap(&map)).collect(),
        }
    }
}

/// OLS (with intercept) on a fixed feature basis of the raw columns.
#[derive(Debug, Clone)]
pub struct BasisLinearModel {
    names: Vec<String>,
    basis: BasisSpec,
    fit: OlsFit,
}

impl BasisLinearModel {
    pub fn ols(&self) -> &OlsFit {
        &self.fit
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }
}

pub fn fit_basis_linear(train: &Dataset, basis: &BasisSpec) -> Result<BasisLinearModel> {
    basis.validate(train.p())?;
    let features = basis.featurize(&train.x);
    let fit = ols_fit(&features, &train.y, true)?;
    Ok(BasisLinearModel {
        names: train.names.clone(),
        basis: basis.clone(),
        fit,
    })
}

impl PredictionFunction for BasisLinearModel {
    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_width(x, self.names.len())?;
        self.fit.predict(&self.basis.featurize(x))
    }

    fn variable_names(&self) -> &[String] {
        &self.names
    }

    fn family(&self) -> ModelFamily {
        ModelFamily::BasisLinear
    }

    fn hyperparameters(&self) -> Vec<(String, String)> {
        vec![("basis".into(), format!("{:?}", self.basis.terms))]
    }
}

#[derive(Debug, Clone)]
pub struct BasisFactory {
    pub basis: BasisSpec,
}

impl ModelFactory for BasisFactory {
    fn family(&self) -> ModelFamily {
        ModelFamily::BasisLinear
    }

    fn fit(&self, train: &Dataset) -> Result<Box<dyn PredictionFunction>> {
        Ok(Box::new(fit_basis_linear(train, &self.basis)?))
    }

    fn fit_subset(&self, train: &Dataset, keep: &[usize]) -> Result<Box<dyn PredictionFunction>> {
        let reduced = self.basis.restrict(keep);
        if reduced.terms.is_empty() {
            return Err(Error::RefitFailed(
                "no basis term survives the omission".into(),
            ));
        }
        Ok(Box::new(fit_basis_linear(&train.select_columns(keep), &reduced)?))
    }
}
