//! Prediction functions and the families that fit them.
//!
//! The relevance machinery only ever calls [`PredictionFunction::predict`];
//! everything learned from the training sample lives behind that call.

mod basis;
mod external;
mod linear;
mod mlp;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::linalg::Matrix;

pub use basis::{fit_basis_linear, BasisFactory, BasisLinearModel, BasisSpec, BasisTerm};
pub use external::{external_predictor, ExternalPredictor, ExternalPredictorConfig};
pub use linear::{fit_linear, LinearFactory, LinearModel};
pub use mlp::{fit_mlp, MlpConfig, MlpFactory, MlpModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Linear,
    BasisLinear,
    Mlp,
    External,
}

impl ModelFamily {
    /// Families for which the F-based critical value is meaningful.
    pub fn is_linear(self) -> bool {
        matches!(self, ModelFamily::Linear)
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelFamily::Linear => "linear",
            ModelFamily::BasisLinear => "basis_linear",
            ModelFamily::Mlp => "mlp",
            ModelFamily::External => "external",
        };
        f.write_str(s)
    }
}

/// A fitted, deterministic map from an `n × p` feature matrix (columns in
/// the training order) to `n` predictions.
pub trait PredictionFunction: Send + Sync {
    fn predict(&self, x: &Matrix) -> Result<Vec<f64>>;

    fn variable_names(&self) -> &[String];

    fn family(&self) -> ModelFamily;

    /// Hyperparameters worth recording next to results.
    fn hyperparameters(&self) -> Vec<(String, String)> {
        Vec::new()
    }

    /// The underlying OLS fit when the model is a plain linear regression.
    fn as_linear(&self) -> Option<&LinearModel> {
        None
    }
}

/// A model family that can be (re)fitted on a training sample, possibly
/// restricted to a subset of its columns.
pub trait ModelFactory: Send + Sync {
    fn family(&self) -> ModelFamily;

    fn fit(&self, train: &Dataset) -> Result<Box<dyn PredictionFunction>>;

    /// Fits on the columns `keep` of `train` only; the returned model takes
    /// matrices with exactly those columns, in that order.
    fn fit_subset(&self, train: &Dataset, keep: &[usize]) -> Result<Box<dyn PredictionFunction>> {
        self.fit(&train.select_columns(keep))
    }
}

pub(crate) fn check_width(x: &Matrix, expected: usize) -> Result<()> {
    if x.cols() != expected {
        return Err(crate::error::Error::SchemaMismatch(format!(
            "model expects {expected} columns, got {}",
            x.cols()
        )));
    }
    Ok(())
}
