use super::{check_width, ModelFactory, ModelFamily, PredictionFunction};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::linalg::{ols_fit, Matrix, OlsFit};

/// Linear regression with intercept, fitted by OLS.
#[derive(Debug, Clone)]
pub struct LinearModel {
    names: Vec<String>,
    fit: OlsFit,
}

impl LinearModel {
    pub fn ols(&self) -> &OlsFit {
        &self.fit
    }

    pub fn slopes(&self) -> &[f64] {
        self.fit.slopes()
    }

    pub fn intercept(&self) -> f64 {
        self.fit.intercept_value()
    }
}

pub fn fit_linear(train: &Dataset) -> Result<LinearModel> {
    let fit = ols_fit(&train.x, &train.y, true)?;
    Ok(LinearModel {
        names: train.names.clone(),
        fit,
    })
}

impl PredictionFunction for LinearModel {
    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_width(x, self.names.len())?;
        self.fit.predict(x)
    }

    fn variable_names(&self) -> &[String] {
        &self.names
    }

    fn family(&self) -> ModelFamily {
        ModelFamily::Linear
    }

    fn as_linear(&self) -> Option<&LinearModel> {
        Some(self)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LinearFactory;

impl ModelFactory for LinearFactory {
    fn family(&self) -> ModelFamily {
        ModelFamily::Linear
    }

    fn fit(&self, train: &Dataset) -> Result<Box<dyn PredictionFunction>> {
        Ok(Box::new(fit_linear(train)?))
    }
}
