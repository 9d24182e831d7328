use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Explanatory columns plus a designated response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub names: Vec<String>,
    pub x: Matrix,
    pub response_name: String,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(names: Vec<String>, x: Matrix, response_name: impl Into<String>, y: Vec<f64>) -> Result<Self> {
        if names.len() != x.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} columns",
                names.len(),
                x.cols()
            )));
        }
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} responses for {} rows",
                y.len(),
                x.rows()
            )));
        }
        Ok(Self {
            names,
            x,
            response_name: response_name.into(),
            y,
        })
    }

    /// Default names `x1, x2, …`.
    pub fn with_default_names(x: Matrix, y: Vec<f64>) -> Result<Self> {
        let names = (1..=x.cols()).map(|j| format!("x{j}")).collect();
        Self::new(names, x, "y", y)
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// Same rows, only the listed columns.
    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        Dataset {
            names: cols.iter().map(|&c| self.names[c].clone()).collect(),
            x: self.x.select_columns(cols),
            response_name: self.response_name.clone(),
            y: self.y.clone(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            x: self.x.select_rows(rows),
            response_name: self.response_name.clone(),
            y: rows.iter().map(|&r| self.y[r]).collect(),
        }
    }

    pub fn check_same_schema(&self, other: &Dataset) -> Result<()> {
        if self.names != other.names {
            return Err(Error::SchemaMismatch(format!(
                "columns {:?} vs {:?}",
                self.names, other.names
            )));
        }
        Ok(())
    }
}

/// Training and test samples sharing one column schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSample {
    pub train: Dataset,
    pub test: Dataset,
}

impl SplitSample {
    pub fn new(train: Dataset, test: Dataset) -> Result<Self> {
        train.check_same_schema(&test)?;
        if train.response_name != test.response_name {
            return Err(Error::SchemaMismatch(format!(
                "response {} vs {}",
                train.response_name, test.response_name
            )));
        }
        Ok(Self { train, test })
    }

    pub fn names(&self) -> &[String] {
        &self.train.names
    }

    pub fn p(&self) -> usize {
        self.train.p()
    }
}
