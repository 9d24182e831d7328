//! One-hidden-layer perceptron with logistic hidden units, a linear output
//! unit and weight decay.
//!
//! Features are standardized with the training means and standard
//! deviations and the response is centred, so the network itself only sees
//! zero-mean data. Training minimizes
//!
//! ```text
//! Σᵢ (yᵢ − ȳ − net(xᵢ))² + λ ‖w‖²
//! ```
//!
//! over all weights (biases included) by full-batch gradient descent. The
//! decay term is applied as a proximal step, `w ← (w − η∇ₗ) / (1 + 2ηλ/n)`,
//! which keeps large `λ` stable. Initial weights are uniform on
//! `[-0.5, 0.5]`.

use serde::{Deserialize, Serialize};

use super::{check_width, ModelFactory, ModelFamily, PredictionFunction};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{mean, Matrix, RngState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: usize,
    pub decay: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub init_range: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: 10,
            decay: 0.5,
            epochs: 3000,
            learning_rate: 0.1,
            init_range: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpModel {
    names: Vec<String>,
    config: MlpConfig,
    /// `hidden × (p + 1)`, bias in column 0.
    w1: Matrix,
    /// `hidden + 1`, bias first.
    w2: Vec<f64>,
    x_mean: Vec<f64>,
    x_sd: Vec<f64>,
    y_mean: f64,
}

#[inline]
fn logistic(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

impl MlpModel {
    fn init(names: Vec<String>, config: MlpConfig, x: &Matrix, y: &[f64], rng: &mut RngState) -> Self {
        let p = x.cols();
        let h = config.hidden;
        let x_mean = x.column_means();
        let x_sd: Vec<f64> = (0..p)
            .map(|j| {
                let col = x.column(j);
                let n = col.len() as f64;
                let var = col.iter().map(|v| (v - x_mean[j]).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let r = config.init_range;
        let w1 = Matrix::from_fn(h, p + 1, |_, _| rng.uniform(-r, r));
        let w2 = (0..=h).map(|_| rng.uniform(-r, r)).collect();
        Self {
            names,
            config,
            w1,
            w2,
            x_mean,
            x_sd,
            y_mean: mean(y),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.cols() - 1
    }

    pub fn hidden(&self) -> usize {
        self.w1.rows()
    }

    pub fn parameter_count(&self) -> usize {
        self.w1.rows() * self.w1.cols() + self.w2.len()
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    /// All weights, `w1` row-major followed by `w2`.
    pub fn parameters(&self) -> Vec<f64> {
        let mut v = self.w1.as_slice().to_vec();
        v.extend_from_slice(&self.w2);
        v
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.parameter_count());
        let n1 = self.w1.rows() * self.w1.cols();
        self.w1 = Matrix::from_vec(self.w1.rows(), self.w1.cols(), params[..n1].to_vec())
            .expect("shape preserved");
        self.w2.copy_from_slice(&params[n1..]);
    }

    pub fn standardize(&self, x: &Matrix) -> Matrix {
        Matrix::from_fn(x.rows(), x.cols(), |i, j| (x[(i, j)] - self.x_mean[j]) / self.x_sd[j])
    }

    fn net(&self, row: &[f64], hidden: &mut [f64]) -> f64 {
        let p = row.len();
        for (h, out) in hidden.iter_mut().enumerate() {
            let w = self.w1.row(h);
            let mut a = w[0];
            for j in 0..p {
                a += w[j + 1] * row[j];
            }
            *out = logistic(a);
        }
        self.w2[0] + hidden.iter().zip(&self.w2[1..]).map(|(s, w)| s * w).sum::<f64>()
    }

    /// Training objective on standardized inputs and centred response.
    pub fn objective(&self, xs: &Matrix, yc: &[f64]) -> f64 {
        let mut hidden = vec![0.0; self.hidden()];
        let sse: f64 = (0..xs.rows())
            .map(|i| {
                let r = self.net(xs.row(i), &mut hidden) - yc[i];
                r * r
            })
            .sum();
        let l2: f64 = self.parameters().iter().map(|w| w * w).sum();
        sse + self.config.decay * l2
    }

    /// Gradient of the squared-error part of the objective.
    fn data_gradient(&self, xs: &Matrix, yc: &[f64]) -> (Vec<f64>, f64) {
        let h = self.hidden();
        let p = self.input_dim();
        let mut g1 = vec![0.0; h * (p + 1)];
        let mut g2 = vec![0.0; h + 1];
        let mut hidden = vec![0.0; h];
        let mut sse = 0.0;
        for i in 0..xs.rows() {
            let row = xs.row(i);
            let r = self.net(row, &mut hidden) - yc[i];
            sse += r * r;
            let d = 2.0 * r;
            g2[0] += d;
            for k in 0..h {
                let s = hidden[k];
                g2[k + 1] += d * s;
                let delta = d * self.w2[k + 1] * s * (1.0 - s);
                let base = k * (p + 1);
                g1[base] += delta;
                for j in 0..p {
                    g1[base + j + 1] += delta * row[j];
                }
            }
        }
        g1.extend_from_slice(&g2);
        (g1, sse)
    }

    /// Analytic gradient of [`MlpModel::objective`].
    pub fn gradient(&self, xs: &Matrix, yc: &[f64]) -> Vec<f64> {
        let (mut g, _) = self.data_gradient(xs, yc);
        for (gi, w) in g.iter_mut().zip(self.parameters()) {
            *gi += 2.0 * self.config.decay * w;
        }
        g
    }

    /// Centred response used during training.
    pub fn center_response(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| v - self.y_mean).collect()
    }

    fn train(&mut self, xs: &Matrix, yc: &[f64]) -> Result<()> {
        let n = xs.rows() as f64;
        let lr = self.config.learning_rate;
        let shrink = 1.0 + 2.0 * lr * self.config.decay / n;
        let mut params = self.parameters();
        for epoch in 0..self.config.epochs {
            let (grad, sse) = self.data_gradient(xs, yc);
            if !sse.is_finite() {
                return Err(Error::NonFinite(format!(
                    "training loss diverged at epoch {epoch}; reduce the learning rate"
                )));
            }
            for (w, g) in params.iter_mut().zip(&grad) {
                *w = (*w - lr * g / n) / shrink;
            }
            self.set_parameters(&params);
        }
        if params.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("network weights".into()));
        }
        Ok(())
    }
}

pub fn fit_mlp(train: &Dataset, config: MlpConfig, rng: &mut RngState) -> Result<MlpModel> {
    if config.hidden == 0 {
        return Err(Error::InvalidArgument("hidden layer needs at least one unit".into()));
    }
    if !(config.decay >= 0.0) {
        return Err(Error::InvalidArgument(format!("decay must be >= 0, got {}", config.decay)));
    }
    if !(config.learning_rate > 0.0) {
        return Err(Error::InvalidArgument("learning rate must be positive".into()));
    }
    if train.n() < 2 {
        return Err(Error::InvalidArgument("need at least two training rows".into()));
    }
    let mut model = MlpModel::init(train.names.clone(), config, &train.x, &train.y, rng);
    let xs = model.standardize(&train.x);
    let yc = model.center_response(&train.y);
    model.train(&xs, &yc)?;
    Ok(model)
}

impl PredictionFunction for MlpModel {
    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_width(x, self.input_dim())?;
        let xs = self.standardize(x);
        let mut hidden = vec![0.0; self.hidden()];
        Ok((0..xs.rows())
            .map(|i| self.y_mean + self.net(xs.row(i), &mut hidden))
            .collect())
    }

    fn variable_names(&self) -> &[String] {
        &self.names
    }

    fn family(&self) -> ModelFamily {
        ModelFamily::Mlp
    }

    fn hyperparameters(&self) -> Vec<(String, String)> {
        vec![
            ("hidden".into(), self.config.hidden.to_string()),
            ("decay".into(), self.config.decay.to_string()),
            ("epochs".into(), self.config.epochs.to_string()),
            ("learning_rate".into(), self.config.learning_rate.to_string()),
        ]
    }
}

/// Refits use the same hyperparameters and seed as the full model.
#[derive(Debug, Clone)]
pub struct MlpFactory {
    pub config: MlpConfig,
    pub seed: u64,
}

impl ModelFactory for MlpFactory {
    fn family(&self) -> ModelFamily {
        ModelFamily::Mlp
    }

    fn fit(&self, train: &Dataset) -> Result<Box<dyn PredictionFunction>> {
        let mut rng = RngState::new(self.seed);
        Ok(Box::new(fit_mlp(train, self.config, &mut rng)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, seed: u64) -> Dataset {
        let mut rng = RngState::new(seed);
        let x = Matrix::from_fn(n, 1, |_, _| rng.standard_normal());
        let y = x.column(0).iter().map(|v| 2.0 * v).collect();
        Dataset::with_default_names(x, y).unwrap()
    }

    #[test]
    fn parameter_count_formula() {
        let data = toy(20, 1);
        let cfg = MlpConfig {
            hidden: 4,
            epochs: 1,
            ..MlpConfig::default()
        };
        let m = fit_mlp(&data, cfg, &mut RngState::new(2)).unwrap();
        assert_eq!(m.parameter_count(), 4 * (1 + 1) + 4 + 1);
    }

    #[test]
    fn zero_hidden_rejected() {
        let cfg = MlpConfig {
            hidden: 0,
            ..MlpConfig::default()
        };
        assert!(fit_mlp(&toy(10, 1), cfg, &mut RngState::new(1)).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let cfg = MlpConfig {
            hidden: 3,
            decay: 0.0,
            epochs: 200,
            learning_rate: 1e6,
            init_range: 0.5,
        };
        let err = fit_mlp(&toy(50, 3), cfg, &mut RngState::new(1)).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)), "{err:?}");
    }
}
