//! Dense numerical core.

mod dist;
mod eigen;
mod matrix;
mod mvn;
mod ols;
mod partial;
mod qr;
mod rng;

pub use dist::{beta_reg, f_cdf, f_quantile, ln_beta, ln_gamma};
pub use eigen::{sym_eigen, SymEigen, MAX_SWEEPS};
pub use matrix::{correlation, dot, mean, mean_sq_diff, norm, variance_n, Matrix};
pub use mvn::{mvn_sample, psd_factor, spd_inverse};
pub use ols::{ols_fit, ols_omit_update, OlsFit};
pub use partial::{partial_correlation_direct, residual_angle_cosines};
pub use qr::{PivotedQr, RANK_TOLERANCE};
pub use rng::RngState;
