//! Estimation on log-asset return series: Gaussian and q-Gaussian maximum
//! likelihood, rolling-window tracks, autocorrelation of (absolute) returns,
//! goodness-of-fit tests and Q-Q quantile pairs.

mod acf;
mod gof;
mod law;
mod mle;
mod rolling;

pub use acf::{acf, AcfResult, AcfTransform};
pub use gof::{chi2_test, ks_test, kolmogorov_survival, qq_pairs, GofResult};
pub use law::ReturnLaw;
pub use mle::{fit_gaussian_mle, fit_qgaussian_mle, FitParams, FitResult, BOUNDARY_DELTA, GRAD_TOL};
pub use rolling::{rolling_fit, rolling_fit_cold, RollingFit, DEFAULT_WINDOW};
