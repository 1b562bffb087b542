//! Structural credit-default models with superstatistical (q-Gaussian)
//! volatility.
//!
//! The crate covers the whole estimation chain: firm market data in,
//! asset values and log-asset returns, rolling maximum-likelihood fits of
//! the q-Gaussian return law, distances to default and cumulative default
//! probabilities, and ROC/AUC validation on simulated portfolios.

pub mod dist;
pub mod error;
pub mod eval;
pub mod inference;
pub mod market;
pub mod models;
pub mod pipeline;
pub mod rng;
pub mod specfun;
pub mod table;

pub use dist::{GammaParams, GaussianLaw, QGaussianParams, StudentParams, Variance, YEAR_DAYS};
pub use error::{Error, Result};
pub use models::{DefaultProb, DistanceToDefault, FirmState, Model, PdCurve};
