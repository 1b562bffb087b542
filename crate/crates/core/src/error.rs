use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    #[error("degenerate q = 1 (Gaussian) case has no {what}")]
    GaussianDegenerate { what: &'static str },

    #[error("{func} did not converge after {iterations} iterations")]
    NoConvergence { func: &'static str, iterations: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("zero-variance data: {0}")]
    DegenerateSample(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("implied asset solve failed for {firm_id} on {date}: {msg}")]
    RootBracket {
        firm_id: String,
        date: String,
        msg: String,
    },

    #[error("implied assets for {firm_id} did not converge within {sweeps} sweeps (last max rel change {last_change:e})")]
    ImpliedNoConvergence {
        firm_id: String,
        sweeps: usize,
        last_change: f64,
        /// Last iterate of the asset-value series.
        last_iterate: Vec<f64>,
    },

    #[error("not enough non-defaulters in year {year}: need {needed}, have {available}")]
    InsufficientControls {
        year: i32,
        needed: usize,
        available: usize,
    },

    #[error("schema error at line {line}: {msg}")]
    Schema { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            func,
            msg: msg.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
