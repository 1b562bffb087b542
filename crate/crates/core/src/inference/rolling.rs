use chrono::NaiveDate;
use rayon::prelude::*;

use super::mle::{fit_qgaussian_mle, FitResult};
use crate::error::{Error, Result};
use crate::market::ReturnSeries;

pub const DEFAULT_WINDOW: usize = 250;

#[derive(Debug, Clone, PartialEq)]
pub struct RollingFit {
    /// Successful fits in window order.
    pub fits: Vec<FitResult>,
    /// End dates of windows whose fit failed, with the reason.
    pub gaps: Vec<(NaiveDate, String)>,
}

fn check(v: &ReturnSeries, window: usize) -> Result<usize> {
    if window < 100 {
        return Err(Error::Invalid(format!("window {window} is below 100")));
    }
    if v.len() < window {
        return Err(Error::InsufficientData(format!(
            "{}: {} returns, window needs {window}",
            v.firm_id,
            v.len()
        )));
    }
    Ok(v.len() - window + 1)
}

/// q-Gaussian fits on every `window`-return window, stepping one day.
/// Each window starts from the previous window's optimum.
pub fn rolling_fit(v: &ReturnSeries, window: usize) -> Result<RollingFit> {
    let count = check(v, window)?;
    let mut out = RollingFit {
        fits: Vec::with_capacity(count),
        gaps: Vec::new(),
    };
    let mut init = None;
    for s in 0..count {
        let end = s + window - 1;
        match fit_qgaussian_mle(&v.v[s..=end], init) {
            Ok(mut fit) => {
                fit.window_end_date = Some(v.dates[end]);
                init = Some((fit.qparams(), fit.location));
                out.fits.push(fit);
            }
            Err(e) => out.gaps.push((v.dates[end], e.to_string())),
        }
    }
    Ok(out)
}

/// Independent cold-started fits, evaluated in parallel.
pub fn rolling_fit_cold(v: &ReturnSeries, window: usize) -> Result<RollingFit> {
    let count = check(v, window)?;
    let results: Vec<_> = (0..count)
        .into_par_iter()
        .map(|s| {
            let end = s + window - 1;
            fit_qgaussian_mle(&v.v[s..=end], None).map(|mut f| {
                f.window_end_date = Some(v.dates[end]);
                f
            })
        })
        .collect();
    let mut out = RollingFit {
        fits: Vec::new(),
        gaps: Vec::new(),
    };
    for (s, r) in results.into_iter().enumerate() {
        match r {
            Ok(f) => out.fits.push(f),
            Err(e) => out.gaps.push((v.dates[s + window - 1], e.to_string())),
        }
    }
    Ok(out)
}
