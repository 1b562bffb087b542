//! End-to-end per-firm pipeline: assets, rolling fits, distances to default
//! and one-horizon Black-Cox / q-Black-Cox PDs for every fitted day.

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ScoredFirm;
use crate::inference::{fit_gaussian_mle, rolling_fit, RollingFit, DEFAULT_WINDOW};
use crate::market::{
    build_assets, log_returns, AssetMethod, AssetSeries, DefaultPointPolicy, FirmSeries, ImpliedConfig,
};
use crate::models::{blackcox_pd, generalized_dtd, merton_dtd, qblackcox_pd};
use crate::table::{Cell, Table};
use crate::YEAR_DAYS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub method: AssetMethod,
    pub dp_policy: DefaultPointPolicy,
    pub window: usize,
    pub horizon_days: usize,
    pub implied: ImpliedConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            method: AssetMethod::DirectProxy,
            dp_policy: DefaultPointPolicy::TotalLiabilities,
            window: DEFAULT_WINDOW,
            horizon_days: YEAR_DAYS as usize,
            implied: ImpliedConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 100 {
            return Err(Error::Invalid(format!("window {} is below 100", self.window)));
        }
        if self.horizon_days < 1 {
            return Err(Error::Invalid("horizon must be at least 1 day".into()));
        }
        Ok(())
    }
}

/// Model outputs on one fitted day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdRow {
    pub date: NaiveDate,
    pub q: f64,
    pub beta_tilde: f64,
    /// Gaussian precision of the same window.
    pub beta: f64,
    pub x0: f64,
    pub dd_generalized: f64,
    pub dd_simple: f64,
    pub pd_bc: f64,
    pub pd_qbc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirmRun {
    pub firm_id: String,
    pub assets: AssetSeries,
    pub fits: RollingFit,
    pub rows: Vec<PdRow>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineRun {
    /// Successful firms sorted by id.
    pub firms: Vec<FirmRun>,
    /// `(firm_id, reason)` for firms that could not be processed.
    pub failures: Vec<(String, String)>,
}

fn pd_row(date: NaiveDate, x0: f64, fit_q: crate::QGaussianParams, beta: f64, t: f64) -> Result<PdRow> {
    let (dd_generalized, dd_simple, pd_bc, pd_qbc) = if x0.is_finite() {
        (
            generalized_dtd(x0, fit_q.beta_tilde(), t)?,
            merton_dtd(x0, 0.0, beta, t)?,
            blackcox_pd(x0, 0.0, beta, t)?.value,
            qblackcox_pd(fit_q, x0, t)?.value,
        )
    } else {
        // no default point
        (f64::INFINITY, f64::INFINITY, 0.0, 0.0)
    };
    Ok(PdRow {
        date,
        q: fit_q.q(),
        beta_tilde: fit_q.beta_tilde(),
        beta,
        x0,
        dd_generalized,
        dd_simple,
        pd_bc,
        pd_qbc,
    })
}

pub fn run_firm(f: &FirmSeries, cfg: &PipelineConfig) -> Result<FirmRun> {
    cfg.validate()?;
    let assets = build_assets(f, cfg.method, cfg.dp_policy, cfg.implied)?;
    let returns = log_returns(&assets)?;
    let fits = rolling_fit(&returns, cfg.window)?;
    let t = cfg.horizon_days as f64;
    let mut rows = Vec::with_capacity(fits.fits.len());
    for fit in &fits.fits {
        let date = fit.window_end_date.expect("rolling fits carry their end date");
        let j = returns
            .dates
            .binary_search(&date)
            .expect("fit end date is a return date");
        let gauss = fit_gaussian_mle(&returns.v[j + 1 - cfg.window..=j])?;
        // return j ends on asset day j + 1
        rows.push(pd_row(date, assets.x0(j + 1), fit.qparams(), gauss.beta_tilde(), t)?);
    }
    Ok(FirmRun {
        firm_id: f.firm_id.clone(),
        assets,
        fits,
        rows,
    })
}

/// Run every firm in parallel; failures are isolated per firm.
pub fn run_pipeline(firms: &[FirmSeries], cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let results: Vec<(String, Result<FirmRun>)> = firms
        .par_iter()
        .map(|f| (f.firm_id.clone(), run_firm(f, cfg)))
        .collect();
    let mut run = PipelineRun::default();
    for (id, r) in results {
        match r {
            Ok(fr) => run.firms.push(fr),
            Err(e) => run.failures.push((id, e.to_string())),
        }
    }
    run.firms.sort_by(|a, b| a.firm_id.cmp(&b.firm_id));
    run.failures.sort();
    Ok(run)
}

pub fn pd_table(run: &PipelineRun) -> Table {
    let mut t = Table::new(&[
        "firm_id",
        "date",
        "q",
        "beta_tilde",
        "dd_generalized",
        "dd_simple",
        "PD_BC",
        "PD_qBC",
    ]);
    for f in &run.firms {
        for r in &f.rows {
            t.push(vec![
                f.firm_id.as_str().into(),
                r.date.to_string().into(),
                r.q.into(),
                r.beta_tilde.into(),
                r.dd_generalized.into(),
                r.dd_simple.into(),
                r.pd_bc.into(),
                r.pd_qbc.into(),
            ]);
        }
    }
    t
}

/// `firm_id,date,x0,dd_simple,dd_generalized,ratio` rows.
pub fn dtd_table(run: &PipelineRun) -> Table {
    let mut t = Table::new(&["firm_id", "date", "x0", "dd_simple", "dd_generalized", "ratio"]);
    for f in &run.firms {
        for r in &f.rows {
            t.push(vec![
                f.firm_id.as_str().into(),
                r.date.to_string().into(),
                r.x0.into(),
                r.dd_simple.into(),
                r.dd_generalized.into(),
                (r.dd_generalized / r.dd_simple).into(),
            ]);
        }
    }
    t
}

pub fn fits_table(run: &PipelineRun) -> Table {
    let mut t = Table::new(&["firm_id", "window_end_date", "q", "beta_tilde", "loglik", "converged"]);
    for f in &run.firms {
        for fit in &f.fits.fits {
            t.push(vec![
                f.firm_id.as_str().into(),
                fit.window_end_date.map_or(Cell::Empty, |d| d.to_string().into()),
                fit.q().into(),
                fit.beta_tilde().into(),
                fit.log_likelihood.into(),
                fit.converged.into(),
            ]);
        }
    }
    t
}

/// Year a firm's final score is judged in: the default year for defaulters,
/// otherwise the year after the last observation.
pub fn cohort_year(f: &FirmSeries) -> i32 {
    match f.default_date {
        Some(d) => d.year(),
        None => f.dates.last().map_or(0, |d| d.year() + 1),
    }
}

/// Final-day PD_qBC of every processed firm with its default label.
pub fn final_scores(run: &PipelineRun, firms: &[FirmSeries]) -> Vec<ScoredFirm> {
    run.firms
        .iter()
        .filter_map(|fr| {
            let last = fr.rows.last()?;
            let f = firms.iter().find(|f| f.firm_id == fr.firm_id)?;
            Some(ScoredFirm {
                firm_id: fr.firm_id.clone(),
                score: last.pd_qbc,
                defaulted: f.default_date.is_some(),
                year: cohort_year(f),
            })
        })
        .collect()
}

/// Histogram of final-window q per firm on `[1, 3)`; `marker` flags the bin
/// holding q = 5/3, where the return variance stops being finite.
pub fn qhist_table(run: &PipelineRun, firms: &[FirmSeries], bin_width: f64) -> Result<Table> {
    if !(bin_width > 0.0 && bin_width <= 2.0) {
        return Err(Error::Invalid(format!("bin width {bin_width} outside (0, 2]")));
    }
    let n_bins = (2.0 / bin_width).ceil() as usize;
    let mut all = vec![0usize; n_bins];
    let mut dflt = vec![0usize; n_bins];
    for fr in &run.firms {
        let Some(last) = fr.rows.last() else { continue };
        let b = (((last.q - 1.0) / bin_width) as usize).min(n_bins - 1);
        all[b] += 1;
        if firms
            .iter()
            .any(|f| f.firm_id == fr.firm_id && f.default_date.is_some())
        {
            dflt[b] += 1;
        }
    }
    let mut t = Table::new(&["bin_lo", "bin_hi", "n_firms", "n_defaulters", "marker"]);
    for b in 0..n_bins {
        let lo = 1.0 + b as f64 * bin_width;
        let hi = (lo + bin_width).min(3.0);
        let marker = (lo..hi).contains(&(5.0 / 3.0));
        t.push(vec![lo.into(), hi.into(), all[b].into(), dflt[b].into(), marker.into()]);
    }
    Ok(t)
}
