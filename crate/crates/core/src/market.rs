//! Market data: firm series ingestion, liability interpolation, default-point
//! policies, asset-value construction and daily log-asset returns.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::normal_cdf;
use crate::table::{Cell, Table};
use crate::YEAR_DAYS;

/// Daily equity capitalisation and book liabilities of one issuer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmSeries {
    pub firm_id: String,
    pub dates: Vec<NaiveDate>,
    pub equity: Vec<f64>,
    /// Book total liabilities; `None` between quarterly reports.
    pub liabilities_raw: Vec<Option<f64>>,
    pub default_date: Option<NaiveDate>,
}

impl FirmSeries {
    pub fn new(
        firm_id: impl Into<String>,
        dates: Vec<NaiveDate>,
        equity: Vec<f64>,
        liabilities_raw: Vec<Option<f64>>,
        default_date: Option<NaiveDate>,
    ) -> Result<Self> {
        let firm_id = firm_id.into();
        if dates.len() != equity.len() || dates.len() != liabilities_raw.len() {
            return Err(Error::Invalid(format!(
                "{firm_id}: column lengths differ ({} dates, {} equity, {} liabilities)",
                dates.len(),
                equity.len(),
                liabilities_raw.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Invalid(format!(
                "{firm_id}: dates not strictly increasing at {}",
                w[1]
            )));
        }
        if let Some(i) = equity.iter().position(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::Invalid(format!(
                "{firm_id}: non-positive market cap {} on {}",
                equity[i], dates[i]
            )));
        }
        if let Some(i) = liabilities_raw
            .iter()
            .position(|l| l.is_some_and(|v| !(v >= 0.0 && v.is_finite())))
        {
            return Err(Error::Invalid(format!(
                "{firm_id}: negative liabilities on {}",
                dates[i]
            )));
        }
        Ok(Self {
            firm_id,
            dates,
            equity,
            liabilities_raw,
            default_date,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DefaultPointPolicy {
    /// Book total liabilities.
    TotalLiabilities,
    /// 80% of book total liabilities.
    Liabilities80,
}

impl DefaultPointPolicy {
    pub fn factor(self) -> f64 {
        match self {
            DefaultPointPolicy::TotalLiabilities => 1.0,
            DefaultPointPolicy::Liabilities80 => 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssetMethod {
    DirectProxy,
    IterativeImplied,
}

/// Market value of assets with the liabilities used to build it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetSeries {
    pub firm_id: String,
    pub dates: Vec<NaiveDate>,
    pub v: Vec<f64>,
    /// Interpolated book liabilities (before the default-point policy).
    pub d: Vec<f64>,
    pub method: AssetMethod,
    pub dp_policy: DefaultPointPolicy,
}

impl AssetSeries {
    /// Default point on day `i` under the series policy.
    pub fn default_point(&self, i: usize) -> Result<f64> {
        default_point(self.d[i], self.dp_policy)
    }

    /// Log distance to the default point, `ln(V/D_point)`. Debt-free days give
    /// `+inf` (no default point, zero PD downstream).
    pub fn x0(&self, i: usize) -> f64 {
        match self.default_point(i) {
            Ok(dp) => (self.v[i] / dp).ln(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Daily log-asset returns; `dates[k]` is the day the return `v[k]` ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub firm_id: String,
    pub dates: Vec<NaiveDate>,
    pub v: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(firm_id: impl Into<String>, dates: Vec<NaiveDate>, v: Vec<f64>) -> Result<Self> {
        if dates.len() != v.len() {
            return Err(Error::Invalid("return dates and values differ in length".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("non-finite log-return".into()));
        }
        Ok(Self {
            firm_id: firm_id.into(),
            dates,
            v,
        })
    }

    /// Returns without dates (synthetic data); days are numbered from an
    /// arbitrary epoch.
    pub fn from_values(firm_id: impl Into<String>, v: Vec<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid epoch");
        let dates = start.iter_days().take(v.len()).collect();
        Self::new(firm_id, dates, v)
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }
}

/// Piecewise-linear daily liabilities from the quarterly step pattern.
///
/// A report date is any date whose liability differs from the previous known
/// value. Values are interpolated linearly in calendar days between report
/// dates and held constant outside the first and last report.
pub fn interpolate_liabilities(f: &FirmSeries) -> Result<Vec<f64>> {
    let mut knots: Vec<(NaiveDate, f64)> = Vec::new();
    for (date, l) in f.dates.iter().zip(&f.liabilities_raw) {
        if let Some(v) = *l {
            if knots.last().is_none_or(|&(_, prev)| prev != v) {
                knots.push((*date, v));
            }
        }
    }
    if knots.is_empty() {
        return Err(Error::Invalid(format!(
            "{}: no liability observations",
            f.firm_id
        )));
    }
    let mut out = Vec::with_capacity(f.len());
    let mut k = 0;
    for date in &f.dates {
        while k + 1 < knots.len() && knots[k + 1].0 <= *date {
            k += 1;
        }
        let (d0, v0) = knots[k];
        let value = if *date <= d0 || k + 1 == knots.len() {
            v0
        } else {
            let (d1, v1) = knots[k + 1];
            let span = (d1 - d0).num_days() as f64;
            let w = (*date - d0).num_days() as f64 / span;
            v0 + w * (v1 - v0)
        };
        out.push(value.max(0.0));
    }
    Ok(out)
}

/// Default point from interpolated liabilities.
pub fn default_point(d: f64, policy: DefaultPointPolicy) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Invalid(format!(
            "liabilities {d} give no default point (debt-free firm)"
        )));
    }
    Ok(d * policy.factor())
}

/// `V = E + D` with `D` the interpolated book liabilities.
pub fn direct_proxy_assets(f: &FirmSeries, policy: DefaultPointPolicy) -> Result<AssetSeries> {
    let d = interpolate_liabilities(f)?;
    let v = f.equity.iter().zip(&d).map(|(e, d)| e + d).collect();
    Ok(AssetSeries {
        firm_id: f.firm_id.clone(),
        dates: f.dates.clone(),
        v,
        d,
        method: AssetMethod::DirectProxy,
        dp_policy: policy,
    })
}

/// Settings of the iterative implied-asset solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpliedConfig {
    /// Continuously compounded risk-free rate per year.
    pub risk_free: f64,
    /// Option horizon in years.
    pub horizon_years: f64,
    /// Stop when the largest relative change of V in a sweep falls below this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for ImpliedConfig {
    fn default() -> Self {
        Self {
            risk_free: 0.02,
            horizon_years: 1.0,
            tol: 1e-6,
            max_sweeps: 50,
        }
    }
}

/// Black-Scholes value of a call on the assets struck at the liabilities.
pub fn bs_call(v: f64, strike: f64, r: f64, t: f64, sigma: f64) -> f64 {
    let disc = strike * (-r * t).exp();
    if strike == 0.0 {
        return v;
    }
    let vol = sigma * t.sqrt();
    if vol < 1e-12 {
        return (v - disc).max(0.0);
    }
    let d1 = ((v / strike).ln() + (r + 0.5 * sigma * sigma) * t) / vol;
    let d2 = d1 - vol;
    v * normal_cdf(d1).unwrap_or(0.0) - disc * normal_cdf(d2).unwrap_or(0.0)
}

fn bs_delta(v: f64, strike: f64, r: f64, t: f64, sigma: f64) -> f64 {
    let vol = sigma * t.sqrt();
    if vol < 1e-12 {
        return if v > strike * (-r * t).exp() { 1.0 } else { 0.0 };
    }
    let d1 = ((v / strike).ln() + (r + 0.5 * sigma * sigma) * t) / vol;
    normal_cdf(d1).unwrap_or(0.0)
}

/// Annualised volatility of log-returns (sample standard deviation).
fn annualised_vol(v: &[f64]) -> f64 {
    let n = v.len() - 1;
    if n < 2 {
        return 0.0;
    }
    let r: Vec<f64> = v.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let mean = r.iter().sum::<f64>() / n as f64;
    let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (var * YEAR_DAYS).sqrt()
}

/// Invert `E = C(V)` for the asset value on one day. The root lies in
/// `[E, E + D e^{-rT}]` because `max(V - D e^{-rT}, 0) <= C(V) <= V`.
fn solve_asset_value(e: f64, d: f64, r: f64, t: f64, sigma: f64) -> std::result::Result<f64, String> {
    if d == 0.0 {
        return Ok(e);
    }
    let mut lo = e;
    let mut hi = e + d * (-r * t).exp();
    let f = |x: f64| bs_call(x, d, r, t, sigma) - e;
    let (flo, fhi) = (f(lo), f(hi));
    // deep in the money C(V) = V - D e^{-rT} up to rounding
    let slack = 1e-12 * hi;
    if fhi <= 0.0 && fhi >= -slack {
        return Ok(hi);
    }
    if flo >= 0.0 && flo <= slack {
        return Ok(lo);
    }
    if flo > 0.0 || fhi < 0.0 {
        return Err(format!(
            "root not bracketed: C(E)-E={flo:e}, C(E+De^-rT)-E={fhi:e}"
        ));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let delta = bs_delta(x, d, r, t, sigma);
        let newton = x - fx / delta;
        let next = if delta > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= 1e-15 * x {
            break;
        }
    }
    Ok(x)
}

/// Implied asset values by the iterative call-option inversion: start from
/// `V = E + D`, estimate the asset volatility from the current V series,
/// invert the call formula day by day, repeat until V settles.
pub fn implied_assets(
    f: &FirmSeries,
    cfg: ImpliedConfig,
    policy: DefaultPointPolicy,
) -> Result<AssetSeries> {
    if f.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{}: implied assets need at least 2 observations",
            f.firm_id
        )));
    }
    let d = interpolate_liabilities(f)?;
    let mut v: Vec<f64> = f.equity.iter().zip(&d).map(|(e, d)| e + d).collect();
    let (r, t) = (cfg.risk_free, cfg.horizon_years);
    let mut last_change = f64::INFINITY;
    for _ in 0..cfg.max_sweeps {
        let sigma = annualised_vol(&v);
        let mut next = Vec::with_capacity(v.len());
        for i in 0..v.len() {
            let vi = solve_asset_value(f.equity[i], d[i], r, t, sigma).map_err(|msg| {
                Error::RootBracket {
                    firm_id: f.firm_id.clone(),
                    date: f.dates[i].to_string(),
                    msg,
                }
            })?;
            next.push(vi);
        }
        last_change = v
            .iter()
            .zip(&next)
            .map(|(a, b)| ((b - a) / a).abs())
            .fold(0.0, f64::max);
        v = next;
        if last_change < cfg.tol {
            return Ok(AssetSeries {
                firm_id: f.firm_id.clone(),
                dates: f.dates.clone(),
                v,
                d,
                method: AssetMethod::IterativeImplied,
                dp_policy: policy,
            });
        }
    }
    Err(Error::ImpliedNoConvergence {
        firm_id: f.firm_id.clone(),
        sweeps: cfg.max_sweeps,
        last_change,
        last_iterate: v,
    })
}

/// Build assets by either method.
pub fn build_assets(
    f: &FirmSeries,
    method: AssetMethod,
    policy: DefaultPointPolicy,
    cfg: ImpliedConfig,
) -> Result<AssetSeries> {
    match method {
        AssetMethod::DirectProxy => direct_proxy_assets(f, policy),
        AssetMethod::IterativeImplied => implied_assets(f, cfg, policy),
    }
}

/// `v_i = ln(V_i / V_{i-1})`.
pub fn log_returns(a: &AssetSeries) -> Result<ReturnSeries> {
    if a.v.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{}: log-returns need at least 2 observations",
            a.firm_id
        )));
    }
    if let Some(i) = a.v.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Invalid(format!(
            "{}: non-positive asset value {} on {}",
            a.firm_id, a.v[i], a.dates[i]
        )));
    }
    let v = a.v.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    ReturnSeries::new(a.firm_id.clone(), a.dates[1..].to_vec(), v)
}

/// Row-level rejection found while ingesting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReject {
    pub line: usize,
    pub reason: String,
}

/// Result of reading one or more firm CSV files.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ingest {
    /// Firms sorted by id.
    pub firms: Vec<FirmSeries>,
    pub rows_read: usize,
    pub rejects: Vec<RowReject>,
}

struct RawRow {
    date: NaiveDate,
    equity: f64,
    liabilities: Option<f64>,
    defaulted_on: Option<NaiveDate>,
}

fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| format!("bad date {s:?}: {e}"))
}

/// Read the long-format firm CSV
/// (`firm_id,date,market_cap,total_liabilities[,defaulted_on]`).
///
/// Malformed rows are collected as rejects with their line number; a
/// repeated `(firm_id, date)` pair is a hard error.
pub fn read_firms_csv<R: Read>(reader: R) -> Result<Ingest> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let required = ["firm_id", "date", "market_cap", "total_liabilities"];
    let mut idx = [0usize; 4];
    for (slot, name) in idx.iter_mut().zip(required) {
        *slot = col(name).ok_or_else(|| Error::Schema {
            line: 1,
            msg: format!("missing column {name:?}"),
        })?;
    }
    let default_col = col("defaulted_on");

    let mut by_firm: BTreeMap<String, Vec<RawRow>> = BTreeMap::new();
    let mut seen: HashSet<(String, NaiveDate)> = HashSet::new();
    let mut out = Ingest::default();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.rows_read += 1;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let parsed = (|| -> std::result::Result<(String, RawRow), String> {
            let firm = field(idx[0]).to_string();
            if firm.is_empty() {
                return Err("empty firm_id".into());
            }
            let date = parse_date(field(idx[1]))?;
            let equity: f64 = field(idx[2])
                .parse()
                .map_err(|_| format!("bad market_cap {:?}", field(idx[2])))?;
            if !(equity > 0.0 && equity.is_finite()) {
                return Err(format!("market_cap must be positive, got {equity}"));
            }
            let lraw = field(idx[3]);
            let liabilities = if lraw.is_empty() {
                None
            } else {
                let l: f64 = lraw
                    .parse()
                    .map_err(|_| format!("bad total_liabilities {lraw:?}"))?;
                if !(l >= 0.0 && l.is_finite()) {
                    return Err(format!("total_liabilities must be nonnegative, got {l}"));
                }
                Some(l)
            };
            let defaulted_on = match default_col.map(field) {
                Some(s) if !s.is_empty() => Some(parse_date(s)?),
                _ => None,
            };
            Ok((
                firm,
                RawRow {
                    date,
                    equity,
                    liabilities,
                    defaulted_on,
                },
            ))
        })();
        match parsed {
            Ok((firm, row)) => {
                if !seen.insert((firm.clone(), row.date)) {
                    return Err(Error::Schema {
                        line,
                        msg: format!("duplicate (firm_id, date) = ({firm}, {})", row.date),
                    });
                }
                by_firm.entry(firm).or_default().push(row);
            }
            Err(reason) => out.rejects.push(RowReject { line, reason }),
        }
    }

    for (firm, mut rows) in by_firm {
        rows.sort_by_key(|r| r.date);
        let default_date = rows.iter().find_map(|r| r.defaulted_on);
        out.firms.push(FirmSeries::new(
            firm,
            rows.iter().map(|r| r.date).collect(),
            rows.iter().map(|r| r.equity).collect(),
            rows.iter().map(|r| r.liabilities).collect(),
            default_date,
        )?);
    }
    Ok(out)
}

/// Write firms back in the ingest schema.
pub fn firms_table(firms: &[FirmSeries]) -> Table {
    let mut t = Table::new(&["firm_id", "date", "market_cap", "total_liabilities", "defaulted_on"]);
    for f in firms {
        for i in 0..f.len() {
            t.push(vec![
                f.firm_id.as_str().into(),
                f.dates[i].to_string().into(),
                f.equity[i].into(),
                f.liabilities_raw[i].into(),
                f.default_date.map_or(Cell::Empty, |d| d.to_string().into()),
            ]);
        }
    }
    t
}

/// `firm_id,date,V,D,v` rows; the first day of each firm has no return.
pub fn assets_table(assets: &[AssetSeries]) -> Result<Table> {
    let mut t = Table::new(&["firm_id", "date", "V", "D", "v"]);
    for a in assets {
        let r = log_returns(a)?;
        for i in 0..a.v.len() {
            t.push(vec![
                a.firm_id.as_str().into(),
                a.dates[i].to_string().into(),
                a.v[i].into(),
                a.d[i].into(),
                if i == 0 { Cell::Empty } else { r.v[i - 1].into() },
            ]);
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(k: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + chrono::Duration::days(k)
    }

    fn firm(equity: Vec<f64>, liab: Vec<Option<f64>>) -> FirmSeries {
        let dates = (0..equity.len() as i64).map(day).collect();
        FirmSeries::new("F", dates, equity, liab, None).unwrap()
    }

    #[test]
    fn interpolation_examples() {
        let f = firm(vec![1.0; 5], vec![Some(7.0); 5]);
        assert_eq!(interpolate_liabilities(&f).unwrap(), vec![7.0; 5]);

        let f = firm(
            vec![1.0; 5],
            vec![Some(100.0), None, None, None, Some(200.0)],
        );
        let d = interpolate_liabilities(&f).unwrap();
        assert_eq!(d[2], 150.0);
        assert_eq!(d, vec![100.0, 125.0, 150.0, 175.0, 200.0]);

        // repeated values form a step pattern; the jump is smoothed back to the
        // previous report date
        let f = firm(
            vec![1.0; 6],
            vec![Some(100.0), Some(100.0), Some(100.0), Some(400.0), Some(400.0), Some(400.0)],
        );
        assert_eq!(
            interpolate_liabilities(&f).unwrap(),
            vec![100.0, 200.0, 300.0, 400.0, 400.0, 400.0]
        );

        let f = firm(vec![1.0; 4], vec![None, Some(42.0), None, None]);
        assert_eq!(interpolate_liabilities(&f).unwrap(), vec![42.0; 4]);

        let f = firm(vec![1.0; 3], vec![None; 3]);
        assert!(interpolate_liabilities(&f).is_err());
    }

    #[test]
    fn default_point_policies() {
        assert_eq!(default_point(100.0, DefaultPointPolicy::TotalLiabilities).unwrap(), 100.0);
        assert_eq!(default_point(100.0, DefaultPointPolicy::Liabilities80).unwrap(), 80.0);
        assert!(default_point(0.0, DefaultPointPolicy::TotalLiabilities).is_err());
        let f = firm(vec![50.0, 60.0], vec![Some(100.0), Some(100.0)]);
        let a = direct_proxy_assets(&f, DefaultPointPolicy::TotalLiabilities).unwrap();
        let b = direct_proxy_assets(&f, DefaultPointPolicy::Liabilities80).unwrap();
        assert!((b.x0(1) - a.x0(1) - (1.0f64 / 0.8).ln()).abs() < 1e-15);
    }

    #[test]
    fn direct_proxy_examples() {
        let f = firm(vec![50.0, 55.0], vec![Some(100.0), None]);
        let a = direct_proxy_assets(&f, DefaultPointPolicy::TotalLiabilities).unwrap();
        assert_eq!(a.v, vec![150.0, 155.0]);
        assert!(a.v.iter().zip(&f.equity).all(|(v, e)| v >= e));

        let f = firm(vec![50.0, 55.0], vec![Some(0.0), Some(0.0)]);
        let a = direct_proxy_assets(&f, DefaultPointPolicy::TotalLiabilities).unwrap();
        assert_eq!(a.v, f.equity);
        assert_eq!(a.x0(0), f64::INFINITY);
    }

    #[test]
    fn implied_degenerate_cases() {
        let f = firm(vec![50.0, 52.0, 49.0], vec![Some(0.0); 3]);
        let a = implied_assets(&f, ImpliedConfig::default(), DefaultPointPolicy::TotalLiabilities)
            .unwrap();
        assert_eq!(a.v, f.equity);

        // zero volatility: V = E + D e^{-rT}
        let v = solve_asset_value(30.0, 100.0, 0.02, 1.0, 0.0).unwrap();
        assert!((v - (30.0 + 100.0 * (-0.02f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn implied_assets_exceed_equity() {
        let e: Vec<f64> = (0..40).map(|k| 60.0 + 5.0 * ((k as f64) * 0.7).sin()).collect();
        let f = firm(e.clone(), vec![Some(80.0); 40]);
        let a = implied_assets(&f, ImpliedConfig::default(), DefaultPointPolicy::TotalLiabilities)
            .unwrap();
        assert!(a.v.iter().zip(&e).all(|(v, e)| v > e));
        // idempotent at the fixed point
        let sigma = annualised_vol(&a.v);
        for i in 0..a.v.len() {
            let again = solve_asset_value(e[i], 80.0, 0.02, 1.0, sigma).unwrap();
            assert!(((again - a.v[i]) / a.v[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn log_return_examples() {
        let mk = |v: Vec<f64>| AssetSeries {
            firm_id: "F".into(),
            dates: (0..v.len() as i64).map(day).collect(),
            d: vec![1.0; v.len()],
            v,
            method: AssetMethod::DirectProxy,
            dp_policy: DefaultPointPolicy::TotalLiabilities,
        };
        assert_eq!(log_returns(&mk(vec![3.0; 4])).unwrap().v, vec![0.0; 3]);
        let r = log_returns(&mk(vec![1.0, 2.0])).unwrap();
        assert_eq!(r.v, vec![2f64.ln()]);
        assert_eq!(r.dates, vec![day(1)]);
        assert!(log_returns(&mk(vec![1.0, 0.0])).is_err());
        assert!(log_returns(&mk(vec![1.0])).is_err());
    }

    #[test]
    fn csv_ingest_two_firms() {
        let text = "firm_id,date,market_cap,total_liabilities,defaulted_on\n\
                    B,2010-01-05,10,5,\n\
                    A,2010-01-04,100,50,\n\
                    A,2010-01-05,101,,\n\
                    B,2010-01-04,11,5,2011-03-01\n";
        let ing = read_firms_csv(text.as_bytes()).unwrap();
        assert_eq!(ing.firms.len(), 2);
        assert!(ing.rejects.is_empty());
        assert_eq!(ing.firms[0].firm_id, "A");
        assert_eq!(ing.firms[1].dates[0], NaiveDate::from_ymd_opt(2010, 1, 4).unwrap());
        assert_eq!(ing.firms[1].default_date, NaiveDate::from_ymd_opt(2011, 3, 1));
        assert_eq!(ing.firms[0].liabilities_raw, vec![Some(50.0), None]);
    }

    #[test]
    fn csv_rejects_and_duplicates() {
        let text = "firm_id,date,market_cap,total_liabilities\n\
                    A,2010-01-04,100,50\n\
                    A,2010-01-05,-3,50\n\
                    A,2010-13-05,3,50\n";
        let ing = read_firms_csv(text.as_bytes()).unwrap();
        assert_eq!(ing.rejects.len(), 2);
        assert_eq!(ing.rejects[0].line, 3);
        assert!(ing.rejects[0].reason.contains("market_cap"));
        assert_eq!(ing.rejects[1].line, 4);

        let dup = "firm_id,date,market_cap,total_liabilities\n\
                   A,2010-01-04,100,50\n\
                   A,2010-01-04,100,50\n";
        let err = read_firms_csv(dup.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("(A, 2010-01-04)"), "{err}");

        let missing = "firm_id,date,market_cap\nA,2010-01-04,100\n";
        assert!(matches!(read_firms_csv(missing.as_bytes()), Err(Error::Schema { .. })));
    }
}
