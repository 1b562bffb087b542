//! Validation machinery: superstatistical return simulation, first-passage
//! default simulation, a Monte Carlo PD oracle, ROC/AUC and the balanced
//! resampling protocol.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{q_to_gamma, GammaParams, PrecisionSampler, QGaussianParams};
use crate::error::{Error, Result};
use crate::market::{FirmSeries, ReturnSeries};
use crate::models::blackcox_pd;
use crate::rng::stream_rng;
use crate::table::{Cell, Table};

/// Superstatistics simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub gamma: GammaParams,
    /// Mean volatility-regime length τ in trading days. When τ ≥ `n_days`
    /// the precision is frozen for the whole path.
    pub regime_len_days: usize,
    pub n_days: usize,
    /// Drift of the log-asset value per day.
    pub drift: f64,
    pub seed: u64,
    /// Sub-steps per day for barrier monitoring (1 = daily grid).
    pub substeps: usize,
    /// Also count barrier crossings between grid points, drawn from the
    /// Brownian-bridge crossing probability (continuous monitoring).
    pub bridge: bool,
}

impl SimConfig {
    pub fn new(gamma: GammaParams, regime_len_days: usize, n_days: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            gamma,
            regime_len_days,
            n_days,
            drift: 0.0,
            seed,
            substeps: 1,
            bridge: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_drift(mut self, drift: f64) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }

    pub fn with_bridge(mut self, bridge: bool) -> Self {
        self.bridge = bridge;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.regime_len_days < 1 {
            return Err(Error::Invalid("regime length must be at least 1 day".into()));
        }
        if self.n_days < 2 {
            return Err(Error::Invalid("simulation needs at least 2 days".into()));
        }
        if self.substeps < 1 {
            return Err(Error::Invalid("substeps must be at least 1".into()));
        }
        if !self.drift.is_finite() {
            return Err(Error::Invalid("drift must be finite".into()));
        }
        Ok(())
    }
}

/// Piecewise-constant precision path with geometric regime lengths.
struct Regimes {
    sampler: PrecisionSampler,
    length: Option<Geometric>,
    beta: f64,
    left: u64,
}

impl Regimes {
    fn new(cfg: &SimConfig) -> Result<Self> {
        let length = if cfg.regime_len_days >= cfg.n_days {
            None
        } else {
            let p = 1.0 / cfg.regime_len_days as f64;
            Some(Geometric::new(p).map_err(|e| Error::Invalid(e.to_string()))?)
        };
        Ok(Self {
            sampler: PrecisionSampler::new(cfg.gamma)?,
            length,
            beta: 0.0,
            left: 0,
        })
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        if self.left == 0 {
            self.beta = self.sampler.draw(rng);
            self.left = match &self.length {
                // failures before the first success, so the length is 1 + draw
                Some(g) => 1 + g.sample(rng),
                None => u64::MAX,
            };
        }
        self.left -= 1;
        self.beta
    }
}

/// One simulated path: daily returns and the first day the level reached 0.
fn simulate_stream(cfg: &SimConfig, stream: u64, x0: f64) -> Result<(Vec<f64>, Option<usize>)> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, stream);
    let mut regimes = Regimes::new(cfg)?;
    let k = cfg.substeps as f64;
    let mut level = x0;
    let mut hit = (x0 <= 0.0).then_some(0);
    let mut v = Vec::with_capacity(cfg.n_days);
    for day in 1..=cfg.n_days {
        let beta = regimes.next(&mut rng);
        let sd = (1.0 / (beta * k)).sqrt();
        let mut r = 0.0;
        for _ in 0..cfg.substeps {
            let z: f64 = rng.sample(StandardNormal);
            let step = cfg.drift / k + sd * z;
            let prev = level;
            r += step;
            level += step;
            if hit.is_none() {
                if level <= 0.0 {
                    hit = Some(day);
                } else if cfg.bridge {
                    // P(min < 0 | both ends above) = exp(-2 a b / (σ² Δ))
                    let p_cross = (-2.0 * prev * level * beta * k).exp();
                    if rng.random::<f64>() < p_cross {
                        hit = Some(day);
                    }
                }
            }
        }
        v.push(r);
    }
    Ok((v, hit))
}

/// Superstatistical daily returns: Gamma-distributed precision held for
/// geometric regimes of mean length τ, Gaussian returns within a regime.
pub fn simulate_superstat(cfg: &SimConfig) -> Result<ReturnSeries> {
    let (v, _) = simulate_stream(cfg, 0, f64::INFINITY)?;
    ReturnSeries::from_values("sim", v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirmPath {
    pub returns: ReturnSeries,
    /// Trading day (1-based) of the first barrier hit; `Some(0)` when the
    /// path starts at or below the barrier.
    pub default_day: Option<usize>,
}

/// Log-asset paths started at `x0 = ln(V₀/D)` with first-passage defaults.
/// Path `i` draws from stream `i`, so results do not depend on scheduling.
pub fn simulate_firm_paths(cfg: &SimConfig, x0: f64, n_firms: usize) -> Result<Vec<FirmPath>> {
    if !x0.is_finite() {
        return Err(Error::Invalid(format!("x0 must be finite, got {x0}")));
    }
    (0..n_firms)
        .into_par_iter()
        .map(|i| {
            let (v, default_day) = simulate_stream(cfg, i as u64, x0)?;
            Ok(FirmPath {
                returns: ReturnSeries::from_values(format!("sim{i:06}"), v)?,
                default_day,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

const MC_CHUNK: usize = 8192;

/// Monte Carlo average of the conditional Black-Cox PD over Gamma precision
/// draws.
pub fn mc_pd_oracle(g: GammaParams, x0: f64, t: f64, n_draws: usize, seed: u64) -> Result<McEstimate> {
    if n_draws < 10_000 {
        return Err(Error::Invalid(format!(
            "mc_pd_oracle needs at least 10^4 draws, got {n_draws}"
        )));
    }
    let sampler = PrecisionSampler::new(g)?;
    let chunks = n_draws.div_ceil(MC_CHUNK);
    let sums = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let m = MC_CHUNK.min(n_draws - c * MC_CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..m {
                let pd = blackcox_pd(x0, 0.0, sampler.draw(&mut rng), t)?.value;
                s += pd;
                s2 += pd * pd;
            }
            Ok((s, s2))
        })
        .collect::<Result<Vec<_>>>()?;
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = n_draws as f64;
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        n: n_draws,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocResult {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    /// Score threshold reached at each point after the origin.
    pub thresholds: Vec<f64>,
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// ROC curve sweeping the distinct scores from high to low. Tied scores move
/// the curve in a single diagonal step.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<RocResult> {
    if scores.len() != labels.len() {
        return Err(Error::Invalid("scores and labels differ in length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Invalid("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Invalid(
            "ROC needs at least one defaulter and one non-defaulter".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));

    let (mut tp, mut fp) = (0u64, 0u64);
    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = Vec::new();
    // twice the area in units of 1/(n_pos n_neg), kept exact in integers
    let mut area2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area2 += (fp - fp0) as u128 * (tp + tp0) as u128;
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
        thresholds.push(s);
    }
    let auc = area2 as f64 / (2.0 * n_pos as f64 * n_neg as f64);
    Ok(RocResult {
        points,
        thresholds,
        auc,
        n_pos,
        n_neg,
    })
}

/// One scored issuer-year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredFirm {
    pub firm_id: String,
    pub score: f64,
    pub defaulted: bool,
    pub year: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucDistribution {
    pub mean: f64,
    pub std_dev: f64,
    pub aucs: Vec<f64>,
}

/// Draw the balanced sample of repeat `r`: all defaulters plus, year by
/// year, as many non-defaulters chosen without replacement.
pub fn balanced_resample(portfolio: &[ScoredFirm], seed: u64, r: usize) -> Result<Vec<usize>> {
    let mut years: BTreeMap<i32, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, f) in portfolio.iter().enumerate() {
        let e = years.entry(f.year).or_default();
        if f.defaulted {
            e.0.push(i);
        } else {
            e.1.push(i);
        }
    }
    let mut rng = stream_rng(seed, r as u64);
    let mut picked = Vec::new();
    for (&year, (pos, neg)) in &years {
        if pos.is_empty() {
            continue;
        }
        if neg.len() < pos.len() {
            return Err(Error::InsufficientControls {
                year,
                needed: pos.len(),
                available: neg.len(),
            });
        }
        picked.extend_from_slice(pos);
        picked.extend(index::sample(&mut rng, neg.len(), pos.len()).into_iter().map(|k| neg[k]));
    }
    Ok(picked)
}

/// AUC over `repeats` year-stratified balanced resamples.
pub fn resampled_auc(portfolio: &[ScoredFirm], repeats: usize, seed: u64) -> Result<AucDistribution> {
    if repeats == 0 {
        return Err(Error::Invalid("repeats must be at least 1".into()));
    }
    // fail early, naming the short year, before any parallel work
    balanced_resample(portfolio, seed, 0)?;
    let aucs = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let idx = balanced_resample(portfolio, seed, r)?;
            let scores: Vec<f64> = idx.iter().map(|&i| portfolio[i].score).collect();
            let labels: Vec<bool> = idx.iter().map(|&i| portfolio[i].defaulted).collect();
            Ok(roc_curve(&scores, &labels)?.auc)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = aucs.len() as f64;
    let mean = aucs.iter().sum::<f64>() / n;
    let std_dev = if aucs.len() > 1 {
        (aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(AucDistribution { mean, std_dev, aucs })
}

pub fn roc_table(r: &RocResult) -> Table {
    let mut t = Table::new(&["threshold", "fpr", "tpr"]);
    t.push(vec![Cell::Empty, 0.0.into(), 0.0.into()]);
    for (th, &(f, p)) in r.thresholds.iter().zip(&r.points[1..]) {
        t.push(vec![(*th).into(), f.into(), p.into()]);
    }
    t
}

pub fn auc_table(d: &AucDistribution) -> Table {
    let mut t = Table::new(&["repeat", "auc"]);
    for (i, a) in d.aucs.iter().enumerate() {
        t.push(vec![i.into(), (*a).into()]);
    }
    t
}

/// A group of synthetic issuers sharing one return law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub n_firms: usize,
    pub law: QGaussianParams,
    /// Leverage `D/V` at the evaluation date, drawn uniformly in this range.
    pub leverage: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioConfig {
    pub cohorts: Vec<Cohort>,
    /// Daily returns observed before the evaluation date.
    pub history_days: usize,
    /// Forward window in which defaults are labelled.
    pub horizon_days: usize,
    pub first_year: i32,
    pub n_years: usize,
    pub seed: u64,
}

impl PortfolioConfig {
    /// 360 solvent thin-tailed issuers and 40 leveraged fat-tailed ones with
    /// i.i.d. daily q-Gaussian returns.
    pub fn standard(seed: u64) -> Self {
        let thin = QGaussianParams::new(1.2, 1e4).expect("valid law");
        let fat = QGaussianParams::new(1.8, 1e4).expect("valid law");
        Self {
            cohorts: vec![
                Cohort {
                    n_firms: 360,
                    law: thin,
                    leverage: (0.1, 0.3),
                },
                Cohort {
                    n_firms: 40,
                    law: fat,
                    leverage: (0.7, 0.8),
                },
            ],
            history_days: 300,
            horizon_days: 250,
            first_year: 2007,
            n_years: 6,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFirm {
    pub series: FirmSeries,
    pub law: QGaussianParams,
    pub defaulted: bool,
}

/// Weekdays ending on the last weekday of `year`, oldest first.
fn trading_days_ending(year: i32, n: usize) -> Vec<NaiveDate> {
    let mut d = NaiveDate::from_ymd_opt(year, 12, 31).expect("valid date");
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.pred_opt().expect("date in range");
    }
    out.reverse();
    out
}

fn next_trading_days(after: NaiveDate, n: usize) -> Vec<NaiveDate> {
    after
        .iter_days()
        .skip(1)
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(n)
        .collect()
}

fn draw_increments(law: QGaussianParams, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let scale = law.beta_tilde().recip().sqrt();
    if law.is_gaussian() {
        return Ok((0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect());
    }
    let sampler = PrecisionSampler::new(q_to_gamma(law)?)?;
    Ok((0..n)
        .map(|_| sampler.draw(rng).recip().sqrt() * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

const MAX_HISTORY_ATTEMPTS: u64 = 10_000;

/// Labelled synthetic portfolio. Each issuer's history is built backward
/// from its evaluation-date leverage, so its distance to the default point is
/// known exactly; histories that touch the default point are redrawn. The
/// label comes from a forward path over `horizon_days` with first-passage
/// default on the daily grid. Default point = book liabilities, held
/// constant; equity = V − D.
pub fn simulate_portfolio(cfg: &PortfolioConfig) -> Result<Vec<SyntheticFirm>> {
    if cfg.n_years == 0 || cfg.history_days < 2 || cfg.horizon_days < 1 {
        return Err(Error::Invalid("portfolio needs years, history and a horizon".into()));
    }
    let specs: Vec<(usize, Cohort)> = cfg
        .cohorts
        .iter()
        .flat_map(|c| std::iter::repeat_n(*c, c.n_firms))
        .enumerate()
        .collect();
    let debt = 1000.0;
    specs
        .into_par_iter()
        .map(|(i, c)| {
            let (lo, hi) = c.leverage;
            if !(lo > 0.0 && hi < 1.0 && lo <= hi) {
                return Err(Error::Invalid(format!("leverage range ({lo}, {hi}) outside (0, 1)")));
            }
            let eval_year = cfg.first_year + (i % cfg.n_years) as i32 - 1;
            let dates = trading_days_ending(eval_year, cfg.history_days + 1);
            for attempt in 0..MAX_HISTORY_ATTEMPTS {
                let mut rng = stream_rng(cfg.seed, ((i as u64) << 20) | attempt);
                let lev = rng.random_range(lo..=hi);
                let x_end = -f64::ln(lev);
                let r = draw_increments(c.law, cfg.history_days, &mut rng)?;
                let mut x = vec![x_end; cfg.history_days + 1];
                for k in (0..cfg.history_days).rev() {
                    x[k] = x[k + 1] - r[k];
                }
                if x.iter().any(|&xi| xi <= 1e-6) {
                    continue;
                }
                let fwd = draw_increments(c.law, cfg.horizon_days, &mut rng)?;
                let mut level = x_end;
                let mut hit = None;
                for (k, dx) in fwd.iter().enumerate() {
                    level += dx;
                    if level <= 0.0 {
                        hit = Some(k);
                        break;
                    }
                }
                let default_date = hit.map(|k| next_trading_days(dates[cfg.history_days], k + 1)[k]);
                let equity = x.iter().map(|xi| debt * xi.exp_m1()).collect();
                let series = FirmSeries::new(
                    format!("F{i:04}"),
                    dates,
                    equity,
                    vec![Some(debt); cfg.history_days + 1],
                    default_date,
                )?;
                return Ok(SyntheticFirm {
                    series,
                    law: c.law,
                    defaulted: hit.is_some(),
                });
            }
            Err(Error::Invalid(format!(
                "firm {i}: no history above the default point in {MAX_HISTORY_ATTEMPTS} attempts"
            )))
        })
        .collect()
}
