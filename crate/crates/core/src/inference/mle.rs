use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::law::ReturnLaw;
use crate::dist::{GaussianLaw, QGaussianParams};
use crate::error::{Error, Result};
use crate::specfun::{digamma_half_diff, ln_beta};

/// Convergence threshold on the gradient norm of the negative log-likelihood
/// in transformed coordinates.
pub const GRAD_TOL: f64 = 1e-8;
/// Fits closer than this to q = 1 or q = 3 are flagged as boundary hits.
pub const BOUNDARY_DELTA: f64 = 1e-4;
const MAX_ITER: usize = 200;
const MIN_GAUSSIAN_N: usize = 30;
const MIN_QGAUSSIAN_N: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FitParams {
    Gaussian(GaussianLaw),
    QGaussian(QGaussianParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: FitParams,
    /// Centre of the fitted law (mean for the Gaussian fit).
    pub location: f64,
    pub log_likelihood: f64,
    pub n: usize,
    pub converged: bool,
    pub boundary_hit: bool,
    pub window_end_date: Option<NaiveDate>,
    pub iterations: usize,
    /// Final (projected) gradient norm; zero for closed-form fits.
    pub grad_norm: f64,
}

impl FitResult {
    pub fn q(&self) -> f64 {
        match self.params {
            FitParams::Gaussian(_) => 1.0,
            FitParams::QGaussian(p) => p.q(),
        }
    }

    /// `β̃` for q-fits, the precision for Gaussian fits.
    pub fn beta_tilde(&self) -> f64 {
        match self.params {
            FitParams::Gaussian(g) => g.precision(),
            FitParams::QGaussian(p) => p.beta_tilde(),
        }
    }

    pub fn qparams(&self) -> QGaussianParams {
        match self.params {
            FitParams::Gaussian(g) => {
                QGaussianParams::gaussian(g.precision()).expect("fitted precision is positive")
            }
            FitParams::QGaussian(p) => p,
        }
    }

    pub fn law(&self) -> ReturnLaw {
        let k = match self.params {
            FitParams::Gaussian(_) => 2,
            FitParams::QGaussian(_) => 3,
        };
        ReturnLaw::new(self.qparams(), self.location, k)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Closed-form Gaussian MLE: sample mean and inverse biased variance.
pub fn fit_gaussian_mle(v: &[f64]) -> Result<FitResult> {
    let n = v.len();
    if n < MIN_GAUSSIAN_N {
        return Err(Error::InsufficientData(format!(
            "Gaussian fit needs at least {MIN_GAUSSIAN_N} returns, got {n}"
        )));
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
    // log-returns below 1e-10 in spread carry no information
    if !(var.sqrt() > 1e-10) {
        return Err(Error::DegenerateSample(format!(
            "return standard deviation {:e} is numerically zero",
            var.sqrt()
        )));
    }
    let ll = -0.5 * n as f64 * ((2.0 * std::f64::consts::PI * var).ln() + 1.0);
    Ok(FitResult {
        params: FitParams::Gaussian(GaussianLaw::new(m, 1.0 / var)?),
        location: m,
        log_likelihood: ll,
        n,
        converged: true,
        boundary_hit: false,
        window_end_date: None,
        iterations: 0,
        grad_norm: 0.0,
    })
}

/// `ln(1+ky)/k² - y/(k(1+ky))` without cancellation at small `ky`.
fn dlog_term_dq(k: f64, y: f64) -> f64 {
    let u = k * y;
    if u.abs() < 1e-3 {
        // sum_{j>=2} (-1)^j (j-1)/j k^(j-2) y^j
        let mut acc = 0.0;
        let mut pow = y * y;
        for j in 2..10 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * (j as f64 - 1.0) / j as f64 * pow;
            pow *= u;
        }
        acc
    } else {
        u.ln_1p() / (k * k) - y / (k * (1.0 + u))
    }
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Negative log-likelihood in coordinates `θ = (logit((q-1)/2), ln β̃, c)`
/// with location `μ = μ₀ + s₀ c`.
struct Objective<'a> {
    x: &'a [f64],
    mu0: f64,
    s0: f64,
}

struct Point {
    q: f64,
    beta_tilde: f64,
    mu: f64,
}

impl Objective<'_> {
    fn point(&self, th: &[f64; 3]) -> Point {
        Point {
            q: 1.0 + 2.0 * logistic(th[0]),
            beta_tilde: th[1].exp(),
            mu: self.mu0 + self.s0 * th[2],
        }
    }

    fn theta(&self, q: f64, beta_tilde: f64, mu: f64) -> [f64; 3] {
        [logit(0.5 * (q - 1.0)), beta_tilde.ln(), (mu - self.mu0) / self.s0]
    }

    fn value(&self, th: &[f64; 3]) -> f64 {
        let p = self.point(th);
        let k = p.q - 1.0;
        let a = (3.0 - p.q) / (2.0 * k);
        let Ok(lnb) = ln_beta(0.5, a) else {
            return f64::INFINITY;
        };
        let per_obs_const = 0.5 * k.ln() - lnb + 0.5 * (0.5 * p.beta_tilde).ln();
        let mut s = 0.0;
        for &x in self.x {
            let d = x - p.mu;
            let y = 0.5 * p.beta_tilde * d * d;
            s += (k * y).ln_1p() / k;
        }
        -(self.x.len() as f64 * per_obs_const - s)
    }

    fn gradient(&self, th: &[f64; 3]) -> [f64; 3] {
        let p = self.point(th);
        let k = p.q - 1.0;
        let a = (3.0 - p.q) / (2.0 * k);
        let dconst_dq = 0.5 / k + digamma_half_diff(a) / (k * k);
        let n = self.x.len() as f64;
        let (mut gq, mut gw, mut gmu) = (n * dconst_dq, 0.5 * n, 0.0);
        for &x in self.x {
            let d = x - p.mu;
            let y = 0.5 * p.beta_tilde * d * d;
            let denom = 1.0 + k * y;
            gq += dlog_term_dq(k, y);
            gw -= y / denom;
            gmu += p.beta_tilde * d / denom;
        }
        let dq_du = 0.5 * k * (3.0 - p.q);
        [-gq * dq_du, -gw, -gmu * self.s0]
    }

    fn hessian(&self, th: &[f64; 3]) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for j in 0..3 {
            let step = 1e-5 * th[j].abs().max(1.0);
            let mut plus = *th;
            let mut minus = *th;
            plus[j] += step;
            minus[j] -= step;
            let gp = self.gradient(&plus);
            let gm = self.gradient(&minus);
            for i in 0..3 {
                h[i][j] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        for i in 0..3 {
            for j in 0..i {
                let s = 0.5 * (h[i][j] + h[j][i]);
                h[i][j] = s;
                h[j][i] = s;
            }
        }
        h
    }
}

/// Solve `A x = b` for symmetric positive definite `A` (free coordinates only).
fn cholesky_solve(a: &[[f64; 3]; 3], b: &[f64; 3], free: &[bool; 3]) -> Option<[f64; 3]> {
    let idx: Vec<usize> = (0..3).filter(|&i| free[i]).collect();
    let m = idx.len();
    let mut l = [[0.0; 3]; 3];
    for r in 0..m {
        for c in 0..=r {
            let mut s = a[idx[r]][idx[c]];
            for k in 0..c {
                s -= l[r][k] * l[c][k];
            }
            if r == c {
                if !(s > 0.0) {
                    return None;
                }
                l[r][r] = s.sqrt();
            } else {
                l[r][c] = s / l[c][c];
            }
        }
    }
    let mut y = [0.0; 3];
    for r in 0..m {
        let mut s = b[idx[r]];
        for k in 0..r {
            s -= l[r][k] * y[k];
        }
        y[r] = s / l[r][r];
    }
    let mut xr = [0.0; 3];
    for r in (0..m).rev() {
        let mut s = y[r];
        for k in r + 1..m {
            s -= l[k][r] * xr[k];
        }
        xr[r] = s / l[r][r];
    }
    let mut x = [0.0; 3];
    for (r, &i) in idx.iter().enumerate() {
        x[i] = xr[r];
    }
    Some(x)
}

fn norm(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn quartiles(sorted: &[f64]) -> (f64, f64, f64) {
    let at = |p: f64| {
        let h = p * (sorted.len() - 1) as f64;
        let i = h.floor() as usize;
        let frac = h - i as f64;
        if i + 1 < sorted.len() {
            sorted[i] + frac * (sorted[i + 1] - sorted[i])
        } else {
            sorted[i]
        }
    };
    (at(0.25), at(0.5), at(0.75))
}

/// Method-of-moments start: kurtosis-matched q when the sample excess
/// kurtosis is positive (Student-t: excess = 6/(ν-4)), otherwise q = 1.5;
/// β̃ from the interquartile range; location at the median.
pub(crate) fn moment_init(v: &[f64]) -> Result<(QGaussianParams, f64)> {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (q1, med, q3) = quartiles(&sorted);
    let n = v.len() as f64;
    let m2 = v.iter().map(|x| (x - med).powi(2)).sum::<f64>() / n;
    let m4 = v.iter().map(|x| (x - med).powi(4)).sum::<f64>() / n;
    let excess = m4 / (m2 * m2) - 3.0;
    let mut q = 1.5;
    if excess.is_finite() && excess > 0.0 {
        let nu = 4.0 + 6.0 / excess;
        let qk = (nu + 3.0) / (nu + 1.0);
        if qk > 1.0 + 10.0 * BOUNDARY_DELTA && qk < 3.0 - 10.0 * BOUNDARY_DELTA {
            q = qk;
        }
    }
    let unit = ReturnLaw::new(QGaussianParams::new(q, 1.0)?, 0.0, 3);
    let iqr = q3 - q1;
    let beta_tilde = if iqr > 0.0 {
        (2.0 * unit.quantile(0.75)? / iqr).powi(2)
    } else {
        1.0 / m2
    };
    Ok((QGaussianParams::new(q, beta_tilde)?, med))
}

/// Maximum-likelihood fit of a q-Gaussian with free location.
///
/// Damped Newton iterations on the negative log-likelihood in
/// `(logit((q-1)/2), ln β̃, scaled location)`, with q confined to
/// `[1+δ, 3-δ]`. If the closed-form Gaussian fit scores higher than the
/// interior optimum, the q = 1 member is returned with `boundary_hit` set.
pub fn fit_qgaussian_mle(v: &[f64], init: Option<(QGaussianParams, f64)>) -> Result<FitResult> {
    let n = v.len();
    if n < MIN_QGAUSSIAN_N {
        return Err(Error::InsufficientData(format!(
            "q-Gaussian fit needs at least {MIN_QGAUSSIAN_N} returns, got {n}"
        )));
    }
    let gauss = fit_gaussian_mle(v)?;
    let (p0, mu0) = match init {
        Some(start) => start,
        None => moment_init(v)?,
    };
    let q0 = p0.q().clamp(1.0 + 10.0 * BOUNDARY_DELTA, 3.0 - 10.0 * BOUNDARY_DELTA);
    let obj = Objective {
        x: v,
        mu0,
        s0: p0.beta_tilde().recip().sqrt(),
    };
    let u_lo = logit(0.5 * BOUNDARY_DELTA);
    let u_hi = logit(1.0 - 0.5 * BOUNDARY_DELTA);
    let clamp = |mut th: [f64; 3]| {
        th[0] = th[0].clamp(u_lo, u_hi);
        th
    };

    let mut th = obj.theta(q0, p0.beta_tilde(), mu0);
    let mut f = obj.value(&th);
    if !f.is_finite() {
        return Err(Error::Invalid("non-finite likelihood at the starting point".into()));
    }
    let mut g = obj.gradient(&th);
    let mut converged = false;
    let mut iterations = 0;
    let mut pg_norm = f64::INFINITY;
    for it in 0..MAX_ITER {
        iterations = it;
        // coordinates pinned at the q bounds with the gradient pushing outward
        let at_lo = th[0] <= u_lo && g[0] > 0.0;
        let at_hi = th[0] >= u_hi && g[0] < 0.0;
        let free = [!(at_lo || at_hi), true, true];
        let mut pg = g;
        if !free[0] {
            pg[0] = 0.0;
        }
        pg_norm = norm(&pg);
        if pg_norm < GRAD_TOL {
            converged = true;
            break;
        }
        let h = obj.hessian(&th);
        let neg: [f64; 3] = [-pg[0], -pg[1], -pg[2]];
        let mut lambda = 0.0;
        let step = loop {
            let mut hl = h;
            for (i, row) in hl.iter_mut().enumerate() {
                row[i] += lambda;
            }
            if let Some(s) = cholesky_solve(&hl, &neg, &free) {
                break s;
            }
            let diag = (0..3).map(|i| h[i][i].abs()).fold(1e-8, f64::max);
            lambda = if lambda == 0.0 { 1e-6 * diag } else { lambda * 10.0 };
            if lambda > 1e12 * diag {
                break neg;
            }
        };
        let slope: f64 = (0..3).map(|i| pg[i] * step[i]).sum();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = clamp([
                th[0] + alpha * step[0],
                th[1] + alpha * step[1],
                th[2] + alpha * step[2],
            ]);
            let fc = obj.value(&cand);
            if fc.is_finite() {
                let gc = obj.gradient(&cand);
                let armijo = fc <= f + 1e-4 * alpha * slope;
                // within rounding of f, accept steps that shrink the gradient
                let flat = fc <= f + 1e-12 * f.abs().max(1.0) && norm(&gc) < pg_norm;
                if armijo || flat {
                    th = cand;
                    f = fc;
                    g = gc;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let pt = obj.point(&th);
    let ll = -f;
    let boundary_hit =
        pt.q - 1.0 <= BOUNDARY_DELTA * 1.000_001 || 3.0 - pt.q <= BOUNDARY_DELTA * 1.000_001;
    if gauss.log_likelihood > ll {
        let FitParams::Gaussian(gl) = gauss.params else {
            unreachable!("closed-form fit is Gaussian")
        };
        return Ok(FitResult {
            params: FitParams::QGaussian(QGaussianParams::gaussian(gl.precision())?),
            location: gauss.location,
            log_likelihood: gauss.log_likelihood,
            n,
            converged: true,
            boundary_hit: true,
            window_end_date: None,
            iterations,
            grad_norm: pg_norm,
        });
    }
    Ok(FitResult {
        params: FitParams::QGaussian(QGaussianParams::new(pt.q, pt.beta_tilde)?),
        location: pt.mu,
        log_likelihood: ll,
        n,
        converged,
        boundary_hit,
        window_end_date: None,
        iterations,
        grad_norm: pg_norm,
    })
}
