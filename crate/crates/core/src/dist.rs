//! Return distributions: the conditional Gaussian, the Gamma law of the
//! precision, and the unconditional q-Gaussian obtained by mixing the two.
//!
//! The q-Gaussian is carried in three equivalent parameterizations:
//!
//! | form        | parameters   | relation                                   |
//! |-------------|--------------|--------------------------------------------|
//! | Tsallis     | `(q, β̃)`     | `q = (2a+3)/(2a+1)`, `β̃ = (2a+1)/(2b)`      |
//! | Gamma mix   | `(a, b)`     | shape / rate of the precision law          |
//! | Student-t   | `(ν, s)`     | `ν = 2a`, `s = sqrt(b/a)`                   |
//!
//! Time `t` is measured in trading days; `β̃` is per trading day.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::specfun::{self, ln_beta};

/// Trading days per year.
pub const YEAR_DAYS: f64 = 250.0;

/// Gamma law `f(β) = b^a / Γ(a) β^(a-1) e^(-bβ)` of the return precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    a: f64,
    b: f64,
}

impl GammaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::domain(
                "GammaParams",
                format!("shape and rate must be positive and finite, got a={a}, b={b}"),
            ));
        }
        Ok(Self { a, b })
    }

    pub fn shape(&self) -> f64 {
        self.a
    }

    pub fn rate(&self) -> f64 {
        self.b
    }

    /// Mean precision `β₀ = a/b`.
    pub fn mean_precision(&self) -> f64 {
        self.a / self.b
    }
}

/// Unconditional q-Gaussian parameters. `q = 1` is the Gaussian member with
/// precision `β̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QGaussianParams {
    q: f64,
    beta_tilde: f64,
}

impl QGaussianParams {
    pub fn new(q: f64, beta_tilde: f64) -> Result<Self> {
        if !(1.0..3.0).contains(&q) {
            return Err(Error::domain(
                "QGaussianParams",
                format!("q must lie in [1,3), got {q}"),
            ));
        }
        if !(beta_tilde > 0.0 && beta_tilde.is_finite()) {
            return Err(Error::domain(
                "QGaussianParams",
                format!("beta_tilde must be positive and finite, got {beta_tilde}"),
            ));
        }
        Ok(Self { q, beta_tilde })
    }

    /// Gaussian member (q = 1) with precision `beta`.
    pub fn gaussian(beta: f64) -> Result<Self> {
        Self::new(1.0, beta)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta_tilde(&self) -> f64 {
        self.beta_tilde
    }

    pub fn is_gaussian(&self) -> bool {
        self.q == 1.0
    }
}

/// Scaled Student-t parameters of the same law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentParams {
    pub nu: f64,
    pub s: f64,
}

/// Conditional Gaussian law of the log-asset value: effective drift per day
/// `m = μ - σ²/2` and precision `β = 1/σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianLaw {
    m: f64,
    beta: f64,
}

impl GaussianLaw {
    pub fn new(m: f64, beta: f64) -> Result<Self> {
        if !m.is_finite() || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(
                "GaussianLaw",
                format!("need finite drift and positive precision, got m={m}, beta={beta}"),
            ));
        }
        Ok(Self { m, beta })
    }

    /// From the arithmetic drift `μ` and variance `σ²` per day.
    pub fn from_mu_sigma2(mu: f64, sigma2: f64) -> Result<Self> {
        Self::new(mu - 0.5 * sigma2, 1.0 / sigma2)
    }

    pub fn drift(&self) -> f64 {
        self.m
    }

    pub fn precision(&self) -> f64 {
        self.beta
    }

    pub fn sigma(&self) -> f64 {
        self.beta.recip().sqrt()
    }
}

/// Variance per unit time of the q-Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Variance {
    Finite(f64),
    /// `5/3 <= q < 2`.
    Divergent,
    /// `2 <= q < 3`.
    Undefined,
}

pub fn gamma_to_q(g: GammaParams) -> QGaussianParams {
    let a = g.a;
    QGaussianParams {
        q: (2.0 * a + 3.0) / (2.0 * a + 1.0),
        beta_tilde: (2.0 * a + 1.0) / (2.0 * g.b),
    }
}

/// Shape of the mixing law, `a = (3-q)/(2(q-1))`.
pub(crate) fn gamma_shape(q: f64) -> f64 {
    (3.0 - q) / (2.0 * (q - 1.0))
}

pub fn q_to_gamma(p: QGaussianParams) -> Result<GammaParams> {
    if p.is_gaussian() {
        return Err(Error::GaussianDegenerate {
            what: "finite Gamma mixing law",
        });
    }
    let a = gamma_shape(p.q);
    GammaParams::new(a, (2.0 * a + 1.0) / (2.0 * p.beta_tilde))
}

/// Gamma density of the precision. At `beta = 0` returns the boundary limit.
pub fn gamma_pdf(g: GammaParams, beta: f64) -> Result<f64> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::domain(
            "gamma_pdf",
            format!("precision must be nonnegative and finite, got {beta}"),
        ));
    }
    if beta == 0.0 {
        return Ok(match g.a.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => g.b,
            _ => 0.0,
        });
    }
    let ln = g.a * g.b.ln() - specfun::log_gamma(g.a)? + (g.a - 1.0) * beta.ln() - g.b * beta;
    Ok(ln.exp())
}

fn check_time(func: &'static str, t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("time must be positive, got {t}")))
    }
}

/// Green function of unbounded diffusion with constant drift and precision.
pub fn gaussian_green(law: GaussianLaw, x: f64, x0: f64, t: f64) -> Result<f64> {
    check_time("gaussian_green", t)?;
    let d = x - x0 - law.m * t;
    Ok((law.beta / (2.0 * std::f64::consts::PI * t)).sqrt() * (-law.beta * d * d / (2.0 * t)).exp())
}

/// q-Gaussian density of `x` after `t` days started from `x0`.
pub fn qgaussian_pdf(p: QGaussianParams, x: f64, x0: f64, t: f64) -> Result<f64> {
    check_time("qgaussian_pdf", t)?;
    if p.is_gaussian() {
        return gaussian_green(GaussianLaw::new(0.0, p.beta_tilde)?, x, x0, t);
    }
    Ok(qgaussian_ln_pdf_unchecked(p.q, p.beta_tilde, (x - x0) / t.sqrt()).exp() / t.sqrt())
}

/// `ln` density at unit time of the standardized deviation `y`, q > 1.
pub(crate) fn qgaussian_ln_pdf_unchecked(q: f64, beta_tilde: f64, y: f64) -> f64 {
    let qm1 = q - 1.0;
    let ln_cq = ln_beta(0.5, gamma_shape(q)).unwrap_or(f64::NAN) - 0.5 * qm1.ln();
    -ln_cq + 0.5 * (0.5 * beta_tilde).ln() - (qm1 * beta_tilde * y * y * 0.5).ln_1p() / qm1
}

/// Lower-tail mass `P(X <= x0 - |d|)` of the q-Gaussian, q > 1.
pub(crate) fn qgaussian_lower_tail(q: f64, beta_tilde: f64, d: f64, t: f64) -> Result<f64> {
    if !d.is_finite() {
        return Ok(0.0);
    }
    let w = (q - 1.0) * beta_tilde * d * d / (2.0 * t);
    let z = 1.0 / (1.0 + w);
    let zc = w / (1.0 + w);
    Ok(0.5 * specfun::reg_inc_beta_split(gamma_shape(q), 0.5, z, zc)?)
}

/// q-Gaussian CDF, closed form through the regularized incomplete Beta.
pub fn qgaussian_cdf(p: QGaussianParams, x: f64, x0: f64, t: f64) -> Result<f64> {
    check_time("qgaussian_cdf", t)?;
    if x.is_nan() || !x0.is_finite() {
        return Err(Error::domain("qgaussian_cdf", "non-finite location or NaN argument"));
    }
    let d = x - x0;
    if d == 0.0 {
        return Ok(0.5);
    }
    if p.is_gaussian() {
        if d.is_infinite() {
            return Ok(if d > 0.0 { 1.0 } else { 0.0 });
        }
        return specfun::normal_cdf(d * (p.beta_tilde / t).sqrt());
    }
    let tail = qgaussian_lower_tail(p.q, p.beta_tilde, d, t)?;
    Ok(if d < 0.0 { tail } else { 1.0 - tail })
}

/// Variance per unit time `2/((5-3q)β̃)`, or the regime in which it fails to exist.
pub fn qgaussian_variance(p: QGaussianParams) -> Variance {
    if p.q < 5.0 / 3.0 {
        Variance::Finite(2.0 / ((5.0 - 3.0 * p.q) * p.beta_tilde))
    } else if p.q < 2.0 {
        Variance::Divergent
    } else {
        Variance::Undefined
    }
}

/// Power-law exponent `2/(q-1)` of the density tails.
pub fn tail_exponent(p: QGaussianParams) -> Result<f64> {
    if p.is_gaussian() {
        return Err(Error::GaussianDegenerate {
            what: "power-law tail",
        });
    }
    Ok(2.0 / (p.q - 1.0))
}

pub fn student_equiv(p: QGaussianParams) -> Result<StudentParams> {
    let g = q_to_gamma(p).map_err(|_| Error::GaussianDegenerate {
        what: "Student-t equivalent",
    })?;
    Ok(StudentParams {
        nu: 2.0 * g.a,
        s: (g.b / g.a).sqrt(),
    })
}

pub fn student_to_q(s: StudentParams) -> Result<QGaussianParams> {
    if !(s.nu > 0.0 && s.s > 0.0) {
        return Err(Error::domain(
            "student_to_q",
            format!("nu and s must be positive, got nu={}, s={}", s.nu, s.s),
        ));
    }
    QGaussianParams::new(
        (s.nu + 3.0) / (s.nu + 1.0),
        (s.nu + 1.0) / (s.nu * s.s * s.s),
    )
}

/// Scaled Student-t density, scale `s sqrt(t)`.
pub fn student_pdf(s: StudentParams, x: f64, x0: f64, t: f64) -> Result<f64> {
    check_time("student_pdf", t)?;
    let scale2 = s.nu * s.s * s.s * t;
    let d = x - x0;
    let ln = -ln_beta(0.5, 0.5 * s.nu)? - 0.5 * scale2.ln()
        - 0.5 * (s.nu + 1.0) * (d * d / scale2).ln_1p();
    Ok(ln.exp())
}

/// Draw `n` increments over `t` days by the two-stage mixture: precision
/// `β ~ Gamma(a, b)`, then a Gaussian with precision `β/t`.
pub fn sample_qgaussian(p: QGaussianParams, n: usize, t: f64, seed: u64) -> Result<Vec<f64>> {
    check_time("sample_qgaussian", t)?;
    if n == 0 {
        return Err(Error::Invalid("sample size must be at least 1".into()));
    }
    let mut rng = stream_rng(seed, 0);
    if p.is_gaussian() {
        let sd = (t / p.beta_tilde).sqrt();
        return Ok((0..n)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect());
    }
    let sampler = PrecisionSampler::new(q_to_gamma(p)?)?;
    Ok((0..n)
        .map(|_| {
            let beta = sampler.draw(&mut rng);
            (t / beta).sqrt() * rng.sample::<f64, _>(StandardNormal)
        })
        .collect())
}

/// Gamma(a, b) precision draws.
#[derive(Debug, Clone, Copy)]
pub struct PrecisionSampler {
    gamma: Gamma<f64>,
}

impl PrecisionSampler {
    pub fn new(g: GammaParams) -> Result<Self> {
        let gamma = Gamma::new(g.a, 1.0 / g.b)
            .map_err(|e| Error::domain("PrecisionSampler", e.to_string()))?;
        Ok(Self { gamma })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // a Gamma draw can underflow to zero for tiny shapes
        self.gamma.sample(rng).max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::c_q;
    use std::f64::consts::{PI, SQRT_2};

    fn qp(q: f64, b: f64) -> QGaussianParams {
        QGaussianParams::new(q, b).unwrap()
    }

    #[test]
    fn gamma_to_q_examples() {
        let p = gamma_to_q(GammaParams::new(2.0, 1.0).unwrap());
        assert!((p.q() - 1.4).abs() < 1e-15 && (p.beta_tilde() - 2.5).abs() < 1e-15);
        let p = gamma_to_q(GammaParams::new(0.5, 1.0).unwrap());
        assert_eq!((p.q(), p.beta_tilde()), (2.0, 1.0));
        let p = gamma_to_q(GammaParams::new(1e9, 1e9).unwrap());
        assert!(p.q() - 1.0 < 1e-8);
    }

    #[test]
    fn q_to_gamma_examples() {
        let g = q_to_gamma(qp(1.4, 2.5)).unwrap();
        assert!((g.shape() - 2.0).abs() < 1e-12 && (g.rate() - 1.0).abs() < 1e-12);
        let g = q_to_gamma(qp(5.0 / 3.0, 1.0)).unwrap();
        assert!((g.shape() - 1.0).abs() < 1e-12 && (g.rate() - 1.5).abs() < 1e-12);
        let g = q_to_gamma(qp(2.0, 1.0)).unwrap();
        assert_eq!((g.shape(), g.rate()), (0.5, 1.0));
        assert!(matches!(
            q_to_gamma(qp(1.0, 1.0)),
            Err(Error::GaussianDegenerate { .. })
        ));
    }

    #[test]
    fn params_reject_out_of_range() {
        assert!(QGaussianParams::new(3.0, 1.0).is_err());
        assert!(QGaussianParams::new(0.9, 1.0).is_err());
        assert!(QGaussianParams::new(1.5, 0.0).is_err());
        assert!(GammaParams::new(0.0, 1.0).is_err());
        assert!(GaussianLaw::new(0.0, -1.0).is_err());
    }

    #[test]
    fn gamma_pdf_examples() {
        let g = GammaParams::new(1.0, 1.0).unwrap();
        assert_eq!(gamma_pdf(g, 0.0).unwrap(), 1.0);
        let g = GammaParams::new(2.0, 1.0).unwrap();
        assert!((gamma_pdf(g, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(gamma_pdf(g, -0.1).is_err());
    }

    #[test]
    fn qgaussian_pdf_peak_and_symmetry() {
        let p = qp(1.4, 2.5);
        let t = 3.0;
        let peak = qgaussian_pdf(p, 0.7, 0.7, t).unwrap();
        let want = (2.5 / (2.0 * t)).sqrt() / c_q(1.4).unwrap();
        assert!((peak - want).abs() < 1e-14);
        for d in [0.1, 0.5, 2.0, 10.0] {
            let l = qgaussian_pdf(p, 0.7 - d, 0.7, t).unwrap();
            let r = qgaussian_pdf(p, 0.7 + d, 0.7, t).unwrap();
            assert!((l - r).abs() <= 1e-15 * l);
        }
        assert!(qgaussian_pdf(p, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn qgaussian_pdf_gaussian_limit() {
        let g = qp(1.0, 2.0);
        let nearly = qp(1.0 + 1e-8, 2.0);
        for x in [-2.0, -0.5, 0.0, 0.3, 1.7] {
            let a = qgaussian_pdf(g, x, 0.0, 1.5).unwrap();
            let b = qgaussian_pdf(nearly, x, 0.0, 1.5).unwrap();
            assert!((a - b).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn qgaussian_cdf_examples() {
        let p = qp(1.5, 1.0);
        assert_eq!(qgaussian_cdf(p, 2.0, 2.0, 1.0).unwrap(), 0.5);
        let oracle = 0.5 * (PI / 4.0 - 0.5) / (PI / 2.0);
        assert!((qgaussian_cdf(p, 0.0, 2.0, 1.0).unwrap() - oracle).abs() < 1e-12);
        assert_eq!(qgaussian_cdf(p, f64::NEG_INFINITY, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(qgaussian_cdf(p, f64::INFINITY, 0.0, 1.0).unwrap(), 1.0);
        assert!(qgaussian_cdf(p, -1e12, 0.0, 1.0).unwrap() < 1e-10);
        let mut prev = 0.0;
        for i in -300..=300 {
            let c = qgaussian_cdf(p, i as f64 * 0.05, 0.0, 1.0).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn variance_regimes() {
        assert!(matches!(qgaussian_variance(qp(1.4, 1.0)), Variance::Finite(v) if (v - 2.5).abs() < 1e-12));
        assert_eq!(qgaussian_variance(qp(5.0 / 3.0, 1.0)), Variance::Divergent);
        assert_eq!(qgaussian_variance(qp(1.9, 1.0)), Variance::Divergent);
        assert_eq!(qgaussian_variance(qp(2.2, 1.0)), Variance::Undefined);
        assert_eq!(qgaussian_variance(qp(1.0, 4.0)), Variance::Finite(0.25));
    }

    #[test]
    fn tail_exponent_values() {
        assert_eq!(tail_exponent(qp(1.5, 1.0)).unwrap(), 4.0);
        assert_eq!(tail_exponent(qp(2.0, 1.0)).unwrap(), 2.0);
        let near3 = tail_exponent(qp(3.0 - 1e-9, 1.0)).unwrap();
        assert!(near3 > 1.0 && near3 < 1.0 + 1e-8);
        assert!(tail_exponent(qp(1.0, 1.0)).is_err());
    }

    #[test]
    fn student_equivalence() {
        let s = student_equiv(qp(1.4, 2.5)).unwrap();
        assert!((s.nu - 4.0).abs() < 1e-12 && (s.s - 0.5f64.sqrt()).abs() < 1e-12);
        let s = student_equiv(qp(2.0, 1.0)).unwrap();
        assert!((s.nu - 1.0).abs() < 1e-12 && (s.s - SQRT_2).abs() < 1e-12);
        assert!(student_equiv(qp(1.0, 1.0)).is_err());
        for &(q, b) in &[(1.1, 0.3), (1.4, 2.5), (1.9, 40.0), (2.7, 1e4)] {
            let p = qp(q, b);
            let s = student_equiv(p).unwrap();
            for x in [-3.0, -0.2, 0.0, 0.9, 7.0] {
                let a = student_pdf(s, x, 0.1, 2.0).unwrap();
                let c = qgaussian_pdf(p, x, 0.1, 2.0).unwrap();
                assert!((a - c).abs() <= 1e-12 * c.max(1e-300), "q={q} x={x}");
            }
        }
    }

    #[test]
    fn sampler_cardinality_and_determinism() {
        let p = qp(1.4, 2.5);
        assert!(sample_qgaussian(p, 0, 1.0, 1).is_err());
        assert_eq!(sample_qgaussian(p, 1, 1.0, 1).unwrap().len(), 1);
        assert_eq!(
            sample_qgaussian(p, 100, 1.0, 9).unwrap(),
            sample_qgaussian(p, 100, 1.0, 9).unwrap()
        );
        assert_ne!(
            sample_qgaussian(p, 100, 1.0, 9).unwrap(),
            sample_qgaussian(p, 100, 1.0, 10).unwrap()
        );
    }
}
