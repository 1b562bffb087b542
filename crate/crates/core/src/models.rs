//! Structural default models.
//!
//! Merton (default only at the horizon) and Black-Cox (first passage through
//! an absorbing barrier) under a Gaussian law of log-asset returns, and their
//! q-Gaussian counterparts obtained by averaging over a Gamma law of the
//! precision. All horizons are in trading days.

use serde::{Deserialize, Serialize};

use crate::dist::{gamma_shape, qgaussian_lower_tail, QGaussianParams};
use crate::error::{Error, Result};
use crate::specfun::{c_q, normal_cdf};

/// Issuer position relative to its default point at valuation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmState {
    /// `ln(V₀/D)`.
    pub x0: f64,
    /// `R₀ = D/V₀`.
    pub leverage: f64,
}

impl FirmState {
    pub fn from_values(assets: f64, default_point: f64) -> Result<Self> {
        if !(assets > 0.0 && default_point > 0.0) {
            return Err(Error::domain(
                "FirmState",
                format!("asset value and default point must be positive, got V={assets}, D={default_point}"),
            ));
        }
        Ok(Self::from_leverage(default_point / assets))
    }

    pub fn from_leverage(leverage: f64) -> Self {
        Self {
            x0: -leverage.ln(),
            leverage,
        }
    }

    /// Asset value already below the default point.
    pub fn is_distressed(&self) -> bool {
        self.x0 < 0.0
    }
}

/// Simple and generalized distances to default at one horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceToDefault {
    /// `x0 sqrt(β/t)`.
    pub simple: f64,
    /// `x0 sqrt(β̃/t)`.
    pub generalized: f64,
    pub horizon_days: f64,
    /// `(x0 + m t) sqrt(β/t)` when a drift was supplied.
    pub with_drift: Option<f64>,
}

impl DistanceToDefault {
    pub fn compute(
        x0: f64,
        beta: f64,
        beta_tilde: f64,
        t: f64,
        drift: Option<f64>,
    ) -> Result<Self> {
        Ok(Self {
            simple: merton_dtd(x0, 0.0, beta, t)?,
            generalized: generalized_dtd(x0, beta_tilde, t)?,
            horizon_days: t,
            with_drift: drift.map(|m| merton_dtd(x0, m, beta, t)).transpose()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    Merton,
    BlackCox,
    QMerton,
    QBlackCox,
}

impl Model {
    /// Upper bound of the cumulative PD for zero drift and a solvent start.
    pub fn pd_cap(self) -> f64 {
        match self {
            Model::Merton | Model::QMerton => 0.5,
            Model::BlackCox | Model::QBlackCox => 1.0,
        }
    }
}

/// Default probability with the barrier-crossed flag raised when the issuer
/// starts at or below its default point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefaultProb {
    pub value: f64,
    pub barrier_crossed: bool,
}

impl DefaultProb {
    fn ok(value: f64) -> Self {
        Self {
            value,
            barrier_crossed: false,
        }
    }

    fn crossed() -> Self {
        Self {
            value: 1.0,
            barrier_crossed: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Valid,
    /// Inside the accepted range but short of where the expansion is tight.
    Marginal,
    Violated,
}

/// Asymptotic PD together with the validity regime of the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptote {
    pub value: f64,
    /// `(q-1) dd̃²` at the evaluation point.
    pub control: f64,
    pub regime: Regime,
}

/// Cumulative PD term structure for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdCurve {
    pub model: Model,
    pub horizons: Vec<f64>,
    pub pd: Vec<f64>,
}

fn check_positive(func: &'static str, what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("{what} must be positive, got {v}")))
    }
}

/// Merton distance to default `(x0 + m t) sqrt(β/t)`.
pub fn merton_dtd(x0: f64, m: f64, beta: f64, t: f64) -> Result<f64> {
    check_positive("merton_dtd", "precision", beta)?;
    check_positive("merton_dtd", "horizon", t)?;
    Ok((x0 + m * t) * (beta / t).sqrt())
}

/// Generalized distance to default `x0 sqrt(β̃/t)`.
pub fn generalized_dtd(x0: f64, beta_tilde: f64, t: f64) -> Result<f64> {
    check_positive("generalized_dtd", "scale", beta_tilde)?;
    check_positive("generalized_dtd", "horizon", t)?;
    Ok(x0 * (beta_tilde / t).sqrt())
}

/// Merton PD `Φ(-dd_β(T))`.
pub fn merton_pd(x0: f64, m: f64, beta: f64, t: f64) -> Result<f64> {
    normal_cdf(-merton_dtd(x0, m, beta, t)?)
}

/// Black-Cox first-passage PD with drift `m`.
pub fn blackcox_pd(x0: f64, m: f64, beta: f64, t: f64) -> Result<DefaultProb> {
    check_positive("blackcox_pd", "precision", beta)?;
    check_positive("blackcox_pd", "horizon", t)?;
    if x0 <= 0.0 {
        return Ok(if x0 < 0.0 {
            DefaultProb::crossed()
        } else {
            DefaultProb::ok(1.0)
        });
    }
    let s = (beta / t).sqrt();
    let direct = normal_cdf(-(x0 + m * t) * s)?;
    let image_cdf = normal_cdf(-(x0 - m * t) * s)?;
    let image = if m == 0.0 || image_cdf == 0.0 {
        image_cdf
    } else {
        (-2.0 * m * x0 * beta + image_cdf.ln()).exp()
    };
    Ok(DefaultProb::ok((direct + image).min(1.0)))
}

fn q_checks(func: &'static str, t: f64) -> Result<()> {
    check_positive(func, "horizon", t)
}

/// q-Merton PD: probability that the q-Gaussian endpoint lies below the
/// default point, `½ I_z((3-q)/(2q-2), ½)` for a solvent start.
pub fn qmerton_pd(p: QGaussianParams, x0: f64, t: f64) -> Result<f64> {
    q_checks("qmerton_pd", t)?;
    if p.is_gaussian() {
        return merton_pd(x0, 0.0, p.beta_tilde(), t);
    }
    if x0 == 0.0 {
        return Ok(0.5);
    }
    let tail = qgaussian_lower_tail(p.q(), p.beta_tilde(), x0, t)?;
    Ok(if x0 > 0.0 { tail } else { 1.0 - tail })
}

/// q-Black-Cox PD `I_z((3-q)/(2q-2), ½)`, `z = 1/(1 + (q-1) dd̃²/2)`.
pub fn qblackcox_pd(p: QGaussianParams, x0: f64, t: f64) -> Result<DefaultProb> {
    q_checks("qblackcox_pd", t)?;
    if p.is_gaussian() {
        return blackcox_pd(x0, 0.0, p.beta_tilde(), t);
    }
    if x0 < 0.0 {
        return Ok(DefaultProb::crossed());
    }
    if x0 == 0.0 {
        return Ok(DefaultProb::ok(1.0));
    }
    let tail = qgaussian_lower_tail(p.q(), p.beta_tilde(), x0, t)?;
    Ok(DefaultProb::ok((2.0 * tail).min(1.0)))
}

fn require_fat_tail(func: &'static str, p: QGaussianParams) -> Result<()> {
    if p.is_gaussian() {
        Err(Error::GaussianDegenerate { what: func })
    } else {
        Ok(())
    }
}

/// Large-DTD power-law asymptote of the q-Black-Cox PD,
/// `2 (q-1)^((q-2)/(q-1)) / ((3-q) C_q) (√2/dd̃)^n` with `n = (3-q)/(q-1)`.
pub fn qblackcox_asymptotic_far(p: QGaussianParams, x0: f64, t: f64) -> Result<Asymptote> {
    require_fat_tail("large-DTD asymptote", p)?;
    let q = p.q();
    let dd = generalized_dtd(x0, p.beta_tilde(), t)?;
    let control = (q - 1.0) * dd * dd;
    let n = (3.0 - q) / (q - 1.0);
    let prefactor = 2.0 * (q - 1.0).powf((q - 2.0) / (q - 1.0)) / ((3.0 - q) * c_q(q)?);
    let value = prefactor * (std::f64::consts::SQRT_2 / dd).powf(n);
    let regime = if control >= 100.0 {
        Regime::Valid
    } else if control >= 10.0 {
        Regime::Marginal
    } else {
        Regime::Violated
    };
    Ok(Asymptote {
        value,
        control,
        regime,
    })
}

/// Small-DTD asymptote `1 - √2 dd̃ / C_q`.
pub fn qblackcox_asymptotic_near(p: QGaussianParams, x0: f64, t: f64) -> Result<Asymptote> {
    require_fat_tail("small-DTD asymptote", p)?;
    let q = p.q();
    let dd = generalized_dtd(x0, p.beta_tilde(), t)?;
    let control = (q - 1.0) * dd * dd;
    Ok(Asymptote {
        value: 1.0 - std::f64::consts::SQRT_2 * dd / c_q(q)?,
        control,
        regime: if control <= 0.1 {
            Regime::Valid
        } else {
            Regime::Violated
        },
    })
}

/// Transition density of drifted diffusion killed at the origin (image method).
pub fn absorbing_green(beta: f64, m: f64, x: f64, x0: f64, t: f64) -> Result<f64> {
    check_positive("absorbing_green", "precision", beta)?;
    check_positive("absorbing_green", "horizon", t)?;
    check_positive("absorbing_green", "start", x0)?;
    if !(x >= 0.0) {
        return Err(Error::domain(
            "absorbing_green",
            format!("x must be nonnegative, got {x}"),
        ));
    }
    let norm = (beta / (2.0 * std::f64::consts::PI * t)).sqrt();
    let drift = beta * m * (x - x0) - beta * m * m * t / 2.0;
    let dm = x - x0;
    let dp = x + x0;
    let direct = (drift - beta * dm * dm / (2.0 * t)).exp();
    let image = (drift - beta * dp * dp / (2.0 * t)).exp();
    Ok(norm * (direct - image).max(0.0))
}

/// Term structure of cumulative PD. `law` carries the precision for the
/// Gaussian models (its `q` must then be 1) and `(q, β̃)` for the q-models.
pub fn pd_curve(model: Model, law: QGaussianParams, x0: f64, horizons: &[f64]) -> Result<PdCurve> {
    if horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("horizons must be strictly ascending".into()));
    }
    if matches!(model, Model::Merton | Model::BlackCox) && !law.is_gaussian() {
        return Err(Error::Invalid(format!(
            "{model:?} takes a Gaussian law, got q = {}",
            law.q()
        )));
    }
    let beta = law.beta_tilde();
    let pd = horizons
        .iter()
        .map(|&t| match model {
            Model::Merton => merton_pd(x0, 0.0, beta, t),
            Model::BlackCox => blackcox_pd(x0, 0.0, beta, t).map(|p| p.value),
            Model::QMerton => qmerton_pd(law, x0, t),
            Model::QBlackCox => qblackcox_pd(law, x0, t).map(|p| p.value),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PdCurve {
        model,
        horizons: horizons.to_vec(),
        pd,
    })
}

/// Shape parameter `a` entering the q-model Beta function, exposed for
/// diagnostics.
pub fn mixing_shape(p: QGaussianParams) -> Result<f64> {
    require_fat_tail("mixing shape", p)?;
    Ok(gamma_shape(p.q()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn qp(q: f64, b: f64) -> QGaussianParams {
        QGaussianParams::new(q, b).unwrap()
    }

    // I_{1/2}(3/2, 1/2) by the trig substitution t = sin^2(theta).
    const I_HALF: f64 = (PI / 4.0 - 0.5) / (PI / 2.0);

    #[test]
    fn dtd_examples() {
        assert_eq!(merton_dtd(1.0, 0.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(merton_dtd(1.0, 0.0, 4.0, 1.0).unwrap(), 2.0);
        assert_eq!(merton_dtd(0.0, 0.0, 3.3, 7.0).unwrap(), 0.0);
        assert!(merton_dtd(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(merton_dtd(1.0, 0.0, -1.0, 1.0).is_err());
        assert_eq!(generalized_dtd(2.0, 1.0, 1.0).unwrap(), 2.0);
        assert!((generalized_dtd(1.0, 2.5, 250.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(generalized_dtd(1.0, 2.5, -1.0).is_err());
    }

    #[test]
    fn dtd_ratio_matches_scale_ratio() {
        // sigma = sigma~ at q = 1.4 means beta = 1/sigma~^2 = (5-3q) beta~ / 2
        let bt = 3.0;
        let beta = (5.0 - 3.0 * 1.4) * bt / 2.0;
        let d = DistanceToDefault::compute(0.8, beta, bt, 250.0, None).unwrap();
        assert!((d.generalized / d.simple - 2.5f64.sqrt()).abs() < 1e-12);
        assert!(d.with_drift.is_none());
    }

    #[test]
    fn merton_and_blackcox_examples() {
        assert_eq!(merton_pd(0.0, 0.0, 1.0, 1.0).unwrap(), 0.5);
        assert!((merton_pd(2.0, 0.0, 1.0, 1.0).unwrap() - 0.022_750_131_948_179_2).abs() < 1e-14);
        assert!(merton_pd(8.0, 0.0, 1.0, 1.0).unwrap() < 1e-14);
        let bc = blackcox_pd(2.0, 0.0, 1.0, 1.0).unwrap();
        assert!((bc.value - 0.045_500_263_896_358_4).abs() < 1e-14);
        assert!(!bc.barrier_crossed);
        assert_eq!(blackcox_pd(0.0, 0.0, 1.0, 1.0).unwrap().value, 1.0);
        let crossed = blackcox_pd(-0.1, 0.0, 1.0, 1.0).unwrap();
        assert!(crossed.barrier_crossed && crossed.value == 1.0);
        let far = blackcox_pd(1.0, 0.01, 1.0, 1e6).unwrap();
        assert!(far.value < 1.0);
        assert!((far.value - (-0.02f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn blackcox_is_twice_merton_without_drift() {
        for x0 in [0.1, 0.5, 1.0, 2.5] {
            for t in [1.0, 20.0, 250.0] {
                let m = merton_pd(x0, 0.0, 40.0, t).unwrap();
                let b = blackcox_pd(x0, 0.0, 40.0, t).unwrap().value;
                assert_eq!(b, 2.0 * m);
            }
        }
    }

    #[test]
    fn q_model_examples() {
        let p = qp(1.5, 1.0);
        assert!((qblackcox_pd(p, 2.0, 1.0).unwrap().value - I_HALF).abs() < 1e-12);
        assert!((qmerton_pd(p, 2.0, 1.0).unwrap() - 0.5 * I_HALF).abs() < 1e-12);
        assert_eq!(qmerton_pd(p, 0.0, 1.0).unwrap(), 0.5);
        assert_eq!(qblackcox_pd(p, 0.0, 1.0).unwrap().value, 1.0);
        // q = 2, dd = sqrt 2 -> z = 1/2, arcsine law
        let p2 = qp(2.0, 1.0);
        let x0 = 2f64.sqrt();
        assert!((qblackcox_pd(p2, x0, 1.0).unwrap().value - 0.5).abs() < 1e-12);
        let crossed = qblackcox_pd(p, -0.2, 1.0).unwrap();
        assert!(crossed.barrier_crossed);
    }

    #[test]
    fn q_models_dispatch_at_q_one() {
        let g = qp(1.0, 3.0);
        assert_eq!(
            qblackcox_pd(g, 0.5, 2.0).unwrap(),
            blackcox_pd(0.5, 0.0, 3.0, 2.0).unwrap()
        );
        assert_eq!(qmerton_pd(g, 0.5, 2.0).unwrap(), merton_pd(0.5, 0.0, 3.0, 2.0).unwrap());
        let near = qp(1.0 + 1e-6, 1.0);
        let want = normal_cdf(-3.0).unwrap();
        assert!((qmerton_pd(near, 3.0, 1.0).unwrap() - want).abs() < 1e-5);
    }

    #[test]
    fn qblackcox_is_twice_qmerton() {
        for &q in &[1.05, 1.3, 1.7, 2.2, 2.9] {
            for &x0 in &[0.01, 0.3, 1.0, 4.0] {
                let p = qp(q, 7.0);
                let a = qblackcox_pd(p, x0, 11.0).unwrap().value;
                let b = qmerton_pd(p, x0, 11.0).unwrap();
                assert_eq!(a, 2.0 * b);
            }
        }
    }

    #[test]
    fn far_asymptote_examples() {
        let p = qp(1.5, 1.0);
        let a = qblackcox_asymptotic_far(p, 20.0, 1.0).unwrap();
        assert!((a.control - 200.0).abs() < 1e-9);
        assert_eq!(a.regime, Regime::Valid);
        assert!((a.value - 4.2441e-4).abs() < 1e-7, "{}", a.value);
        let b = qblackcox_asymptotic_far(p, 40.0, 1.0).unwrap();
        assert!((a.value / b.value - 8.0).abs() < 1e-9);
        assert_eq!(qblackcox_asymptotic_far(p, 6.0, 1.0).unwrap().regime, Regime::Marginal);
        assert_eq!(qblackcox_asymptotic_far(p, 1.0, 1.0).unwrap().regime, Regime::Violated);
        assert!(qblackcox_asymptotic_far(qp(1.0, 1.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn near_asymptote_examples() {
        let p = qp(1.5, 1.0);
        assert_eq!(qblackcox_asymptotic_near(p, 0.0, 1.0).unwrap().value, 1.0);
        let a = qblackcox_asymptotic_near(p, 0.1, 1.0).unwrap();
        assert!((a.value - 0.936_338).abs() < 1e-6);
        assert_eq!(a.regime, Regime::Valid);
        let exact = qblackcox_pd(p, 0.1, 1.0).unwrap().value;
        assert!((a.value - exact).abs() / exact < 0.01);
        let slope = qblackcox_asymptotic_near(p, 0.2, 1.0).unwrap().value - a.value;
        assert!((slope / 0.1 + 2f64.sqrt() / c_q(1.5).unwrap()).abs() < 1e-12);
        assert_eq!(qblackcox_asymptotic_near(p, 1.0, 1.0).unwrap().regime, Regime::Violated);
    }

    #[test]
    fn absorbing_green_basics() {
        assert_eq!(absorbing_green(1.0, 0.3, 0.0, 2.0, 1.0).unwrap(), 0.0);
        let g = absorbing_green(2.0, 0.0, 1.1, 0.7, 1.5).unwrap();
        let n = |d: f64| (2.0 / (2.0 * PI * 1.5)).sqrt() * (-2.0 * d * d / 3.0).exp();
        assert!((g - (n(0.4) - n(1.8))).abs() < 1e-15);
        assert!(absorbing_green(1.0, 0.0, -0.1, 2.0, 1.0).is_err());
    }

    #[test]
    fn pd_curve_caps_and_monotonicity() {
        let h: Vec<f64> = (1..=20).map(|k| k as f64 * 25.0).collect();
        let law = qp(1.6, 2000.0);
        for model in [Model::QMerton, Model::QBlackCox] {
            let c = pd_curve(model, law, 0.4, &h).unwrap();
            assert!(c.pd.windows(2).all(|w| w[1] >= w[0]));
            assert!(c.pd.iter().all(|&p| (0.0..=model.pd_cap()).contains(&p)));
        }
        let g = qp(1.0, 2000.0);
        for model in [Model::Merton, Model::BlackCox] {
            let c = pd_curve(model, g, 0.4, &h).unwrap();
            assert!(c.pd.windows(2).all(|w| w[1] >= w[0]));
            assert!(c.pd.iter().all(|&p| (0.0..=model.pd_cap()).contains(&p)));
        }
        assert!(pd_curve(Model::Merton, law, 0.4, &h).is_err());
        assert!(pd_curve(Model::QMerton, law, 0.4, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn firm_state_from_values() {
        let s = FirmState::from_values(150.0, 100.0).unwrap();
        assert!((s.x0 - 1.5f64.ln()).abs() < 1e-15);
        assert!(!s.is_distressed());
        assert!(FirmState::from_values(90.0, 100.0).unwrap().is_distressed());
        assert!(FirmState::from_values(0.0, 100.0).is_err());
    }
}
