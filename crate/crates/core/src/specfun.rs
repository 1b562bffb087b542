//! Special-function kernel.
//!
//! Error function, normal CDF, log-Gamma, Beta, the regularized incomplete
//! Beta function and the q-Gaussian normalization factor `C_q`, plus the two
//! helpers the estimators need (digamma, regularized upper incomplete Gamma).
//! Everything here is a pure function of its arguments and written without
//! external numerical dependencies.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Arguments of the regularized incomplete Beta function `I_z(m, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaArgs {
    m: f64,
    n: f64,
    z: f64,
}

impl BetaArgs {
    pub fn new(m: f64, n: f64, z: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) || !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain(
                "reg_inc_beta",
                format!("shapes must be positive, got m={m}, n={n}"),
            ));
        }
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::domain(
                "reg_inc_beta",
                format!("z must lie in [0,1], got {z}"),
            ));
        }
        Ok(Self { m, n, z })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

fn check_finite(func: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("non-finite argument {x}")))
    }
}

/// Series `erf(x) = 2/sqrt(pi) exp(-x^2) sum (2x^2)^k x / (1*3*...*(2k+1))`.
/// All terms share a sign, so there is no cancellation for moderate |x|.
fn erf_series(x: f64) -> f64 {
    let x2 = 2.0 * x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= x2 / (2.0 * k + 1.0);
        sum += term;
        if term.abs() <= EPS * sum.abs() {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x * x).exp() * sum
}

/// Continued fraction for `erfc(x)`, x >= 2.5.
fn erfc_cf(x: f64) -> f64 {
    // f = x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..5000 {
        let a = j as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x * x).exp() / (f * PI.sqrt())
}

const SERIES_CUTOFF: f64 = 2.5;

/// Error function.
pub fn erf(x: f64) -> Result<f64> {
    check_finite("erf", x)?;
    Ok(erf_unchecked(x))
}

fn erf_unchecked(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_CUTOFF {
        erf_series(ax)
    } else {
        1.0 - erfc_cf(ax)
    };
    v.copysign(x)
}

/// Complementary error function, accurate in relative terms on the right tail.
pub fn erfc(x: f64) -> Result<f64> {
    check_finite("erfc", x)?;
    Ok(erfc_unchecked(x))
}

fn erfc_unchecked(x: f64) -> f64 {
    if x >= SERIES_CUTOFF {
        erfc_cf(x)
    } else if x > -SERIES_CUTOFF {
        1.0 - erf_unchecked(x)
    } else {
        2.0 - erfc_cf(-x)
    }
}

/// Standard normal CDF `Phi(z) = erfc(-z/sqrt 2) / 2`.
pub fn normal_cdf(z: f64) -> Result<f64> {
    check_finite("normal_cdf", z)?;
    Ok(0.5 * erfc_unchecked(-z * FRAC_1_SQRT_2))
}

/// Stirling correction `ln Gamma(x) - [(x-1/2) ln x - x + ln sqrt(2 pi)]`, x >= 10.
fn stirling_delta(x: f64) -> f64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let r = 1.0 / x;
    let r2 = r * r;
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * r2 + c;
    }
    acc * r
}

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_delta(x);
    }
    if x < 0.5 {
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    let y = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (y + i as f64);
    }
    let t = y + 7.5;
    LN_SQRT_2PI + (y + 0.5) * t.ln() - t + a.ln()
}

/// Natural log of the Gamma function for positive arguments.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(
            "log_gamma",
            format!("argument must be positive and finite, got {x}"),
        ));
    }
    Ok(ln_gamma_unchecked(x))
}

/// `ln Gamma(b) - ln Gamma(a + b)` for b >= 10 without cancellation.
fn ln_gamma_ratio_large(a: f64, b: f64) -> f64 {
    let ab = a + b;
    -(b - 0.5) * (a / b).ln_1p() - a * ab.ln() + a + stirling_delta(b) - stirling_delta(ab)
}

fn ln_beta_unchecked(m: f64, n: f64) -> f64 {
    let (small, big) = if m <= n { (m, n) } else { (n, m) };
    if big >= 10.0 {
        ln_gamma_unchecked(small) + ln_gamma_ratio_large(small, big)
    } else {
        ln_gamma_unchecked(small) + ln_gamma_unchecked(big) - ln_gamma_unchecked(small + big)
    }
}

fn check_shapes(func: &'static str, m: f64, n: f64) -> Result<()> {
    if m > 0.0 && n > 0.0 && m.is_finite() && n.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            func,
            format!("shapes must be positive and finite, got ({m}, {n})"),
        ))
    }
}

/// `ln B(m, n)`.
pub fn ln_beta(m: f64, n: f64) -> Result<f64> {
    check_shapes("ln_beta", m, n)?;
    Ok(ln_beta_unchecked(m, n))
}

/// Beta function `B(m, n) = Gamma(m) Gamma(n) / Gamma(m + n)`.
pub fn beta(m: f64, n: f64) -> Result<f64> {
    check_shapes("beta", m, n)?;
    Ok(ln_beta_unchecked(m, n).exp())
}

/// Lentz evaluation of the incomplete-Beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    let max_iter = 1000 + (100.0 * a.max(b).sqrt()) as usize;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for i in 1..=max_iter {
        let m = i as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        func: "reg_inc_beta",
        iterations: max_iter,
    })
}

/// Regularized incomplete Beta function `I_z(m, n)`.
pub fn reg_inc_beta(args: BetaArgs) -> Result<f64> {
    reg_inc_beta_split(args.m, args.n, args.z, 1.0 - args.z)
}

/// `I_z(m, n)` with `z` and `1 - z` supplied separately.
///
/// Callers that know `1 - z` more precisely than the subtraction would give
/// (the q-model arguments `z = 1/(1+w)` with tiny `w`) should use this form.
pub fn reg_inc_beta_split(m: f64, n: f64, z: f64, zc: f64) -> Result<f64> {
    check_shapes("reg_inc_beta", m, n)?;
    if !(0.0..=1.0).contains(&z) || !(0.0..=1.0).contains(&zc) {
        return Err(Error::domain(
            "reg_inc_beta",
            format!("z must lie in [0,1], got z={z}, 1-z={zc}"),
        ));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if zc == 0.0 {
        return Ok(1.0);
    }
    let ln_z = if z > 0.5 { (-zc).ln_1p() } else { z.ln() };
    let ln_zc = if zc > 0.5 { (-z).ln_1p() } else { zc.ln() };
    let ln_front = m * ln_z + n * ln_zc - ln_beta_unchecked(m, n);
    let front = ln_front.exp();
    if z < m / (m + n) {
        Ok((front * beta_cf(m, n, z)? / m).clamp(0.0, 1.0))
    } else {
        Ok((1.0 - front * beta_cf(n, m, zc)? / n).clamp(0.0, 1.0))
    }
}

/// Normalization factor of the q-Gaussian,
/// `C_q = B(1/2, (3-q)/(2(q-1))) / sqrt(q-1)` for `1 < q < 3`.
pub fn c_q(q: f64) -> Result<f64> {
    if !(q > 1.0 && q < 3.0) {
        return Err(Error::domain("c_q", format!("q must lie in (1,3), got {q}")));
    }
    let qm1 = q - 1.0;
    let a = (3.0 - q) / (2.0 * qm1);
    Ok((ln_beta_unchecked(0.5, a) - 0.5 * qm1.ln()).exp())
}

/// Digamma function for positive arguments.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(
            "digamma",
            format!("argument must be positive and finite, got {x}"),
        ));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r2 = 1.0 / (x * x);
    let series = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0 - r2 * (1.0 / 132.0 - r2 * (691.0 / 32760.0 - r2 / 12.0))))));
    acc + x.ln() - 0.5 / x - series
}

/// Derivative of the Stirling correction.
fn stirling_delta_prime(x: f64) -> f64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let r2 = 1.0 / (x * x);
    let mut acc = 0.0;
    for (k, c) in C.iter().enumerate().rev() {
        acc = acc * r2 - c * (2 * k + 1) as f64;
    }
    acc * r2
}

/// `ψ(a) - ψ(a + 1/2)`, free of cancellation for large `a`.
pub(crate) fn digamma_half_diff(a: f64) -> f64 {
    if a < 10.0 {
        return digamma_unchecked(a) - digamma_unchecked(a + 0.5);
    }
    -(0.5 / a).ln_1p() - 0.25 / (a * (a + 0.5)) + stirling_delta_prime(a)
        - stirling_delta_prime(a + 0.5)
}

/// Regularized upper incomplete Gamma `Q(s, x) = Gamma(s, x) / Gamma(s)`.
pub fn reg_gamma_upper(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) || !(x >= 0.0) {
        return Err(Error::domain(
            "reg_gamma_upper",
            format!("need s > 0, x >= 0, got s={s}, x={x}"),
        ));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let ln_front = s * x.ln() - x - ln_gamma_unchecked(s);
    if x < s + 1.0 {
        let mut ap = s;
        let mut del = 1.0 / s;
        let mut sum = del;
        for _ in 0..10_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                return Ok((1.0 - sum * ln_front.exp()).clamp(0.0, 1.0));
            }
        }
        Err(Error::NoConvergence {
            func: "reg_gamma_upper",
            iterations: 10_000,
        })
    } else {
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                return Ok((ln_front.exp() * h).clamp(0.0, 1.0));
            }
        }
        Err(Error::NoConvergence {
            func: "reg_gamma_upper",
            iterations: 10_000,
        })
    }
}
