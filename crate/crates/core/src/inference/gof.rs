use serde::{Deserialize, Serialize};

use super::law::ReturnLaw;
use crate::error::{Error, Result};
use crate::specfun::reg_gamma_upper;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom (chi-square only).
    pub df: Option<usize>,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // small-λ form converges much faster here
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let mut s = 0.0;
        let mut k = 1.0f64;
        loop {
            let term = y.powf(k * k);
            s += term;
            if term < 1e-17 * s || k > 50.0 {
                break;
            }
            k += 2.0;
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda * s;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against `law`.
pub fn ks_test(v: &[f64], law: &ReturnLaw) -> Result<GofResult> {
    let n = v.len();
    if n < 30 {
        return Err(Error::InsufficientData(format!("KS test needs n >= 30, got {n}")));
    }
    let mut xs = v.to_vec();
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = law.cdf(x)?;
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    let d = d.clamp(0.0, 1.0);
    let sn = nf.sqrt();
    let p = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
    Ok(GofResult {
        statistic: d,
        p_value: p,
        df: None,
    })
}

/// Pearson chi-square test on `bins` equal-probability bins of `law`.
pub fn chi2_test(v: &[f64], law: &ReturnLaw, bins: usize) -> Result<GofResult> {
    let n = v.len();
    let expected = n as f64 / bins as f64;
    if bins < 2 || expected < 5.0 {
        return Err(Error::InsufficientData(format!(
            "{n} observations in {bins} bins leaves fewer than 5 expected per bin"
        )));
    }
    if bins <= 1 + law.n_params {
        return Err(Error::InsufficientData(format!(
            "{bins} bins leave no degrees of freedom after {} fitted parameters",
            law.n_params
        )));
    }
    let edges = (1..bins)
        .map(|k| law.quantile(k as f64 / bins as f64))
        .collect::<Result<Vec<_>>>()?;
    let mut counts = vec![0usize; bins];
    for &x in v {
        counts[edges.partition_point(|&e| e < x)] += 1;
    }
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let df = bins - 1 - law.n_params;
    let p = reg_gamma_upper(0.5 * df as f64, 0.5 * stat)?;
    Ok(GofResult {
        statistic: stat,
        p_value: p,
        df: Some(df),
    })
}

/// `(theoretical, empirical)` quantile pairs at plotting positions `i/(n+1)`.
pub fn qq_pairs(v: &[f64], law: &ReturnLaw) -> Result<Vec<(f64, f64)>> {
    let n = v.len();
    if n < 10 {
        return Err(Error::InsufficientData(format!("Q-Q needs n >= 10, got {n}")));
    }
    let mut xs = v.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.iter()
        .enumerate()
        .map(|(i, &x)| Ok((law.quantile((i + 1) as f64 / (n + 1) as f64)?, x)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::QGaussianParams;

    #[test]
    fn kolmogorov_branches_agree() {
        // both series are valid everywhere; compare them at the switch point
        let lam: f64 = 1.18;
        let mut s = 0.0;
        for j in 1..=100 {
            let jf = j as f64;
            let t = (-2.0 * jf * jf * lam * lam).exp();
            s += if j % 2 == 1 { t } else { -t };
        }
        assert!((kolmogorov_survival(lam - 1e-12) - 2.0 * s).abs() < 1e-12);
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn exact_quantiles_give_uniform_bins_and_diagonal_qq() {
        let law = ReturnLaw::new(QGaussianParams::new(1.5, 2.0).unwrap(), 0.1, 3);
        let n = 400;
        let v: Vec<f64> = (0..n)
            .map(|i| law.quantile((i as f64 + 0.5) / n as f64).unwrap())
            .collect();
        let c = chi2_test(&v, &law, 10).unwrap();
        assert!(c.statistic.abs() < 1e-12);
        assert_eq!(c.df, Some(6));
        let ks = ks_test(&v, &law).unwrap();
        assert!(ks.statistic <= 0.5 / n as f64 + 1e-9);
        let w: Vec<f64> = (1..=50).map(|i| law.quantile(i as f64 / 51.0).unwrap()).collect();
        let qq = qq_pairs(&w, &law).unwrap();
        assert_eq!(qq.len(), 50);
        assert!(qq.iter().all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn preconditions() {
        let law = ReturnLaw::new(QGaussianParams::gaussian(1.0).unwrap(), 0.0, 2);
        assert!(ks_test(&[0.0; 29], &law).is_err());
        assert!(chi2_test(&[0.0; 49], &law, 10).is_err());
        assert!(qq_pairs(&[0.0; 9], &law).is_err());
    }
}
