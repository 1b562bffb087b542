use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AcfTransform {
    AbsReturn,
    SquaredReturn,
    RawReturn,
}

impl AcfTransform {
    fn apply(self, x: f64) -> f64 {
        match self {
            AcfTransform::AbsReturn => x.abs(),
            AcfTransform::SquaredReturn => x * x,
            AcfTransform::RawReturn => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    pub transform: AcfTransform,
}

/// Sample autocorrelation for lags `0..=h_max`.
///
/// One global mean and the full-sample sum of squares are used for every lag,
/// so longer lags are shrunk toward zero by the missing `h` terms.
pub fn acf(v: &[f64], transform: AcfTransform, h_max: usize) -> Result<AcfResult> {
    let n = v.len();
    if 2 * h_max >= n {
        return Err(Error::InsufficientData(format!(
            "h_max = {h_max} must be below half the series length {n}"
        )));
    }
    let y: Vec<f64> = v.iter().map(|&x| transform.apply(x)).collect();
    let m = y.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = y.iter().map(|x| x - m).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if !(denom > 0.0) || denom <= 1e-300 {
        return Err(Error::DegenerateSample("zero-variance series has no ACF".into()));
    }
    let mut values = Vec::with_capacity(h_max + 1);
    values.push(1.0);
    for h in 1..=h_max {
        let num: f64 = dev[..n - h].iter().zip(&dev[h..]).map(|(a, b)| a * b).sum();
        values.push(num / denom);
    }
    Ok(AcfResult {
        lags: (0..=h_max).collect(),
        values,
        transform,
    })
}
