use serde::{Deserialize, Serialize};

use crate::dist::{qgaussian_cdf, qgaussian_pdf, QGaussianParams};
use crate::error::{Error, Result};

/// Fitted one-day law of log-asset returns: a q-Gaussian (Gaussian when
/// `q = 1`) centred at `location`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnLaw {
    pub params: QGaussianParams,
    pub location: f64,
    /// Number of parameters estimated from the data.
    pub n_params: usize,
}

impl ReturnLaw {
    pub fn new(params: QGaussianParams, location: f64, n_params: usize) -> Self {
        Self {
            params,
            location,
            n_params,
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        qgaussian_pdf(self.params, x, self.location, 1.0)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        qgaussian_cdf(self.params, x, self.location, 1.0)
    }

    /// Natural length scale `1/sqrt(β̃)`.
    pub fn scale(&self) -> f64 {
        self.params.beta_tilde().recip().sqrt()
    }

    /// Quantile by bisection on the CDF, to `1e-10` of the law's scale.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(
                "quantile",
                format!("probability must lie in (0,1), got {p}"),
            ));
        }
        let s = self.scale();
        let mut lo = self.location - s;
        let mut hi = self.location + s;
        let mut guard = 0;
        while self.cdf(lo)? > p {
            lo = self.location - 2.0 * (self.location - lo);
            guard += 1;
            if guard > 2000 {
                return Err(Error::NoConvergence {
                    func: "quantile",
                    iterations: guard,
                });
            }
        }
        while self.cdf(hi)? < p {
            hi = self.location + 2.0 * (hi - self.location);
            guard += 1;
            if guard > 2000 {
                return Err(Error::NoConvergence {
                    func: "quantile",
                    iterations: guard,
                });
            }
        }
        let tol = 1e-10 * s;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid)? < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_inverts_cdf() {
        for q in [1.0, 1.3, 1.8, 2.5] {
            let law = ReturnLaw::new(QGaussianParams::new(q, 4e3).unwrap(), 1e-3, 3);
            for p in [1e-4, 0.005, 0.25, 0.5, 0.9, 0.9999] {
                let x = law.quantile(p).unwrap();
                assert!((law.cdf(x).unwrap() - p).abs() < 1e-8, "q={q} p={p}");
            }
            assert!((law.quantile(0.5).unwrap() - 1e-3).abs() < 1e-10 * law.scale());
        }
        let law = ReturnLaw::new(QGaussianParams::new(1.5, 1.0).unwrap(), 0.0, 2);
        assert!(law.quantile(0.0).is_err());
        assert!(law.quantile(1.0).is_err());
    }
}
