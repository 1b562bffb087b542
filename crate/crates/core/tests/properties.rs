mod common;

use proptest::prelude::*;
use qcredit::dist::{gamma_to_q, q_to_gamma, sample_qgaussian, student_equiv, student_to_q};
use qcredit::eval::roc_curve;
use qcredit::inference::{acf, fit_gaussian_mle, fit_qgaussian_mle, AcfTransform};
use qcredit::models::{blackcox_pd, pd_curve, qblackcox_pd, qmerton_pd, DistanceToDefault, Model};
use qcredit::specfun::{c_q, erf, reg_inc_beta, BetaArgs};
use qcredit::{GammaParams, QGaussianParams};

const GRID: [f64; 6] = [0.25, 0.5, 1.0, 1.5, 3.0, 10.0];

fn qp(q: f64, bt: f64) -> QGaussianParams {
    QGaussianParams::new(q, bt).unwrap()
}

/// Black-Cox PD at a given generalized DTD with unit scale and horizon.
fn qbc(q: f64, dd: f64) -> f64 {
    qblackcox_pd(qp(q, 1.0), dd, 1.0).unwrap().value
}

proptest! {
    #[test]
    fn erf_is_odd(x in -30.0f64..30.0) {
        prop_assert_eq!(erf(-x).unwrap(), -erf(x).unwrap());
    }

    #[test]
    fn inc_beta_reflection(i in 0usize..6, j in 0usize..6, k in 1u32..100) {
        let (m, n, z) = (GRID[i], GRID[j], k as f64 / 100.0);
        let a = reg_inc_beta(BetaArgs::new(m, n, z).unwrap()).unwrap();
        let b = reg_inc_beta(BetaArgs::new(n, m, 1.0 - z).unwrap()).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inc_beta_nondecreasing(i in 0usize..6, j in 0usize..6, k in 1u32..99) {
        let (m, n, z) = (GRID[i], GRID[j], k as f64 / 100.0);
        let a = reg_inc_beta(BetaArgs::new(m, n, z).unwrap()).unwrap();
        let b = reg_inc_beta(BetaArgs::new(m, n, z + 0.01).unwrap()).unwrap();
        prop_assert!(b >= a);
    }

    #[test]
    fn c_q_finite_and_continuous(q in 1.000001f64..2.999999) {
        let c = c_q(q).unwrap();
        prop_assert!(c.is_finite() && c > 0.0);
        let h = 1e-7 * (q - 1.0).min(3.0 - q);
        let c2 = c_q(q + h).unwrap();
        prop_assert!((c2 / c - 1.0).abs() < 1e-3);
    }

    #[test]
    fn parameter_round_trips(q in 1.001f64..2.99, ln_bt in -8.0f64..10.0) {
        let p = qp(q, ln_bt.exp());
        let g = q_to_gamma(p).unwrap();
        let back = gamma_to_q(g);
        prop_assert!((back.q() - q).abs() < 1e-12);
        prop_assert!((back.beta_tilde() / p.beta_tilde() - 1.0).abs() < 1e-12);
        let s = student_to_q(student_equiv(p).unwrap()).unwrap();
        prop_assert!((s.q() - q).abs() < 1e-12);
        prop_assert!((s.beta_tilde() / p.beta_tilde() - 1.0).abs() < 1e-12);
        let g2 = q_to_gamma(gamma_to_q(GammaParams::new(g.shape(), g.rate()).unwrap())).unwrap();
        prop_assert!((g2.shape() / g.shape() - 1.0).abs() < 1e-12);
        prop_assert!((g2.rate() / g.rate() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn black_cox_doubles_merton(q in 1.001f64..2.99, ln_bt in -3.0f64..8.0, x0 in 0.001f64..3.0, t in 1.0f64..500.0) {
        let p = qp(q, ln_bt.exp());
        let bc = qblackcox_pd(p, x0, t).unwrap().value;
        let m = qmerton_pd(p, x0, t).unwrap();
        prop_assert!((bc - 2.0 * m).abs() <= 1e-15 * bc.max(1e-300) * 4.0);
    }

    #[test]
    fn gaussian_limit(dd in 0.1f64..6.0) {
        let a = qbc(1.0 + 1e-6, dd);
        let b = blackcox_pd(dd, 0.0, 1.0, 1.0).unwrap().value;
        prop_assert!((a - b).abs() < 1e-5);
    }

    #[test]
    fn decreasing_in_distance(i in 0usize..4, dd in 0.01f64..9.99) {
        let q = [1.1, 1.4, 5.0 / 3.0, 1.9][i];
        prop_assert!(qbc(q, dd + 0.01) < qbc(q, dd));
    }

    #[test]
    fn fatter_tails_raise_far_pd(q in 1.1f64..1.89, dd in 3.0f64..12.0) {
        prop_assert!(qbc(q + 0.01, dd) > qbc(q, dd));
    }

    #[test]
    fn finite_in_divergent_variance_band(q in (5.0f64 / 3.0)..1.9999, dd in 0.01f64..50.0) {
        let p = qbc(q, dd);
        prop_assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn dtd_ratio(x0 in 0.01f64..3.0, ln_b in -3.0f64..10.0, ln_bt in -3.0f64..10.0, t in 1.0f64..500.0) {
        let (b, bt) = (ln_b.exp(), ln_bt.exp());
        let d = DistanceToDefault::compute(x0, b, bt, t, None).unwrap();
        prop_assert!((d.generalized / d.simple - (bt / b).sqrt()).abs() < 1e-12 * (bt / b).sqrt());
    }

    #[test]
    fn pd_curve_bounded_and_monotone(q in 1.01f64..2.9, x0 in 0.05f64..2.0, model in 0usize..4) {
        let model = [Model::Merton, Model::BlackCox, Model::QMerton, Model::QBlackCox][model];
        let law = match model {
            Model::Merton | Model::BlackCox => QGaussianParams::gaussian(2e3).unwrap(),
            _ => qp(q, 2e3),
        };
        let hs: Vec<f64> = (1..=20).map(|k| 25.0 * k as f64).collect();
        let c = pd_curve(model, law, x0, &hs).unwrap();
        for w in c.pd.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        for &p in &c.pd {
            prop_assert!((0.0..=model.pd_cap()).contains(&p));
        }
    }

    #[test]
    fn roc_auc_is_rank_auc(scores in prop::collection::vec((0u8..20, any::<bool>()), 2..200)) {
        let s: Vec<f64> = scores.iter().map(|x| x.0 as f64 / 4.0).collect();
        let l: Vec<bool> = scores.iter().map(|x| x.1).collect();
        prop_assume!(l.iter().any(|&b| b) && l.iter().any(|&b| !b));
        let r = roc_curve(&s, &l).unwrap();
        prop_assert!((r.auc - common::rank_auc(&s, &l)).abs() < 1e-12);
    }

    #[test]
    fn acf_lag_zero_is_one(v in prop::collection::vec(-1.0f64..1.0, 20..200), tr in 0usize..3) {
        let tr = [AcfTransform::AbsReturn, AcfTransform::SquaredReturn, AcfTransform::RawReturn][tr];
        if let Ok(r) = acf(&v, tr, 5) {
            prop_assert!((r.values[0] - 1.0).abs() < 1e-12);
            prop_assert!(r.values.iter().all(|x| x.abs() <= 1.0 + 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn q_fit_dominates_gaussian_fit(q in 1.0f64..2.2, seed in 0u64..1_000_000) {
        let p = if q < 1.02 { QGaussianParams::gaussian(1e4).unwrap() } else { qp(q, 1e4) };
        let v = sample_qgaussian(p, 250, 1.0, seed).unwrap();
        let fq = fit_qgaussian_mle(&v, None).unwrap();
        let fg = fit_gaussian_mle(&v).unwrap();
        prop_assert!(fq.log_likelihood >= fg.log_likelihood - 1e-6);
    }
}
