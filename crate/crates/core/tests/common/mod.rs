//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval:
/// bisect the worst subinterval until the summed error estimate is below
/// `tol` or the interval budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    for _ in 0..5000 {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        if total_err <= tol {
            break;
        }
        let (k, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // sum small pieces first
    let mut vals: Vec<f64> = parts.iter().map(|p| p.2).collect();
    vals.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    vals.iter().sum()
}

/// `∫_l^∞ f` for `f ~ |x|^-p` (p > 1), via `x = l w^{-1/(p-1)}`, which makes
/// the transformed integrand bounded at `w = 0`.
pub fn integrate_tail<F: Fn(f64) -> f64>(f: F, l: f64, p: f64, tol: f64) -> f64 {
    assert!(l > 0.0 && p > 1.0);
    let alpha = 1.0 / (p - 1.0);
    integrate(
        |w| {
            if w <= 0.0 {
                return 0.0;
            }
            let x = l * w.powf(-alpha);
            f(x) * alpha * x / w
        },
        0.0,
        1.0,
        tol,
    )
}

/// `I_z(m, n)` by quadrature of the Beta integrand. The substitution
/// `t = s^{1/m}` removes the endpoint singularity at 0.
pub fn inc_beta_quad(m: f64, n: f64, z: f64) -> f64 {
    let num = |zz: f64| {
        let top = zz.powf(m);
        integrate(
            |s| {
                let t = s.powf(1.0 / m);
                (1.0 - t).powf(n - 1.0) / m
            },
            0.0,
            top,
            1e-14,
        )
    };
    // the complement handles the (1-t)^{n-1} end the same way
    let full = beta_quad(m, n);
    if z <= 0.5 {
        num(z) / full
    } else {
        let tail = {
            let top = (1.0 - z).powf(n);
            integrate(
                |s| {
                    let u = s.powf(1.0 / n);
                    (1.0 - u).powf(m - 1.0) / n
                },
                0.0,
                top,
                1e-14,
            )
        };
        1.0 - tail / full
    }
}

/// `B(m, n)` by quadrature, split at 1/2 with both endpoint substitutions.
pub fn beta_quad(m: f64, n: f64) -> f64 {
    let left = integrate(
        |s| (1.0 - s.powf(1.0 / m)).powf(n - 1.0) / m,
        0.0,
        0.5f64.powf(m),
        1e-14,
    );
    let right = integrate(
        |s| (1.0 - s.powf(1.0 / n)).powf(m - 1.0) / n,
        0.0,
        0.5f64.powf(n),
        1e-14,
    );
    left + right
}

pub fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Probability that a random positive outscores a random negative, ties
/// counted half, by direct pair counting.
pub fn rank_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Autocorrelation by explicit double loops over the transformed series.
pub fn naive_acf(y: &[f64], h: usize) -> f64 {
    let n = y.len();
    let mut m = 0.0;
    for v in y {
        m += v;
    }
    m /= n as f64;
    let mut num = 0.0;
    for i in 0..n - h {
        num += (y[i] - m) * (y[i + h] - m);
    }
    let mut den = 0.0;
    for v in y {
        den += (v - m) * (v - m);
    }
    num / den
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn percentile(v: &mut [f64], p: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let h = p * (v.len() - 1) as f64;
    let i = h.floor() as usize;
    if i + 1 < v.len() {
        v[i] + (h - i as f64) * (v[i + 1] - v[i])
    } else {
        v[i]
    }
}
