//! Closed-form cutoff predictions, the distance-from-root law of the simple
//! walk on the infinite d-regular tree, and standard normal utilities.

use crate::error::{Error, Result};

/// Window constant `Λ = 2√(d(d−1)) / (d−2)^{3/2}` of the simple walk.
pub fn window_constant(d: usize) -> f64 {
    let d = d as f64;
    2.0 * (d * (d - 1.0)).sqrt() / (d - 2.0).powf(1.5)
}

/// `log_{d−1} x`.
pub fn log_branch(d: usize, x: f64) -> f64 {
    x.ln() / ((d - 1) as f64).ln()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SrwPrediction {
    /// `d/(d−2) · log_{d−1} n`.
    pub cutoff_point: f64,
    /// `cutoff_point − Λ·Φ⁻¹(s)·√(log_{d−1} n)`.
    pub tmix_estimate: f64,
    /// `√(log_{d−1} n)`.
    pub window_scale: f64,
    pub lambda: f64,
}

pub fn srw_prediction(n: usize, d: usize, s: f64) -> Result<SrwPrediction> {
    if d < 3 || n < 2 {
        return Err(Error::BadDegree { n, d });
    }
    let z = normal_quantile(s)?;
    let log_n = log_branch(d, n as f64);
    let cutoff_point = d as f64 / (d - 2) as f64 * log_n;
    let lambda = window_constant(d);
    let window_scale = log_n.sqrt();
    Ok(SrwPrediction {
        cutoff_point,
        tmix_estimate: cutoff_point - lambda * z * window_scale,
        window_scale,
        lambda,
    })
}

/// Smallest `k ≥ 0` with `base^k ≥ x`, by integer comparison.
pub fn ceil_log(base: u64, x: u128) -> u32 {
    assert!(base >= 2, "logarithm base must be at least 2");
    let mut k = 0;
    let mut power: u128 = 1;
    while power < x {
        power = power.saturating_mul(base as u128);
        k += 1;
    }
    k
}

/// Best rational approximation `p/q` of `x ∈ (0, 1)` with `q ≤ 10^12`, by
/// continued fractions. Decimal inputs such as 0.1 come back exact.
pub fn rational_approximation(x: f64) -> (u128, u128) {
    let (mut h0, mut h1) = (0u128, 1u128);
    let (mut k0, mut k1) = (1u128, 0u128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as u128;
        let h2 = ai.saturating_mul(h1).saturating_add(h0);
        let k2 = ai.saturating_mul(k1).saturating_add(k0);
        if k2 > 1_000_000_000_000 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if ((h1 as f64 / k1 as f64) - x).abs() <= x * 1e-15 || frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    (h1, k1)
}

/// `⌈log_{base}(1/ε)⌉` with `ε` read as a rational: the smallest `k` with
/// `base^k · p ≥ q`.
pub fn ceil_log_reciprocal(base: u64, epsilon: f64) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::BadEpsilon(epsilon));
    }
    let (p, q) = rational_approximation(epsilon);
    let mut k = 0;
    let mut lhs = p;
    while lhs < q {
        lhs = lhs.saturating_mul(base as u128);
        k += 1;
    }
    Ok(k)
}

/// Integer bounds around the non-backtracking cutoff at `⌈log_{d−1}(dn)⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NbrwBounds {
    /// `⌈log_{d−1}(dn)⌉ − ⌈log_{d−1}(1/ε)⌉`, a lower bound on `t_mix(1−ε)`
    /// valid on every d-regular graph.
    pub lower: i64,
    /// `⌈log_{d−1}(dn)⌉ + 3⌈log_{d−1}(1/ε)⌉ + 4`, the whp upper bound on `t_mix(ε)`.
    pub upper: i64,
    pub log_dn: u32,
    pub log_inv_eps: u32,
}

pub fn nbrw_bounds(n: usize, d: usize, epsilon: f64) -> Result<NbrwBounds> {
    if d < 3 || n == 0 {
        return Err(Error::BadDegree { n, d });
    }
    let log_inv_eps = ceil_log_reciprocal(d as u64 - 1, epsilon)?;
    let log_dn = ceil_log(d as u64 - 1, d as u128 * n as u128);
    Ok(NbrwBounds {
        lower: log_dn as i64 - log_inv_eps as i64,
        upper: log_dn as i64 + 3 * log_inv_eps as i64 + 4,
        log_dn,
        log_inv_eps,
    })
}

/// Threshold on `d·log₂log₂ n / log₂ n` above which the simple and
/// non-backtracking walks are reported as mixing together. A finite stand-in
/// for the ratio tending to infinity.
pub const COINCIDE_THRESHOLD: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LargeDPrediction {
    /// `t_mix` lies in `{T, T+1}` with `T = ⌈log_{d−1}(dn)⌉`.
    pub tmix_set: [u32; 2],
    /// Simple-walk window scale `√(ln n / (d ln d))`.
    pub srw_window: f64,
    /// `d·log₂log₂ n / log₂ n`.
    pub coincide_ratio: f64,
    pub coincide: bool,
}

/// Takes `n` as `u128` so the hypercube-sized regime `n = 2^m` is expressible.
pub fn large_d_predictions(n: u128, d: usize) -> Result<LargeDPrediction> {
    if d < 3 || n < 3 {
        return Err(Error::BadDegree { n: n.min(usize::MAX as u128) as usize, d });
    }
    let t = ceil_log(d as u64 - 1, (d as u128).saturating_mul(n));
    let (nf, df) = (n as f64, d as f64);
    let coincide_ratio = df * nf.log2().log2() / nf.log2();
    Ok(LargeDPrediction {
        tmix_set: [t, t + 1],
        srw_window: (nf.ln() / (df * df.ln())).sqrt(),
        coincide_ratio,
        coincide: coincide_ratio >= COINCIDE_THRESHOLD,
    })
}

/// Exact law of `dist(X_t, root)` for the simple walk on the infinite
/// d-regular tree started at the root; entry `k` is the mass at height `k`.
pub fn tree_height_distribution(d: usize, t: usize) -> Vec<f64> {
    assert!(d >= 3, "tree degree must be at least 3");
    let down = 1.0 / d as f64;
    let up = (d - 1) as f64 / d as f64;
    let mut h = vec![0.0; t + 2];
    let mut next = vec![0.0; t + 2];
    h[0] = 1.0;
    for step in 0..t {
        let top = step + 1;
        next[0] = h[1] * down;
        next[1] = h[0] + h[2] * down;
        for k in 2..=top {
            next[k] = h[k - 1] * up + h[k + 1] * down;
        }
        std::mem::swap(&mut h, &mut next);
    }
    h.truncate(t + 1);
    h
}

/// Mean and variance of a distribution on `0, 1, 2, …`.
pub fn moments(p: &[f64]) -> (f64, f64) {
    let mean: f64 = p.iter().enumerate().map(|(k, &x)| k as f64 * x).sum();
    let var = p.iter().enumerate().map(|(k, &x)| (k as f64 - mean).powi(2) * x).sum();
    (mean, var)
}

/// Complementary error function for `x ≥ 0` (Chebyshev-fitted exponential
/// form, fractional error below 1.2·10⁻⁷ everywhere).
fn erfc_nonnegative(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.5 * x);
    let poly = -x * x - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    t * poly.exp()
}

/// Standard normal c.d.f. `Φ`, absolute error below 10⁻⁷.
pub fn normal_cdf(x: f64) -> f64 {
    let tail = 0.5 * erfc_nonnegative(x.abs() / std::f64::consts::SQRT_2);
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// `Φ⁻¹(p)` by bisection on [`normal_cdf`], to 10⁻⁹ in the argument.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BadLevel(p));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gaussian {
    Cdf,
    Quantile,
}

pub fn gaussian(kind: Gaussian, x: f64) -> Result<f64> {
    match kind {
        Gaussian::Cdf => Ok(normal_cdf(x)),
        Gaussian::Quantile => normal_quantile(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson integration of the normal density from 0 to x.
    fn cdf_by_quadrature(x: f64) -> f64 {
        let steps = 20_000;
        let h = x / steps as f64;
        let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = pdf(0.0) + pdf(x);
        for i in 1..steps {
            acc += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        0.5 + acc * h / 3.0
    }

    #[test]
    fn cdf_matches_quadrature() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-7);
        assert!((normal_cdf(1.0) - 0.841_345).abs() < 1e-6);
        for i in 0..=60 {
            let x = i as f64 * 0.1;
            assert!((normal_cdf(x) - cdf_by_quadrature(x)).abs() < 1e-7, "x = {x}");
            assert!((normal_cdf(-x) + normal_cdf(x) - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..1000 {
            let p = 0.001 * i as f64;
            let x = normal_quantile(p).unwrap();
            assert!((normal_cdf(x) - p).abs() < 1e-6);
        }
        assert!((normal_quantile(0.25).unwrap() + 0.674_489_75).abs() < 1e-6);
        assert!(matches!(normal_quantile(1.0), Err(Error::BadLevel(_))));
        assert!(matches!(gaussian(Gaussian::Quantile, 0.0), Err(Error::BadLevel(_))));
    }

    #[test]
    fn srw_prediction_values() {
        let p = srw_prediction(1 << 20, 3, 0.5).unwrap();
        assert!((p.tmix_estimate - 60.0).abs() < 1e-9);
        assert!((window_constant(3) - 2.0 * 6f64.sqrt()).abs() < 1e-12);
        let q = srw_prediction(1 << 20, 3, 0.25).unwrap();
        let expected = 60.0 + 0.674_489_75 * 2.0 * 6f64.sqrt() * 20f64.sqrt();
        assert!((q.tmix_estimate - expected).abs() < 1e-5);
        assert!((q.tmix_estimate - 74.8).abs() < 0.05);
        assert!(matches!(srw_prediction(100, 2, 0.5), Err(Error::BadDegree { .. })));
        assert!(matches!(srw_prediction(100, 3, 1.5), Err(Error::BadLevel(_))));
    }

    #[test]
    fn lambda_identity() {
        for d in 3..=64 {
            let df = d as f64;
            let alt = 2.0 * (df - 1.0).sqrt() / (df - 2.0) * (df / (df - 2.0)).sqrt();
            assert!((window_constant(d) - alt).abs() <= 1e-12 * alt.max(1.0));
        }
    }

    #[test]
    fn integer_ceilings() {
        assert_eq!(ceil_log(2, 6000), 13);
        assert_eq!(ceil_log(2, 4096), 12);
        assert_eq!(ceil_log(2, 4097), 13);
        assert_eq!(ceil_log(2, 1), 0);
        assert_eq!(ceil_log(99, 100_000_000), 5);
        assert_eq!(ceil_log_reciprocal(2, 0.25).unwrap(), 2);
        assert_eq!(ceil_log_reciprocal(2, 0.5).unwrap(), 1);
        assert_eq!(ceil_log_reciprocal(10, 0.1).unwrap(), 1);
        assert_eq!(ceil_log_reciprocal(10, 0.01).unwrap(), 2);
        assert_eq!(ceil_log_reciprocal(2, 0.1).unwrap(), 4);
        assert_eq!(rational_approximation(0.1), (1, 10));
        assert!(ceil_log_reciprocal(2, 0.0).is_err());
    }

    #[test]
    fn nbrw_bound_values() {
        let b = nbrw_bounds(2000, 3, 0.25).unwrap();
        assert_eq!((b.lower, b.upper, b.log_dn), (11, 23, 13));
        let b = nbrw_bounds(4, 3, 0.5).unwrap();
        assert_eq!((b.lower, b.upper), (3, 11));
        assert!(matches!(nbrw_bounds(10, 3, 1.0), Err(Error::BadEpsilon(_))));
    }

    #[test]
    fn large_d_values() {
        let p = large_d_predictions(1_000_000, 100).unwrap();
        assert_eq!(p.tmix_set, [5, 6]);
        for m in 64..=120usize {
            assert!(large_d_predictions(1u128 << m, m).unwrap().coincide, "m = {m}");
        }
        assert!(!large_d_predictions(1u128 << 63, 63).unwrap().coincide);
        let w: Vec<f64> = [3, 10, 50, 200]
            .iter()
            .map(|&d| large_d_predictions(1_000_000, d).unwrap().srw_window)
            .collect();
        assert!(w.iter().all(|&x| x > 0.0));
        assert!(w.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn tree_height_small_cases() {
        let h = tree_height_distribution(3, 2);
        assert!((h[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(h[1], 0.0);
        assert!((h[2] - 2.0 / 3.0).abs() < 1e-15);
        let h = tree_height_distribution(4, 7);
        for (k, &x) in h.iter().enumerate() {
            if k % 2 != 7 % 2 {
                assert_eq!(x, 0.0);
            }
        }
    }

    #[test]
    fn tree_height_moments_follow_the_clt_scaling() {
        let t = 400;
        let h = tree_height_distribution(3, t);
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12 * t as f64);
        let (mean, var) = moments(&h);
        assert!((mean - t as f64 / 3.0).abs() < 2.0, "mean {mean}");
        let target = 4.0 * 2.0 * t as f64 / 9.0;
        assert!((var / target - 1.0).abs() < 0.10, "var {var}");
    }
}
