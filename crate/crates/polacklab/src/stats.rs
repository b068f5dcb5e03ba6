//! Shared statistical machinery for the Monte Carlo checks: Kolmogorov-
//! Smirnov and Rayleigh uniformity tests, variance-ratio and correlation
//! tests, and least-squares fitting.

use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal};

use crate::error::{Error, Result};

/// Sample mean and unbiased variance.
pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n < 2 {
        return (xs.first().copied().unwrap_or(0.0), 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var)
}

/// Unbiased covariance of paired samples.
pub(crate) fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1) as f64
}

/// Survival function of the Kolmogorov distribution,
/// `Q(t) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 t^2}`, with the theta-dual form
/// for small arguments.
pub(crate) fn kolmogorov_sf(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t < 1.18 {
        // 1 - sqrt(2 pi)/t * sum e^{-(2k-1)^2 pi^2 / (8 t^2)}
        let mut sum = 0.0;
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * t * t);
        for k in 1..=20u32 {
            let m = (2 * k - 1) as f64;
            sum += (-m * m * c).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / t * sum).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=20u32 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * t * t).exp();
            sum += if k % 2 == 1 { term } else { -term };
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// One-sample KS test of `data` against Uniform[0, 1].
/// Returns `(d, p)` with Stephens' finite-sample correction in the p-value.
pub(crate) fn ks_test_uniform01(data: &[f64]) -> Result<(f64, f64)> {
    ks_test_cdf(data, |x| x.clamp(0.0, 1.0))
}

/// One-sample KS test against an arbitrary continuous CDF.
pub(crate) fn ks_test_cdf(data: &[f64], cdf: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let n = data.len();
    if n < 2 {
        return Err(Error::stats(format!("KS test needs n >= 2, got {n}")));
    }
    let mut sorted: Vec<f64> = data.to_vec();
    if sorted.iter().any(|x| x.is_nan()) {
        return Err(Error::stats("KS test input contains NaN"));
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let fx = cdf(x);
        d = d.max((fx - i as f64 / nf).abs());
        d = d.max(((i + 1) as f64 / nf - fx).abs());
    }
    let t = d * (nf.sqrt() + 0.12 + 0.11 / nf.sqrt());
    Ok((d, kolmogorov_sf(t)))
}

/// KS test against a normal law with mean/variance fitted from the data.
/// With fitted parameters the standard p-value is conservative, which is the
/// safe direction for the pass/fail uses in this crate.
pub(crate) fn ks_test_normal_fitted(data: &[f64]) -> Result<(f64, f64)> {
    let (mean, var) = mean_var(data);
    if var <= 0.0 {
        return Err(Error::stats("degenerate sample: zero variance"));
    }
    let normal = Normal::new(mean, var.sqrt()).map_err(|e| Error::stats(e.to_string()))?;
    ks_test_cdf(data, |x| normal.cdf(x))
}

/// Rayleigh test of circular uniformity. Returns `(z, p)` where
/// `z = n rbar^2` and `p` uses the standard series approximation.
pub(crate) fn rayleigh_test(phases: &[f64]) -> Result<(f64, f64)> {
    let n = phases.len();
    if n < 2 {
        return Err(Error::stats("Rayleigh test needs n >= 2"));
    }
    let r = resultant(phases).norm();
    let nf = n as f64;
    let z = nf * r * r;
    let p = (-z).exp()
        * (1.0 + (2.0 * z - z * z) / (4.0 * nf)
            - (24.0 * z - 132.0 * z * z + 76.0 * z * z * z - 9.0 * z * z * z * z)
                / (288.0 * nf * nf));
    Ok((z, p.clamp(0.0, 1.0)))
}

/// Mean resultant vector `(1/n) sum e^{i theta}`.
pub(crate) fn resultant(phases: &[f64]) -> Complex64 {
    if phases.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let sum: Complex64 = phases
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .sum();
    sum / phases.len() as f64
}

/// Two-sided F test for equality of two variances with `n1 - 1` and `n2 - 1`
/// degrees of freedom.
pub(crate) fn variance_ratio_p(var1: f64, var2: f64, n1: usize, n2: usize) -> Result<f64> {
    if var1 <= 0.0 || var2 <= 0.0 {
        return Err(Error::stats("variance ratio test needs positive variances"));
    }
    if n1 < 2 || n2 < 2 {
        return Err(Error::stats("variance ratio test needs n >= 2 per sample"));
    }
    let f = var1 / var2;
    let dist = FisherSnedecor::new((n1 - 1) as f64, (n2 - 1) as f64)
        .map_err(|e| Error::stats(e.to_string()))?;
    let lower = dist.cdf(f);
    Ok((2.0 * lower.min(1.0 - lower)).clamp(0.0, 1.0))
}

/// Two-sided Fisher-z test for zero correlation.
pub(crate) fn correlation_p(r: f64, n: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::stats("correlation test needs n >= 4"));
    }
    let r = r.clamp(-1.0 + 1e-15, 1.0 - 1e-15);
    let z = r.atanh() * ((n - 3) as f64).sqrt();
    let normal = Normal::new(0.0, 1.0).unwrap();
    Ok((2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0))
}

/// Ordinary least squares fit `y = slope x + intercept`, with r^2.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return Err(Error::stats("linear fit needs n >= 3 matched points"));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::stats("linear fit: degenerate x values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, intercept, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn kolmogorov_sf_reference_points() {
        // high-precision values of Q(t) = 2 sum (-1)^{k-1} e^{-2 k^2 t^2}
        assert!((kolmogorov_sf(0.82757) - 0.50000559).abs() < 1e-6);
        assert!((kolmogorov_sf(1.22385) - 0.09999896).abs() < 1e-6);
        assert!((kolmogorov_sf(1.62762) - 0.01000024).abs() < 1e-6);
        assert!((kolmogorov_sf(0.5) - 0.96394524).abs() < 1e-6);
        // the two branch formulas agree at the switch point
        assert!((kolmogorov_sf(1.18) - 0.12345381).abs() < 1e-6);
        assert!(
            (kolmogorov_sf(1.1799999) - kolmogorov_sf(1.1800001)).abs() < 1e-6,
            "branch discontinuity"
        );
    }

    #[test]
    fn ks_uniform_detects_and_accepts() {
        let mut rng = crate::rng::rng_for(1, 0);
        let unif: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
        let (_, p) = ks_test_uniform01(&unif).unwrap();
        assert!(p > 0.01, "uniform sample rejected, p={p}");
        let squashed: Vec<f64> = unif.iter().map(|x| x * x).collect();
        let (_, p_bad) = ks_test_uniform01(&squashed).unwrap();
        assert!(p_bad < 1e-10);
        // all-equal sample: maximal statistic, p ~ 0
        let flat = vec![0.37; 100];
        let (d, p_flat) = ks_test_uniform01(&flat).unwrap();
        assert!(d > 0.6 && p_flat < 1e-10);
    }

    #[test]
    fn rayleigh_detects_concentration() {
        let mut rng = crate::rng::rng_for(2, 0);
        let unif: Vec<f64> = (0..2000)
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect();
        let (_, p) = rayleigh_test(&unif).unwrap();
        assert!(p > 0.01);
        let clustered: Vec<f64> = (0..2000).map(|i| 0.3 * ((i % 7) as f64) / 7.0).collect();
        let (_, p_bad) = rayleigh_test(&clustered).unwrap();
        assert!(p_bad < 1e-10);
    }

    #[test]
    fn variance_ratio_and_correlation_reference() {
        // equal variances, large n: p near 1
        let p = variance_ratio_p(1.0, 1.0, 1000, 1000).unwrap();
        assert!(p > 0.99);
        // strongly different variances
        let p2 = variance_ratio_p(2.0, 1.0, 1000, 1000).unwrap();
        assert!(p2 < 1e-10);
        assert!(correlation_p(0.0, 100).unwrap() > 0.99);
        assert!(correlation_p(0.5, 1000).unwrap() < 1e-10);
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs: Vec<f64> = (1..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -2.0 * x + 3.0).collect();
        let (slope, intercept, r2) = linear_fit(&xs, &ys).unwrap();
        assert!((slope + 2.0).abs() < 1e-12);
        assert!((intercept - 3.0).abs() < 1e-11);
        assert!((r2 - 1.0).abs() < 1e-12);
    }
}
