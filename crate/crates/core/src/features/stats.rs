//! Per-channel window statistics.
//!
//! Standard deviation is the population (1/N) form. A channel whose spread is
//! below floating-point resolution of its magnitude counts as zero-variance:
//! its std is reported as 0 and its skewness, excess kurtosis and any
//! correlation involving it are 0.

use alloc::vec::Vec;

const ZERO_VAR_REL: f64 = 1e-12;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Central moments m2, m3, m4, with m2 forced to 0 for zero-variance input.
fn central_moments(xs: &[f64], mu: f64) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mu;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let floor = ZERO_VAR_REL * max_abs(xs);
    if libm::sqrt(m2) <= floor {
        (0.0, 0.0, 0.0)
    } else {
        (m2, m3, m4)
    }
}

/// Linear-interpolation quantile of sorted data (the "type 7" definition).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

pub fn median(xs: &[f64]) -> f64 {
    quantile_sorted(&sorted_copy(xs), 0.5)
}

/// The eleven statistics of one channel, in catalog order:
/// mean, std, min, max, range, median, rms, iqr, mad, skew, kurt.
pub fn channel_stats(xs: &[f64]) -> [f64; 11] {
    debug_assert!(!xs.is_empty());
    let mu = mean(xs);
    let (m2, m3, m4) = central_moments(xs, mu);
    let std = libm::sqrt(m2);
    let sorted = sorted_copy(xs);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let med = quantile_sorted(&sorted, 0.5);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let rms = libm::sqrt(xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64);
    let mut deviations: Vec<f64> = xs.iter().map(|x| (x - med).abs()).collect();
    deviations.sort_unstable_by(f64::total_cmp);
    let mad = quantile_sorted(&deviations, 0.5);
    let (skew, kurt) = if m2 == 0.0 {
        (0.0, 0.0)
    } else {
        (m3 / (m2 * libm::sqrt(m2)), m4 / (m2 * m2) - 3.0)
    };
    [mu, std, min, max, max - min, med, rms, iqr.max(0.0), mad, skew, kurt]
}

/// Pearson correlation, 0 when either side has zero variance.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let (vx, _, _) = central_moments(xs, mx);
    let (vy, _, _) = central_moments(ys, my);
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    let cov = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.len() as f64;
    (cov / libm::sqrt(vx * vy)).clamp(-1.0, 1.0)
}
