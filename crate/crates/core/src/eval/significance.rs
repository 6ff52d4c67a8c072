//! User lift and the paired two-sided Wilcoxon signed-rank test.

use alloc::vec;
use alloc::vec::Vec;

use super::EvalError;

/// Largest number of non-zero differences that uses the exact null
/// distribution; above it the tie-corrected normal approximation is used.
pub const EXACT_MAX_N: usize = 25;
pub const MIN_PAIRS: usize = 5;

/// Mean model accuracy minus mean baseline accuracy.
pub fn user_lift(model: &[f64], baseline: &[f64]) -> Result<f64, EvalError> {
    if model.len() != baseline.len() {
        return Err(EvalError::LengthMismatch(model.len(), baseline.len()));
    }
    if model.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = model.len() as f64;
    Ok(model.iter().sum::<f64>() / n - baseline.iter().sum::<f64>() / n)
}

/// Mid-ranks (1-based) of `values`, ties sharing their average rank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedRankResult {
    /// Sum of ranks of the positive differences.
    pub w_plus: f64,
    /// Non-zero differences actually ranked.
    pub n: usize,
    pub p_value: f64,
    pub exact: bool,
}

/// Two-sided signed-rank test of `differences` against a zero median.
/// Zero differences are dropped; if none remain the p-value is 1.
pub fn signed_rank_test(differences: &[f64]) -> SignedRankResult {
    let nonzero: Vec<f64> = differences.iter().copied().filter(|d| *d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return SignedRankResult {
            w_plus: 0.0,
            n: 0,
            p_value: 1.0,
            exact: true,
        };
    }
    let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&abs);
    let w_plus: f64 = ranks
        .iter()
        .zip(&nonzero)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let (p_value, exact) = if n <= EXACT_MAX_N {
        (exact_p(&ranks, w_plus), true)
    } else {
        (normal_p(&abs, &ranks, w_plus), false)
    };
    SignedRankResult {
        w_plus,
        n,
        p_value,
        exact,
    }
}

/// Exact permutation p-value. Mid-ranks are doubled so every rank is an
/// integer, then the distribution of the positive rank sum over all 2ⁿ sign
/// assignments is built by dynamic programming.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| libm::round(2.0 * r) as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let observed = libm::round(2.0 * w_plus) as usize;
    let all = libm::pow(2.0, doubled.len() as f64);
    let lower: f64 = counts[..=observed].iter().sum::<f64>() / all;
    let upper: f64 = counts[observed..].iter().sum::<f64>() / all;
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_p(abs: &[f64], ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    // tie correction: Σ (t³ - t) / 48 over groups of equal |d|
    let mut sorted = abs.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|a, b| a == b) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = (w_plus - mean) / libm::sqrt(var);
    libm::erfc(z.abs() / core::f64::consts::SQRT_2).min(1.0)
}

/// Two-sided Wilcoxon signed-rank p-value of per-user model accuracies
/// against baseline accuracies.
pub fn paired_significance(model: &[f64], baseline: &[f64]) -> Result<f64, EvalError> {
    if model.len() != baseline.len() {
        return Err(EvalError::LengthMismatch(model.len(), baseline.len()));
    }
    if model.len() < MIN_PAIRS {
        return Err(EvalError::TooFewPairs(model.len()));
    }
    let diffs: Vec<f64> = model.iter().zip(baseline).map(|(m, b)| m - b).collect();
    Ok(signed_rank_test(&diffs).p_value)
}
