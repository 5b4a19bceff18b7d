//! Paired two-sided Wilcoxon signed-rank test.

use statrs::distribution::{ContinuousCDF, Normal};

use super::EvalError;

/// Pairs at or below this count use the exact null distribution.
pub const EXACT_LIMIT: usize = 25;

/// Minimum number of pairs accepted.
pub const MIN_PAIRS: usize = 6;

/// Signed ranks of the non-zero differences `a - b`, with tied magnitudes
/// sharing their average rank. Returns `(rank, positive)` pairs.
pub fn signed_ranks(a: &[f64], b: &[f64]) -> Vec<(f64, bool)> {
    let mut diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    diffs.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let tied = |x: f64, y: f64| (x.abs() - y.abs()).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);

    let mut out = Vec::with_capacity(diffs.len());
    let mut i = 0;
    while i < diffs.len() {
        let mut j = i + 1;
        while j < diffs.len() && tied(diffs[i], diffs[j]) {
            j += 1;
        }
        // ranks i+1 ..= j averaged
        let rank = (i + 1 + j) as f64 / 2.0;
        out.extend(diffs[i..j].iter().map(|d| (rank, *d > 0.0)));
        i = j;
    }
    out
}

/// Two-sided p-value of the signed-rank statistic for paired scores.
///
/// Zero differences are dropped. Up to [`EXACT_LIMIT`] non-zero pairs the
/// exact permutation distribution is used (ties included); above it, the
/// normal approximation with tie-corrected variance and continuity
/// correction.
pub fn paired_significance(scores_a: &[f64], scores_b: &[f64]) -> Result<f64, EvalError> {
    if scores_a.len() != scores_b.len() {
        return Err(EvalError::Parameter(format!(
            "paired samples differ in length: {} vs {}",
            scores_a.len(),
            scores_b.len()
        )));
    }
    if scores_a.len() < MIN_PAIRS {
        return Err(EvalError::Parameter(format!("need at least {MIN_PAIRS} pairs, got {}", scores_a.len())));
    }
    if scores_a.iter().chain(scores_b).any(|v| !v.is_finite()) {
        return Err(EvalError::Parameter("scores must be finite".into()));
    }
    let ranks = signed_ranks(scores_a, scores_b);
    let n = ranks.len();
    if n == 0 {
        return Ok(1.0);
    }
    let w_plus: f64 = ranks.iter().filter(|r| r.1).map(|r| r.0).sum();
    let p = if n <= EXACT_LIMIT { exact_p(&ranks, w_plus) } else { normal_p(&ranks, w_plus) };
    Ok(p.min(1.0))
}

fn exact_p(ranks: &[(f64, bool)], w_plus: f64) -> f64 {
    // doubled ranks are integers even with averaged ties
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let all = 2f64.powi(ranks.len() as i32);
    let w = (2.0 * w_plus).round() as usize;
    let lower: f64 = counts[..=w].iter().sum::<f64>() / all;
    let upper: f64 = counts[w..].iter().sum::<f64>() / all;
    2.0 * lower.min(upper)
}

fn normal_p(ranks: &[(f64, bool)], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < ranks.len() {
        let mut j = i + 1;
        while j < ranks.len() && ranks[j].0 == ranks[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * (1.0 - normal.cdf(z))
}
