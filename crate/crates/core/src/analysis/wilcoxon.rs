use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::AnalysisError;

/// Largest effective sample size for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(w_plus, w_minus)`.
    pub statistic: f64,
    /// Tie-corrected, continuity-corrected normal score; positive when post > pre.
    pub z: f64,
    pub p_two_sided: f64,
    pub method: Method,
}

/// Non-zero paired differences with their average ranks.
///
/// Ranks are stored doubled so tied (half-integer) ranks stay integral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedRanks {
    pub doubled_ranks: Vec<u32>,
    pub positive: Vec<bool>,
    /// Sizes of groups of tied absolute differences (only groups > 1).
    pub tie_groups: Vec<usize>,
}

impl SignedRanks {
    pub fn from_differences(diffs: &[f64]) -> Self {
        let mut nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
        nonzero.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        let n = nonzero.len();
        let mut doubled_ranks = vec![0u32; n];
        let mut tie_groups = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start;
            while end + 1 < n && nonzero[end + 1].abs() == nonzero[start].abs() {
                end += 1;
            }
            // positions start..=end hold 1-based ranks start+1..=end+1
            let doubled = (start + 1 + end + 1) as u32;
            for r in &mut doubled_ranks[start..=end] {
                *r = doubled;
            }
            if end > start {
                tie_groups.push(end - start + 1);
            }
            start = end + 1;
        }
        let positive = nonzero.iter().map(|d| *d > 0.0).collect();
        SignedRanks { doubled_ranks, positive, tie_groups }
    }

    pub fn len(&self) -> usize {
        self.doubled_ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doubled_ranks.is_empty()
    }

    /// Doubled W+.
    pub fn doubled_w_plus(&self) -> u32 {
        self.doubled_ranks
            .iter()
            .zip(&self.positive)
            .filter(|(_, p)| **p)
            .map(|(r, _)| r)
            .sum()
    }

    /// Doubled total rank sum, n(n+1).
    pub fn doubled_total(&self) -> u32 {
        self.doubled_ranks.iter().sum()
    }

    pub fn tie_correction(&self) -> f64 {
        self.tie_groups
            .iter()
            .map(|&t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum::<f64>()
            / 48.0
    }
}

/// Exact two-sided p: the share of the 2^n equally likely sign assignments
/// whose W+ lies at least as far from its mean as the observed one.
///
/// Counts the null distribution by dynamic programming over doubled rank sums.
pub fn exact_p_value(ranks: &SignedRanks) -> f64 {
    let total = ranks.doubled_total() as usize;
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in &ranks.doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let observed = i64::from(ranks.doubled_w_plus());
    let total = total as i64;
    let distance = (2 * observed - total).abs();
    let extreme: f64 = counts
        .iter()
        .enumerate()
        .filter(|(s, _)| (2 * *s as i64 - total).abs() >= distance)
        .map(|(_, c)| c)
        .sum();
    let p = extreme / 2f64.powi(ranks.len() as i32);
    p.min(1.0)
}

/// Normal approximation with tie-corrected variance and a 0.5 continuity
/// correction toward the mean. Returns `(z, two-sided p)`.
pub fn normal_approximation(ranks: &SignedRanks) -> (f64, f64) {
    let n = ranks.len() as f64;
    let w_plus = f64::from(ranks.doubled_w_plus()) / 2.0;
    let mean = n * (n + 1.0) / 4.0;
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ranks.tie_correction();
    let sd = variance.sqrt();
    let diff = w_plus - mean;
    let corrected = diff.signum() * (diff.abs() - 0.5).max(0.0);
    let z = if sd > 0.0 { corrected / sd } else { 0.0 };
    let p = erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0);
    (z, p)
}

/// Related-samples Wilcoxon signed-rank test on `post - pre`.
///
/// Zero differences are dropped and tied magnitudes get average ranks. The
/// exact null distribution is used up to [`EXACT_MAX_N`] pairs, the normal
/// approximation above that.
pub fn wilcoxon_signed_rank(pre: &[f64], post: &[f64]) -> Result<WilcoxonResult, AnalysisError> {
    if pre.len() != post.len() {
        return Err(AnalysisError::LengthMismatch { expected: pre.len(), got: post.len() });
    }
    if pre.is_empty() {
        return Err(AnalysisError::EmptyDataset);
    }
    let diffs: Vec<f64> = pre.iter().zip(post).map(|(a, b)| b - a).collect();
    let ranks = SignedRanks::from_differences(&diffs);
    if ranks.is_empty() {
        return Err(AnalysisError::AllZeroDifferences);
    }
    let n = ranks.len();
    let w_plus = f64::from(ranks.doubled_w_plus()) / 2.0;
    let w_minus = (n * (n + 1)) as f64 / 2.0 - w_plus;
    let (z, approx_p) = normal_approximation(&ranks);
    let (p, method) = if n <= EXACT_MAX_N {
        (exact_p_value(&ranks), Method::Exact)
    } else {
        (approx_p, Method::NormalApprox)
    };
    Ok(WilcoxonResult {
        n_effective: n,
        w_plus,
        w_minus,
        statistic: w_plus.min(w_minus),
        z,
        p_two_sided: p,
        method,
    })
}
