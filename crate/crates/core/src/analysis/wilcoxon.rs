//! Paired Wilcoxon signed-rank test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::AnalysisError;

/// Largest effective sample size the exact null distribution is computed for.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub label: String,
    pub a: f64,
    pub b: f64,
}

impl PairedSample {
    pub fn new(label: impl Into<String>, a: f64, b: f64) -> Self {
        Self { label: label.into(), a, b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMode {
    Exact,
    NormalApprox,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Smaller of the two signed-rank sums.
    pub w_statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    /// Two-sided.
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Ranks of `values` (1-based, ties averaged), doubled so they stay integral.
fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0u64; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1..=end average to (start + 1 + end) / 2.
        let doubled = (start + 1 + end) as u64;
        for &i in &order[start..end] {
            ranks[i] = doubled;
        }
        start = end;
    }
    ranks
}

fn tie_correction(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let t = (end - start) as f64;
        total += t * t * t - t;
        start = end;
    }
    total
}

/// Number of sign assignments whose doubled positive-rank sum is at most `limit`.
fn count_at_most(doubled: &[u64], limit: u64) -> u64 {
    let total: u64 = doubled.iter().sum();
    let mut ways = vec![0u64; total as usize + 1];
    ways[0] = 1;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if ways[s] > 0 {
                ways[s + r] += ways[s];
            }
        }
        reach += r;
    }
    ways.iter().take(limit.min(total) as usize + 1).sum()
}

/// Two-sided signed-rank test on the differences `a - b`.
///
/// Zero differences are dropped, tied magnitudes share their average rank,
/// and `Auto` uses the exact distribution up to [`EXACT_MAX_N`] pairs.
pub fn wilcoxon_signed_rank(
    pairs: &[PairedSample],
    mode: WilcoxonMode,
) -> Result<WilcoxonResult, AnalysisError> {
    if pairs.is_empty() {
        return Err(AnalysisError::NoPairs);
    }
    if let Some(p) = pairs.iter().find(|p| !p.a.is_finite() || !p.b.is_finite()) {
        return Err(AnalysisError::NonFinite(p.label.clone()));
    }
    let diffs: Vec<f64> = pairs.iter().map(|p| p.a - p.b).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(AnalysisError::AllZero);
    }
    let n = diffs.len();
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let doubled = doubled_ranks(&magnitudes);
    let plus2: u64 = diffs.iter().zip(&doubled).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total2 = (n * (n + 1)) as u64;
    let minus2 = total2 - plus2;
    let w2 = plus2.min(minus2);

    let method = match mode {
        WilcoxonMode::Exact if n > EXACT_MAX_N => {
            return Err(AnalysisError::ExactTooLarge { n, max: EXACT_MAX_N })
        }
        WilcoxonMode::Exact => WilcoxonMethod::Exact,
        WilcoxonMode::NormalApprox => WilcoxonMethod::NormalApprox,
        WilcoxonMode::Auto if n <= EXACT_MAX_N => WilcoxonMethod::Exact,
        WilcoxonMode::Auto => WilcoxonMethod::NormalApprox,
    };

    let w = w2 as f64 / 2.0;
    let p_value = match method {
        WilcoxonMethod::Exact => {
            let count = count_at_most(&doubled, w2);
            (2.0 * count as f64 / 2f64.powi(n as i32)).min(1.0)
        }
        WilcoxonMethod::NormalApprox => {
            let nf = n as f64;
            let mean = nf * (nf + 1.0) / 4.0;
            let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_correction(&magnitudes) / 48.0;
            if var <= 0.0 {
                1.0
            } else {
                let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
                let normal = Normal::standard();
                (2.0 * normal.sf(z)).clamp(0.0, 1.0)
            }
        }
    };

    Ok(WilcoxonResult {
        w_statistic: w,
        w_plus: plus2 as f64 / 2.0,
        w_minus: minus2 as f64 / 2.0,
        n_effective: n,
        p_value,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(diffs: &[f64]) -> Vec<PairedSample> {
        diffs.iter().enumerate().map(|(i, d)| PairedSample::new(i.to_string(), *d, 0.0)).collect()
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(doubled_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![7, 2, 7, 4]);
    }

    #[test]
    fn w_two_of_eleven() {
        // Ranks 1..11; only rank 2 is negative, so W- = 2.
        let mut d: Vec<f64> = (1..=11).map(f64::from).collect();
        d[1] = -2.0;
        let r = wilcoxon_signed_rank(&pairs(&d), WilcoxonMode::Exact).unwrap();
        assert_eq!(r.w_statistic, 2.0);
        assert_eq!(r.n_effective, 11);
        // Sign vectors with W+ <= 2: {}, {1}, {2}.
        assert_eq!(r.p_value, 2.0 * 3.0 / 2048.0);
    }

    #[test]
    fn zeros_are_dropped() {
        let r = wilcoxon_signed_rank(&pairs(&[0.0, 1.0, -2.0, 3.0]), WilcoxonMode::Exact).unwrap();
        assert_eq!(r.n_effective, 3);
        assert_eq!(r.w_statistic, 2.0);
    }

    #[test]
    fn all_zero_is_an_error() {
        assert_eq!(wilcoxon_signed_rank(&pairs(&[0.0, 0.0]), WilcoxonMode::Auto), Err(AnalysisError::AllZero));
        assert_eq!(wilcoxon_signed_rank(&[], WilcoxonMode::Auto), Err(AnalysisError::NoPairs));
    }

    #[test]
    fn symmetric_differences_give_p_one() {
        let r = wilcoxon_signed_rank(&pairs(&[1.0, -1.0, 2.0, -2.0, 3.0, -3.0]), WilcoxonMode::Exact).unwrap();
        assert_eq!(r.w_statistic, 10.5);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn auto_switches_to_normal_for_large_n() {
        let d: Vec<f64> = (1..=30).map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 }).collect();
        let r = wilcoxon_signed_rank(&pairs(&d), WilcoxonMode::Auto).unwrap();
        assert_eq!(r.method, WilcoxonMethod::NormalApprox);
        assert!(matches!(
            wilcoxon_signed_rank(&pairs(&d), WilcoxonMode::Exact),
            Err(AnalysisError::ExactTooLarge { n: 30, .. })
        ));
    }

    #[test]
    fn normal_approx_is_close_to_exact_at_moderate_n() {
        let d: Vec<f64> = (1..=20).map(|i| if i % 4 == 0 { -(i as f64) } else { i as f64 }).collect();
        let exact = wilcoxon_signed_rank(&pairs(&d), WilcoxonMode::Exact).unwrap();
        let approx = wilcoxon_signed_rank(&pairs(&d), WilcoxonMode::NormalApprox).unwrap();
        assert_eq!(exact.w_statistic, approx.w_statistic);
        assert!((exact.p_value - approx.p_value).abs() < 0.01, "{} vs {}", exact.p_value, approx.p_value);
    }
}
