use serde::Serialize;

use super::{special, TestResult};
use crate::error::{Error, Result};

/// Largest sample with an exact null distribution; larger samples use the normal
/// approximation with tie correction.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// `statistic` is W = min(W+, W−).
    pub test: TestResult,
    pub w_plus: f64,
    pub w_minus: f64,
    pub n_used: usize,
    pub zeros_dropped: usize,
    pub exact: bool,
}

/// Average ranks of `values` (1-based), ties sharing the mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// P(W+ <= w) under the null for the given ranks, by counting all 2^n sign patterns.
/// Ranks are halves at worst, so doubled ranks index an integer table.
pub fn wilcoxon_exact_cdf(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut ways = vec![0u64; max + 1];
    ways[0] = 1;
    for &r in &doubled {
        for s in (r..=max).rev() {
            ways[s] += ways[s - r];
        }
    }
    let limit = (2.0 * w + 1e-9).floor() as usize;
    let hits: u64 = ways.iter().take(limit.min(max) + 1).sum();
    hits as f64 / (1u64 << ranks.len()) as f64
}

/// Two-tailed Wilcoxon signed-rank test on paired samples. Zero differences are dropped.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<WilcoxonResult> {
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|(a, b)| b - a)
        .filter(|d| *d != 0.0)
        .collect();
    let zeros_dropped = pairs.len() - diffs.len();
    if diffs.is_empty() {
        return Err(Error::Degenerate("all paired differences are zero".into()));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let n = diffs.len();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let w = w_plus.min(w_minus);

    let exact = n <= EXACT_MAX_N;
    let p = if exact {
        2.0 * wilcoxon_exact_cdf(&ranks, w)
    } else {
        let mut ties = 0.0;
        let mut sorted = abs.clone();
        sorted.sort_by(f64::total_cmp);
        for chunk in sorted.chunk_by(|a, b| a == b) {
            let t = chunk.len() as f64;
            ties += t * t * t - t;
        }
        let nf = n as f64;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
        let z = (w - total / 2.0) / var.sqrt();
        special::normal_two_tailed(z)
    };
    Ok(WilcoxonResult {
        test: TestResult::new("wilcoxon_signed_rank", w, p.min(1.0)),
        w_plus,
        w_minus,
        n_used: n,
        zeros_dropped,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Enumerate every sign pattern explicitly.
    fn enumeration_p(ranks: &[f64], w: f64) -> f64 {
        let n = ranks.len();
        let mut hits = 0u64;
        for mask in 0u64..1 << n {
            let wp: f64 = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| ranks[i])
                .sum();
            if wp <= w + 1e-9 {
                hits += 1;
            }
        }
        (2.0 * hits as f64 / (1u64 << n) as f64).min(1.0)
    }

    fn from_diffs(d: &[f64]) -> Vec<(f64, f64)> {
        d.iter().map(|&x| (0.0, x)).collect()
    }

    #[test]
    fn three_positive() {
        let r = wilcoxon_signed_rank(&from_diffs(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(r.test.statistic, 0.0);
        assert_eq!(r.test.p_value, 0.25);
        assert!(r.exact);
    }

    #[test]
    fn single_pair() {
        let r = wilcoxon_signed_rank(&[(3.0, 1.0)]).unwrap();
        assert_eq!(r.test.statistic, 0.0);
        assert_eq!(r.test.p_value, 1.0);
    }

    #[test]
    fn n8_w16() {
        let ranks: Vec<f64> = (1..=8).map(f64::from).collect();
        assert_eq!(2.0 * wilcoxon_exact_cdf(&ranks, 16.0), 216.0 / 256.0);
        // ranks 1,2,3,4,6 positive -> W+ = 16, W- = 20
        let r = wilcoxon_signed_rank(&from_diffs(&[1.0, 2.0, 3.0, 4.0, -5.0, 6.0, -7.0, -8.0]))
            .unwrap();
        assert_eq!((r.w_plus, r.w_minus), (16.0, 20.0));
        assert!((r.test.p_value - 0.8438).abs() < 1e-4);
    }

    #[test]
    fn zeros_and_ties() {
        let r = wilcoxon_signed_rank(&from_diffs(&[0.0, 1.0, -1.0, 2.0, 0.0])).unwrap();
        assert_eq!(r.zeros_dropped, 2);
        assert_eq!(r.n_used, 3);
        assert_eq!((r.w_plus, r.w_minus), (4.5, 1.5));
        assert!(matches!(
            wilcoxon_signed_rank(&from_diffs(&[0.0, 0.0])),
            Err(Error::Degenerate(_))
        ));
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), [3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn large_sample_normal() {
        let d: Vec<f64> = (1..=40)
            .map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 })
            .collect();
        let r = wilcoxon_signed_rank(&from_diffs(&d)).unwrap();
        assert!(!r.exact);
        let n = 40.0f64;
        let z = (r.test.statistic - n * (n + 1.0) / 4.0)
            / (n * (n + 1.0) * (2.0 * n + 1.0) / 24.0).sqrt();
        assert!((r.test.p_value - special::normal_two_tailed(z)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn exact_matches_enumeration(d in prop::collection::vec((-8i32..=8).prop_filter("nonzero", |x| *x != 0), 1..=12)) {
            let diffs: Vec<f64> = d.iter().map(|&x| x as f64).collect();
            let r = wilcoxon_signed_rank(&from_diffs(&diffs)).unwrap();
            let abs: Vec<f64> = diffs.iter().map(|x| x.abs()).collect();
            let want = enumeration_p(&average_ranks(&abs), r.test.statistic);
            prop_assert!((r.test.p_value - want).abs() < 1e-12);
        }

        #[test]
        fn symmetric_differences(half in prop::collection::vec(1u32..50, 1..6)) {
            let mut d: Vec<f64> = half.iter().map(|&x| x as f64).collect();
            d.extend(half.iter().map(|&x| -(x as f64)));
            let r = wilcoxon_signed_rank(&from_diffs(&d)).unwrap();
            prop_assert!(r.test.p_value >= 0.99);
        }
    }
}
