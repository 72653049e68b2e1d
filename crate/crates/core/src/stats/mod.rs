//! Chi-square with residuals, two-proportion Z and Wilcoxon signed-rank tests.

mod contingency;
pub mod special;
mod wilcoxon;

use serde::Serialize;

pub use contingency::{
    chi_square, cramers_v, standardized_residuals, ContingencyTable, ResidualKind,
};
pub use wilcoxon::{wilcoxon_exact_cdf, wilcoxon_signed_rank, WilcoxonResult, EXACT_MAX_N};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub df: Option<u64>,
    pub p_value: f64,
    /// Cramér's V for contingency tests.
    pub effect_size: Option<f64>,
    /// Per-cell residuals, `[row][col]`.
    pub per_cell_z: Option<Vec<Vec<f64>>>,
}

impl TestResult {
    fn new(name: &str, statistic: f64, p_value: f64) -> TestResult {
        TestResult {
            name: name.into(),
            statistic,
            df: None,
            p_value: p_value.clamp(0.0, 1.0),
            effect_size: None,
            per_cell_z: None,
        }
    }
}

/// Pooled two-proportion Z test of `p2` against `p1`, no continuity correction.
/// Sample sizes may be fractional (weighted counts).
pub fn two_proportion_z(p1: f64, n1: f64, p2: f64, n2: f64) -> Result<TestResult> {
    if !(n1 > 0.0 && n2 > 0.0) || !(0.0..=1.0).contains(&p1) || !(0.0..=1.0).contains(&p2) {
        return Err(Error::InvalidArgument(format!(
            "two-proportion test needs n > 0 and p in [0,1]: {p1} {n1} {p2} {n2}"
        )));
    }
    let pooled = (p1 * n1 + p2 * n2) / (n1 + n2);
    if pooled <= 0.0 || pooled >= 1.0 {
        return Err(Error::Degenerate("pooled proportion is 0 or 1".into()));
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    let z = (p2 - p1) / se;
    Ok(TestResult::new(
        "two_proportion_z",
        z,
        special::normal_two_tailed(z),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_proportions() {
        let r = two_proportion_z(0.3, 50.0, 0.3, 80.0).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(
            two_proportion_z(0.5, 100.0, 0.5, 1.0).unwrap().statistic,
            0.0
        );
    }

    #[test]
    fn hand_computed() {
        // pooled 0.5, se = sqrt(0.25 * 0.02) = 0.0707107
        let r = two_proportion_z(0.4, 100.0, 0.6, 100.0).unwrap();
        assert!((r.statistic - 2.828_427_124_746_19).abs() < 1e-9);
    }

    #[test]
    fn degenerate_and_invalid() {
        assert!(matches!(
            two_proportion_z(0.0, 10.0, 0.0, 10.0),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            two_proportion_z(1.0, 10.0, 1.0, 10.0),
            Err(Error::Degenerate(_))
        ));
        assert!(two_proportion_z(0.5, 0.0, 0.5, 10.0).is_err());
        assert!(two_proportion_z(1.5, 10.0, 0.5, 10.0).is_err());
    }

    proptest! {
        #[test]
        fn antisymmetric(p1 in 0.01f64..0.99, p2 in 0.01f64..0.99, n1 in 1.0f64..1e5, n2 in 1.0f64..1e5) {
            let a = two_proportion_z(p1, n1, p2, n2).unwrap();
            let b = two_proportion_z(p2, n2, p1, n1).unwrap();
            prop_assert_eq!(a.statistic, -b.statistic);
            prop_assert_eq!(a.p_value, b.p_value);
        }
    }
}
