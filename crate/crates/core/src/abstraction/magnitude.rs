//! Quartile thresholds and magnitude quantization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActionCategory, DesignAction, Magnitude};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartileTriple {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl QuartileTriple {
    pub fn new(q1: f64, q2: f64, q3: f64) -> Result<QuartileTriple> {
        let t = QuartileTriple { q1, q2, q3 };
        if !(q1 > 0.0 && q1 <= q2 && q2 <= q3 && q3.is_finite()) {
            return Err(Error::InvalidThresholds(format!(
                "need 0 < Q1 <= Q2 <= Q3, got {t:?}"
            )));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Euclidean displacement, px.
    pub relocate: QuartileTriple,
    /// |character change|.
    pub elaborate: QuartileTriple,
}

impl Thresholds {
    /// Pooled pilot values: displacement (87, 302, 871) px, text (3, 12, 50) characters.
    pub fn paper() -> Thresholds {
        Thresholds {
            relocate: QuartileTriple {
                q1: 87.0,
                q2: 302.0,
                q3: 871.0,
            },
            elaborate: QuartileTriple {
                q1: 3.0,
                q2: 12.0,
                q3: 50.0,
            },
        }
    }

    /// Quartiles of the raw magnitudes carried by Relocate and Elaborate actions.
    /// A class with no samples keeps its `fallback` triple.
    pub fn recompute(actions: &[DesignAction], fallback: &Thresholds) -> Result<Thresholds> {
        let samples = |cat: ActionCategory| -> Vec<f64> {
            actions
                .iter()
                .filter(|a| a.category == cat)
                .filter_map(|a| a.raw_magnitude)
                .collect()
        };
        let triple = |values: Vec<f64>, fb: QuartileTriple| -> Result<QuartileTriple> {
            if values.is_empty() {
                return Ok(fb);
            }
            let (q1, q2, q3) = compute_quartiles(&values)?;
            QuartileTriple::new(q1, q2, q3)
        };
        Ok(Thresholds {
            relocate: triple(samples(ActionCategory::Relocate), fallback.relocate)?,
            elaborate: triple(samples(ActionCategory::Elaborate), fallback.elaborate)?,
        })
    }

    /// Re-bucket Relocate/Elaborate actions from their raw magnitudes.
    pub fn requantize(&self, actions: &mut [DesignAction]) -> Result<()> {
        for a in actions.iter_mut() {
            let triple = match a.category {
                ActionCategory::Relocate => &self.relocate,
                ActionCategory::Elaborate => &self.elaborate,
                _ => continue,
            };
            if let Some(v) = a.raw_magnitude {
                let subtype = a.subtype.with_magnitude(quantize_magnitude(v, triple))?;
                a.set_subtype(subtype);
            }
        }
        Ok(())
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::paper()
    }
}

/// Inclusive linear-interpolation quartiles: position q·(n−1) over the sorted values.
pub fn compute_quartiles(values: &[f64]) -> Result<(f64, f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("quartiles of an empty sample"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "quartiles of non-finite values".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    };
    Ok((at(0.25), at(0.5), at(0.75)))
}

/// Upper bounds are inclusive: `value <= Q1` is Micro, `Q3 < value` is Large.
pub fn quantize_magnitude(value: f64, triple: &QuartileTriple) -> Magnitude {
    if value <= triple.q1 {
        Magnitude::Micro
    } else if value <= triple.q2 {
        Magnitude::Small
    } else if value <= triple.q3 {
        Magnitude::Medium
    } else {
        Magnitude::Large
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: sort, then interpolate between neighbouring order statistics
    /// using integer/fraction parts of h = (n - 1) p.
    fn oracle(values: &[f64], p: f64) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = (v.len() as f64 - 1.0) * p;
        let i = h as usize;
        if i + 1 >= v.len() {
            return v[v.len() - 1];
        }
        v[i] + (h - i as f64) * (v[i + 1] - v[i])
    }

    #[test]
    fn constant_sample() {
        assert_eq!(compute_quartiles(&[10.0; 7]).unwrap(), (10.0, 10.0, 10.0));
    }

    #[test]
    fn one_to_five() {
        assert_eq!(
            compute_quartiles(&[5.0, 1.0, 4.0, 2.0, 3.0]).unwrap(),
            (2.0, 3.0, 4.0)
        );
    }

    #[test]
    fn empty_rejected() {
        assert!(compute_quartiles(&[]).is_err());
    }

    #[test]
    fn paper_defaults() {
        let t = Thresholds::paper();
        assert_eq!(
            (t.relocate.q1, t.relocate.q2, t.relocate.q3),
            (87.0, 302.0, 871.0)
        );
        assert_eq!(
            (t.elaborate.q1, t.elaborate.q2, t.elaborate.q3),
            (3.0, 12.0, 50.0)
        );
    }

    #[test]
    fn paper_interval_boundaries() {
        let r = Thresholds::paper().relocate;
        assert_eq!(quantize_magnitude(87.0, &r), Magnitude::Micro);
        assert_eq!(quantize_magnitude(88.0, &r), Magnitude::Small);
        assert_eq!(quantize_magnitude(100.0, &r), Magnitude::Small);
        assert_eq!(quantize_magnitude(302.0, &r), Magnitude::Small);
        assert_eq!(quantize_magnitude(303.0, &r), Magnitude::Medium);
        assert_eq!(quantize_magnitude(871.0, &r), Magnitude::Medium);
        assert_eq!(quantize_magnitude(872.0, &r), Magnitude::Large);
        let e = Thresholds::paper().elaborate;
        assert_eq!(quantize_magnitude(3.0, &e), Magnitude::Micro);
        assert_eq!(quantize_magnitude(4.0, &e), Magnitude::Small);
        assert_eq!(quantize_magnitude(13.0, &e), Magnitude::Medium);
        assert_eq!(quantize_magnitude(51.0, &e), Magnitude::Large);
    }

    #[test]
    fn invalid_triples() {
        assert!(QuartileTriple::new(0.0, 1.0, 2.0).is_err());
        assert!(QuartileTriple::new(3.0, 2.0, 4.0).is_err());
        assert!(QuartileTriple::new(1.0, 1.0, 1.0).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn quartiles_match_oracle(values in prop::collection::vec(0.001f64..1e5, 1..200)) {
            let (q1, q2, q3) = compute_quartiles(&values).unwrap();
            for (got, p) in [(q1, 0.25), (q2, 0.5), (q3, 0.75)] {
                let want = oracle(&values, p);
                prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
            }
            prop_assert!(q1 <= q2 && q2 <= q3);
        }

        #[test]
        fn boundaries_fall_in_adjacent_buckets(q1 in 0.5f64..100.0, d2 in 0.5f64..100.0, d3 in 0.5f64..100.0) {
            let t = QuartileTriple::new(q1, q1 + d2, q1 + d2 + d3).unwrap();
            let levels = Magnitude::LEVELS;
            for (i, b) in [t.q1, t.q2, t.q3].into_iter().enumerate() {
                let eps = b * 1e-9;
                prop_assert_eq!(quantize_magnitude(b, &t), levels[i]);
                prop_assert_eq!(quantize_magnitude(b + eps, &t), levels[i + 1]);
            }
        }
    }
}
