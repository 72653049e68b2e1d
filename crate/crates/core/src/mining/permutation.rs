//! Equal-weight expansion of co-timestamped actions whose true order is unknown.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DesignAction;

pub const DEFAULT_PAIR_CAP: usize = 10;
const STRICT_MAX_GROUP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationOptions {
    /// Enumerate all m! orders of a group with m <= 5 instead of m−1 adjacent swaps.
    pub strict: bool,
    /// Largest number of concurrent pairs expanded in one window.
    pub cap: usize,
}

impl Default for PermutationOptions {
    fn default() -> Self {
        PermutationOptions {
            strict: false,
            cap: DEFAULT_PAIR_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationExpansion<T> {
    pub orderings: Vec<(Vec<T>, f64)>,
}

impl<T> PermutationExpansion<T> {
    pub fn total_weight(&self) -> f64 {
        self.orderings.iter().map(|(_, w)| w).sum()
    }
}

/// Maximal runs of two or more adjacent actions that share a timestamp or an upstream
/// `concurrent_group` id, as index ranges into `actions`.
pub fn detect_concurrent_groups(actions: &[DesignAction]) -> Vec<Range<usize>> {
    let together = |a: &DesignAction, b: &DesignAction| {
        a.timestamp == b.timestamp
            || (a.concurrent_group.is_some() && a.concurrent_group == b.concurrent_group)
    };
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=actions.len() {
        if i == actions.len() || !together(&actions[i - 1], &actions[i]) {
            if i - start >= 2 {
                groups.push(start..i);
            }
            start = i;
        }
    }
    groups
}

/// Number of concurrent pairs a set of groups contributes.
pub fn pair_count(groups: &[Range<usize>]) -> usize {
    groups.iter().map(|g| g.len().saturating_sub(1)).sum()
}

/// Orders of `0..m` with their weights.
fn group_orders(m: usize, strict: bool) -> Vec<(Vec<usize>, f64)> {
    if strict && m <= STRICT_MAX_GROUP {
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..m).collect();
        permute(&mut perm, 0, &mut out);
        let w = 1.0 / out.len() as f64;
        return out.into_iter().map(|p| (p, w)).collect();
    }
    let pairs = m - 1;
    let w = 0.5f64.powi(pairs as i32);
    (0u32..1 << pairs)
        .map(|mask| {
            let mut order: Vec<usize> = (0..m).collect();
            for j in 0..pairs {
                if mask & (1 << j) != 0 {
                    order.swap(j, j + 1);
                }
            }
            (order, w)
        })
        .collect()
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Every ordering of `window` obtained by reordering inside each group, weighted so the
/// weights sum to 1. Groups must be disjoint ranges within the window.
pub fn expand_permutations<T: Copy>(
    window: &[T],
    groups: &[Range<usize>],
    options: &PermutationOptions,
) -> Result<PermutationExpansion<T>> {
    let pairs = pair_count(groups);
    if pairs > options.cap {
        return Err(Error::PermutationCap {
            pairs,
            cap: options.cap,
        });
    }
    let mut orderings = vec![(window.to_vec(), 1.0)];
    for g in groups.iter().filter(|g| g.len() >= 2) {
        let orders = group_orders(g.len(), options.strict);
        orderings = orderings
            .into_iter()
            .flat_map(|(seq, w)| {
                orders.iter().map(move |(order, gw)| {
                    let mut next = seq.clone();
                    for (slot, &src) in order.iter().enumerate() {
                        next[g.start + slot] = seq[g.start + src];
                    }
                    (next, w * gw)
                })
            })
            .collect();
    }
    Ok(PermutationExpansion { orderings })
}

#[cfg(test)]
#[allow(clippy::single_range_in_vec_init)]
mod tests {
    use super::*;
    use crate::model::{ActionCategory, Condition, Subtype};
    use proptest::prelude::*;

    #[test]
    fn worked_pair() {
        let e = expand_permutations(
            &['X', 'A', 'B', 'Y'],
            &[1..3],
            &PermutationOptions::default(),
        )
        .unwrap();
        assert_eq!(
            e.orderings,
            vec![
                (vec!['X', 'A', 'B', 'Y'], 0.5),
                (vec!['X', 'B', 'A', 'Y'], 0.5)
            ]
        );
    }

    #[test]
    fn no_pairs_is_identity() {
        let e = expand_permutations(&[1, 2, 3], &[], &PermutationOptions::default()).unwrap();
        assert_eq!(e.orderings, vec![(vec![1, 2, 3], 1.0)]);
    }

    #[test]
    fn two_pairs_four_orderings() {
        let e = expand_permutations(&[1, 2, 3, 4], &[0..2, 2..4], &PermutationOptions::default())
            .unwrap();
        assert_eq!(e.orderings.len(), 4);
        assert!(e.orderings.iter().all(|(_, w)| *w == 0.25));
    }

    #[test]
    fn triple_uses_two_adjacent_pairs() {
        let e =
            expand_permutations(&['A', 'B', 'C'], &[0..3], &PermutationOptions::default()).unwrap();
        let seqs: Vec<String> = e
            .orderings
            .iter()
            .map(|(s, _)| s.iter().collect())
            .collect();
        assert_eq!(seqs, ["ABC", "BAC", "ACB", "BCA"]);
        assert_eq!(e.total_weight(), 1.0);
    }

    #[test]
    fn strict_mode_full_factorial() {
        let opts = PermutationOptions {
            strict: true,
            ..Default::default()
        };
        let e = expand_permutations(&['A', 'B', 'C'], &[0..3], &opts).unwrap();
        assert_eq!(e.orderings.len(), 6);
        let mut seqs: Vec<String> = e
            .orderings
            .iter()
            .map(|(s, _)| s.iter().collect())
            .collect();
        seqs.sort();
        seqs.dedup();
        assert_eq!(seqs.len(), 6);
        assert!((e.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_enforced() {
        let opts = PermutationOptions {
            cap: 2,
            ..Default::default()
        };
        let items = [0; 8];
        assert!(matches!(
            expand_permutations(&items, &[0..2, 2..4, 4..6], &opts),
            Err(Error::PermutationCap { pairs: 3, cap: 2 })
        ));
    }

    fn at(ts: i64) -> DesignAction {
        DesignAction::new(
            "D",
            Condition::Baseline,
            "t",
            ts,
            Subtype::system(ActionCategory::PromptGen).unwrap(),
        )
    }

    #[test]
    fn grouping() {
        assert!(detect_concurrent_groups(&[at(1), at(2), at(3)]).is_empty());
        assert_eq!(detect_concurrent_groups(&[at(1000), at(1000)]), vec![0..2]);
        let g = detect_concurrent_groups(&[at(0), at(1000), at(1000), at(1000), at(5)]);
        assert_eq!(g, vec![1..4]);
        assert_eq!(pair_count(&g), 2);
        let mut linked = vec![at(1), at(2)];
        linked[0].concurrent_group = Some(7);
        linked[1].concurrent_group = Some(7);
        assert_eq!(detect_concurrent_groups(&linked), vec![0..2]);
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(sizes in prop::collection::vec(1usize..5, 0..5), strict in any::<bool>()) {
            let mut groups = Vec::new();
            let mut pos = 0;
            for m in &sizes {
                groups.push(pos..pos + m);
                pos += m + 1;
            }
            let window: Vec<usize> = (0..pos).collect();
            let opts = PermutationOptions { strict, cap: 16 };
            let e = expand_permutations(&window, &groups, &opts).unwrap();
            prop_assert!((e.total_weight() - 1.0).abs() < 1e-12);
            if !strict {
                prop_assert_eq!(e.orderings.len(), 1usize << pair_count(&groups));
            }
            for (seq, _) in &e.orderings {
                let mut sorted = seq.clone();
                sorted.sort();
                prop_assert_eq!(&sorted, &window);
            }
        }
    }
}
