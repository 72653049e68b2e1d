use std::collections::BTreeMap;
use std::ops::{AddAssign, Range};

use serde::Serialize;

use super::permutation::{detect_concurrent_groups, expand_permutations, PermutationOptions};
use super::{runs, MiningOptions, Scope};
use crate::error::{Error, Result};
use crate::model::ActionCategory;
use crate::timeline::Session;

/// Permutation-weighted counts of category n-tuples in one scope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedNGramTable {
    pub n: usize,
    pub scope: Scope,
    pub weights: BTreeMap<Vec<ActionCategory>, f64>,
    /// Windows whose concurrent pairs exceeded the cap and were left out.
    pub skipped_windows: u64,
    pub diagnostics: Vec<String>,
}

impl WeightedNGramTable {
    pub fn new(n: usize, scope: Scope) -> WeightedNGramTable {
        WeightedNGramTable {
            n,
            scope,
            weights: BTreeMap::new(),
            skipped_windows: 0,
            diagnostics: Vec::new(),
        }
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn weight(&self, tuple: &[ActionCategory]) -> f64 {
        self.weights.get(tuple).copied().unwrap_or(0.0)
    }

    pub fn share(&self, tuple: &[ActionCategory]) -> f64 {
        let total = self.total();
        if total > 0.0 {
            self.weight(tuple) / total
        } else {
            0.0
        }
    }

    /// Rows by descending weight, ties in tuple order.
    pub fn ranked(&self) -> Vec<(&Vec<ActionCategory>, f64)> {
        let mut rows: Vec<_> = self.weights.iter().map(|(k, &w)| (k, w)).collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        rows
    }
}

impl AddAssign<&WeightedNGramTable> for WeightedNGramTable {
    fn add_assign(&mut self, other: &WeightedNGramTable) {
        for (k, w) in &other.weights {
            *self.weights.entry(k.clone()).or_insert(0.0) += w;
        }
        self.skipped_windows += other.skipped_windows;
        self.diagnostics.extend(other.diagnostics.iter().cloned());
    }
}

/// Add the expected n-gram counts of one run into `table`. `include(i)` says whether a
/// window starting at position `i` belongs to the scope.
pub(crate) fn accumulate_run(
    table: &mut WeightedNGramTable,
    cats: &[ActionCategory],
    groups: &[Range<usize>],
    options: &PermutationOptions,
    include: impl Fn(usize) -> bool,
) {
    let n = table.n;
    if cats.len() < n {
        return;
    }
    for p in 0..=cats.len() - n {
        if !include(p) {
            continue;
        }
        let window = p..p + n;
        let touching: Vec<&Range<usize>> = groups
            .iter()
            .filter(|g| g.start < window.end && window.start < g.end)
            .collect();
        if touching.is_empty() {
            *table.weights.entry(cats[window].to_vec()).or_insert(0.0) += 1.0;
            continue;
        }
        let lo = touching
            .iter()
            .map(|g| g.start)
            .min()
            .expect("non-empty")
            .min(p);
        let hi = touching
            .iter()
            .map(|g| g.end)
            .max()
            .expect("non-empty")
            .max(p + n);
        let local: Vec<Range<usize>> = touching.iter().map(|g| g.start - lo..g.end - lo).collect();
        match expand_permutations(&cats[lo..hi], &local, options) {
            Ok(expansion) => {
                for (seq, w) in expansion.orderings {
                    *table
                        .weights
                        .entry(seq[p - lo..p - lo + n].to_vec())
                        .or_insert(0.0) += w;
                }
            }
            Err(e) => {
                table.skipped_windows += 1;
                table
                    .diagnostics
                    .push(format!("window at position {p}: {e}"));
            }
        }
    }
}

/// Sliding-window n-grams (n = 2 or 3) within each session run, permutation-weighted.
///
/// Runs never cross designers, conditions, tasks or active-time segments. With a phase in
/// the scope and `phase_bounded` set they also stop at phase changes; otherwise a window
/// belongs to the phase of its first action.
pub fn extract_ngrams(
    sessions: &[Session],
    n: usize,
    scope: Scope,
    options: &MiningOptions,
) -> Result<WeightedNGramTable> {
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "n-gram length must be 2 or 3, got {n}"
        )));
    }
    let mut table = WeightedNGramTable::new(n, scope);
    let split_phases = scope.phase.is_some() && options.phase_bounded;
    for s in sessions.iter().filter(|s| scope.admits(s.key.condition)) {
        for run in runs(s, split_phases) {
            let acts = &s.actions[run];
            let cats: Vec<ActionCategory> = acts.iter().map(|a| a.category).collect();
            let groups = detect_concurrent_groups(acts);
            accumulate_run(&mut table, &cats, &groups, &options.permutation, |p| {
                scope.phase.is_none_or(|ph| acts[p].phase == Some(ph))
            });
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Condition, DesignAction, Phase, Subtype};
    use crate::timeline::{sessionize, TimelineBasis, DEFAULT_GAP_CUTOFF_MS};
    use ActionCategory::*;

    fn subtype(c: ActionCategory) -> Subtype {
        Subtype::vocabulary()
            .iter()
            .copied()
            .find(|s| s.category() == c)
            .unwrap()
    }

    fn seq(cats: &[(ActionCategory, i64)]) -> Vec<Session> {
        let acts = cats
            .iter()
            .map(|&(c, ts)| DesignAction::new("D", Condition::Baseline, "t", ts, subtype(c)))
            .collect();
        sessionize(acts, DEFAULT_GAP_CUTOFF_MS, &TimelineBasis::Actions).unwrap()
    }

    fn table(sessions: &[Session], n: usize) -> WeightedNGramTable {
        extract_ngrams(
            sessions,
            n,
            Scope::condition(Condition::Baseline),
            &MiningOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn repeated_create() {
        let t = table(&seq(&[(Create, 0), (Create, 1), (Create, 2)]), 2);
        assert_eq!(t.weight(&[Create, Create]), 2.0);
        assert_eq!(t.share(&[Create, Create]), 1.0);
        let t3 = table(&seq(&[(Create, 0), (Create, 1), (Create, 2)]), 3);
        assert_eq!(t3.weight(&[Create, Create, Create]), 1.0);
    }

    #[test]
    fn concurrent_pair_bigrams() {
        let (x, a, b, y) = (Prune, Create, Elaborate, Relocate);
        let t = table(&seq(&[(x, 0), (a, 1000), (b, 1000), (y, 2000)]), 2);
        let want = [[x, a], [x, b], [a, b], [b, a], [a, y], [b, y]];
        assert_eq!(t.weights.len(), 6);
        for k in want {
            assert_eq!(t.weight(&k), 0.5, "{k:?}");
        }
        assert_eq!(t.total(), 3.0);
    }

    #[test]
    fn concurrent_pair_trigrams() {
        let (x, a, b, y) = (Prune, Create, Elaborate, Relocate);
        let t = table(&seq(&[(x, 0), (a, 1000), (b, 1000), (y, 2000)]), 3);
        assert_eq!(t.total(), 2.0);
        for k in [[x, a, b], [x, b, a], [a, b, y], [b, a, y]] {
            assert_eq!(t.weight(&k), 0.5);
        }
    }

    #[test]
    fn bad_n_and_empty() {
        let s = seq(&[(Create, 0)]);
        assert!(extract_ngrams(&s, 4, Scope::all(), &MiningOptions::default()).is_err());
        assert!(table(&s, 2).weights.is_empty());
        assert!(table(&[], 3).weights.is_empty());
    }

    #[test]
    fn segments_and_tasks_break_runs() {
        let min = 60_000;
        let t = table(
            &seq(&[(Create, 0), (Relocate, 40 * min), (Relocate, 41 * min)]),
            2,
        );
        assert_eq!(t.weight(&[Create, Relocate]), 0.0);
        assert_eq!(t.total(), 1.0);

        let mut acts: Vec<DesignAction> = [0, 1]
            .iter()
            .map(|&ts| DesignAction::new("D", Condition::Baseline, "a", ts, subtype(Create)))
            .collect();
        acts[1].task = "b".into();
        let s = sessionize(acts, DEFAULT_GAP_CUTOFF_MS, &TimelineBasis::Actions).unwrap();
        assert_eq!(table(&s, 2).total(), 0.0);
    }

    #[test]
    fn phase_scope() {
        let s = seq(&[(Create, 0), (Create, 10), (Relocate, 20), (Relocate, 30)]);
        let phases: Vec<_> = s[0].actions.iter().map(|a| a.phase.unwrap()).collect();
        assert_eq!(
            phases,
            [Phase::Early, Phase::Early, Phase::Mid, Phase::Late]
        );
        let scope = Scope {
            condition: Some(Condition::Baseline),
            phase: Some(Phase::Early),
        };
        let bounded = extract_ngrams(&s, 2, scope, &MiningOptions::default()).unwrap();
        assert_eq!(bounded.total(), 1.0);
        let opts = MiningOptions {
            phase_bounded: false,
            ..Default::default()
        };
        let open = extract_ngrams(&s, 2, scope, &opts).unwrap();
        assert_eq!(open.weight(&[Create, Relocate]), 1.0);
        assert_eq!(open.total(), 2.0);
    }

    #[test]
    fn cap_skips_window() {
        let cats: Vec<(ActionCategory, i64)> = (0..5).map(|_| (Create, 7)).collect();
        let s = seq(&cats);
        let opts = MiningOptions {
            permutation: PermutationOptions {
                cap: 2,
                strict: false,
            },
            ..Default::default()
        };
        let t = extract_ngrams(&s, 2, Scope::all(), &opts).unwrap();
        assert_eq!(t.skipped_windows, 4);
        assert_eq!(t.diagnostics.len(), 4);
        assert_eq!(t.total(), 0.0);
    }
}
