use serde::Serialize;

use super::ngram::extract_ngrams;
use super::{MiningOptions, Scope};
use crate::error::Result;
use crate::model::ActionCategory;
use crate::timeline::Session;

const K: usize = ActionCategory::COUNT;

/// First-order transitions over the 11 categories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    pub scope: Scope,
    /// Weighted transition counts, `counts[from][to]`.
    pub counts: [[f64; K]; K],
    pub support: [f64; K],
}

impl TransitionMatrix {
    pub fn from_counts(scope: Scope, counts: [[f64; K]; K]) -> TransitionMatrix {
        let support = counts.map(|row| row.iter().sum());
        TransitionMatrix {
            scope,
            counts,
            support,
        }
    }

    /// `None` when the row has no support.
    pub fn p(&self, from: ActionCategory, to: ActionCategory) -> Option<f64> {
        self.row(from).map(|r| r[to.index()])
    }

    pub fn row(&self, from: ActionCategory) -> Option<[f64; K]> {
        let i = from.index();
        let s = self.support[i];
        (s > 0.0).then(|| self.counts[i].map(|c| c / s))
    }

    /// All rows, undefined ones as `None`.
    pub fn probabilities(&self) -> [Option<[f64; K]>; K] {
        ActionCategory::ALL.map(|c| self.row(c))
    }
}

/// Row-normalized weighted bigram counts. Transitions stay within designer, condition,
/// task, segment and (for a phase scope) phase.
pub fn build_markov(
    sessions: &[Session],
    scope: Scope,
    options: &MiningOptions,
) -> Result<TransitionMatrix> {
    let options = MiningOptions {
        phase_bounded: true,
        ..*options
    };
    let bigrams = extract_ngrams(sessions, 2, scope, &options)?;
    let mut counts = [[0.0; K]; K];
    for (k, w) in &bigrams.weights {
        counts[k[0].index()][k[1].index()] += w;
    }
    Ok(TransitionMatrix::from_counts(scope, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Condition, DesignAction, Subtype};
    use crate::timeline::{sessionize, TimelineBasis, DEFAULT_GAP_CUTOFF_MS};
    use ActionCategory::*;

    fn sessions(designer: &str, cats: &[ActionCategory]) -> Vec<DesignAction> {
        cats.iter()
            .enumerate()
            .map(|(i, &c)| {
                let st = Subtype::vocabulary()
                    .iter()
                    .copied()
                    .find(|s| s.category() == c)
                    .unwrap();
                DesignAction::new(
                    designer,
                    Condition::AgentOrganizer,
                    "t",
                    i as i64 * 1000,
                    st,
                )
            })
            .collect()
    }

    fn markov(acts: Vec<DesignAction>) -> TransitionMatrix {
        let s = sessionize(acts, DEFAULT_GAP_CUTOFF_MS, &TimelineBasis::Actions).unwrap();
        build_markov(
            &s,
            Scope::condition(Condition::AgentOrganizer),
            &MiningOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn self_loop() {
        let m = markov(sessions("D", &[Relocate; 5]));
        assert_eq!(m.p(Relocate, Relocate), Some(1.0));
        assert_eq!(m.p(Create, Relocate), None);
        assert_eq!(m.support[Relocate.index()], 4.0);
    }

    #[test]
    fn alternating() {
        let m = markov(sessions("D", &[Create, Relate, Create, Relate]));
        assert_eq!(m.p(Create, Relate), Some(1.0));
        assert_eq!(m.p(Relate, Create), Some(1.0));
        assert_eq!(m.p(Create, Create), Some(0.0));
    }

    #[test]
    fn designers_do_not_bridge() {
        let mut acts = sessions("D1", &[Create, Create]);
        acts.extend(sessions("D2", &[Prune, Prune]));
        let m = markov(acts);
        assert_eq!(m.p(Create, Prune), Some(0.0));
        assert_eq!(m.p(Create, Create), Some(1.0));
        assert_eq!(m.p(Prune, Prune), Some(1.0));
    }
}
