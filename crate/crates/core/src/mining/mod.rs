//! Sequential pattern mining over sessionized actions.

mod frequency;
mod markov;
mod ngram;
mod permutation;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use frequency::{acceptance_rate, category_counts, rank_actions, Acceptance, RankRow};
pub use markov::{build_markov, TransitionMatrix};
pub use ngram::{extract_ngrams, WeightedNGramTable};
pub use permutation::{
    detect_concurrent_groups, expand_permutations, pair_count, PermutationExpansion,
    PermutationOptions, DEFAULT_PAIR_CAP,
};

use crate::model::{Condition, Phase};
use crate::timeline::Session;

/// Which actions a table covers. `None` means all conditions or all phases.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct Scope {
    pub condition: Option<Condition>,
    pub phase: Option<Phase>,
}

impl Scope {
    pub fn all() -> Scope {
        Scope::default()
    }

    pub fn condition(condition: Condition) -> Scope {
        Scope {
            condition: Some(condition),
            phase: None,
        }
    }

    pub fn phase(condition: Condition, phase: Phase) -> Scope {
        Scope {
            condition: Some(condition),
            phase: Some(phase),
        }
    }

    pub fn admits(&self, condition: Condition) -> bool {
        self.condition.is_none_or(|c| c == condition)
    }

    /// `baseline/early`, `agent_organizer/all`, ...
    pub fn label(&self) -> String {
        format!(
            "{}/{}",
            self.condition.map_or("all", |c| c.token()),
            self.phase.map_or("all", |p| p.token())
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiningOptions {
    pub permutation: PermutationOptions,
    /// Phase-scoped n-grams stop at phase changes.
    pub phase_bounded: bool,
}

impl Default for MiningOptions {
    fn default() -> Self {
        MiningOptions {
            permutation: PermutationOptions::default(),
            phase_bounded: true,
        }
    }
}

/// Maximal index ranges of a session within one task and one active segment, and
/// optionally one phase.
pub fn runs(session: &Session, split_phases: bool) -> Vec<Range<usize>> {
    let acts = &session.actions;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=acts.len() {
        let cut = i == acts.len()
            || acts[i].task != acts[i - 1].task
            || session.segments[i] != session.segments[i - 1]
            || (split_phases && acts[i].phase != acts[i - 1].phase);
        if cut {
            out.push(start..i);
            start = i;
        }
    }
    out
}
