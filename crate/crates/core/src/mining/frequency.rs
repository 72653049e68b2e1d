//! Raw-count measures: category counts, ranks and agent acceptance.

use serde::Serialize;

use super::Scope;
use crate::error::{Error, Result};
use crate::model::{ActionCategory, Condition, Phase};
use crate::timeline::Session;

pub fn category_counts(sessions: &[Session], scope: Scope) -> [u64; ActionCategory::COUNT] {
    let mut counts = [0; ActionCategory::COUNT];
    for s in sessions.iter().filter(|s| scope.admits(s.key.condition)) {
        for a in &s.actions {
            if scope.phase.is_none_or(|p| a.phase == Some(p)) {
                counts[a.category.index()] += 1;
            }
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub category: ActionCategory,
    pub count: u64,
    pub share: f64,
    pub rank: usize,
}

/// All 11 categories by descending share; equal shares order by category name.
pub fn rank_actions(sessions: &[Session], scope: Scope) -> Vec<RankRow> {
    let counts = category_counts(sessions, scope);
    let total: u64 = counts.iter().sum();
    let mut rows: Vec<RankRow> = ActionCategory::ALL
        .iter()
        .map(|&c| {
            let count = counts[c.index()];
            let share = if total > 0 {
                count as f64 / total as f64
            } else {
                0.0
            };
            RankRow {
                category: c,
                count,
                share,
                rank: 0,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.category.name().cmp(b.category.name()))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Acceptance {
    pub phase: Option<Phase>,
    /// Agent-image creations right after an agent generation.
    pub accepted: u64,
    /// All creations right after an agent generation.
    pub creates_after_generation: u64,
}

impl Acceptance {
    /// Undefined when no creation followed a generation.
    pub fn rate(&self) -> Option<f64> {
        (self.creates_after_generation > 0)
            .then(|| self.accepted as f64 / self.creates_after_generation as f64)
    }
}

/// Share of agent-originated creations among creations immediately following an
/// `AgentGen`, in logged order within each session and task. A creation counts toward the
/// phase it falls in.
pub fn acceptance_rate(
    sessions: &[Session],
    condition: Condition,
    phase: Option<Phase>,
) -> Result<Acceptance> {
    if condition != Condition::AgentOrganizer {
        return Err(Error::WrongCondition(
            "acceptance rate is defined for the agent-organizer condition only",
        ));
    }
    let mut out = Acceptance {
        phase,
        accepted: 0,
        creates_after_generation: 0,
    };
    for s in sessions.iter().filter(|s| s.key.condition == condition) {
        for w in s.actions.windows(2) {
            let (prev, cur) = (&w[0], &w[1]);
            if prev.task != cur.task
                || prev.category != ActionCategory::AgentGen
                || cur.category != ActionCategory::Create
                || phase.is_some_and(|p| cur.phase != Some(p))
            {
                continue;
            }
            out.creates_after_generation += 1;
            if cur.subtype.agent_origin() {
                out.accepted += 1;
            }
        }
    }
    Ok(out)
}
