//! Step-1 event cleaning with per-class exclusion bookkeeping.

use std::collections::{BTreeMap, HashMap};
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::ingest::{ArtifactState, EventKind, EventStream, RawEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start_ms: i64,
    pub end_ms: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleaningConfig {
    /// Inactivity that ends a typing burst.
    pub typing_window_ms: i64,
    /// How long after a deletion an identical re-appearance is treated as a logging artefact.
    pub reappear_window_ms: i64,
    /// Event tags dropped as system noise.
    pub noise_codes: Vec<String>,
    /// Event tags dropped as out-of-scope protocol records.
    pub protocol_codes: Vec<String>,
    /// Allowed time window per task; events of that task outside it are out of scope.
    pub task_windows: BTreeMap<String, TimeWindow>,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            typing_window_ms: 5_000,
            reappear_window_ms: 10_000,
            noise_codes: vec!["auto_save".into(), "internal_update".into()],
            protocol_codes: vec!["interview".into(), "protocol_violation".into()],
            task_windows: BTreeMap::new(),
        }
    }
}

/// The abstraction funnel.
///
/// `raw_total = clean_total + protocol + noise + duplicates + typing + reappear` and
/// `clean_total = action_total + non_significant`, where `action_total` counts clean
/// events that produced at least one action. A snapshot that both moves and edits an
/// artifact yields two actions; the second is counted in `co_emitted`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub raw_total: u64,
    pub protocol_out_of_scope: u64,
    pub system_noise: u64,
    pub duplicates_no_change: u64,
    pub typing_consolidated: u64,
    pub post_delete_reappear: u64,
    pub clean_total: u64,
    pub non_significant: u64,
    pub action_total: u64,
    pub co_emitted: u64,
}

impl ExclusionReport {
    pub fn cleaning_exclusions(&self) -> u64 {
        self.protocol_out_of_scope
            + self.system_noise
            + self.duplicates_no_change
            + self.typing_consolidated
            + self.post_delete_reappear
    }

    pub fn emitted_actions(&self) -> u64 {
        self.action_total + self.co_emitted
    }

    /// Both funnel identities hold.
    pub fn is_consistent(&self) -> bool {
        self.raw_total == self.clean_total + self.cleaning_exclusions()
            && self.clean_total == self.action_total + self.non_significant
    }
}

impl AddAssign for ExclusionReport {
    fn add_assign(&mut self, o: Self) {
        self.raw_total += o.raw_total;
        self.protocol_out_of_scope += o.protocol_out_of_scope;
        self.system_noise += o.system_noise;
        self.duplicates_no_change += o.duplicates_no_change;
        self.typing_consolidated += o.typing_consolidated;
        self.post_delete_reappear += o.post_delete_reappear;
        self.clean_total += o.clean_total;
        self.non_significant += o.non_significant;
        self.action_total += o.action_total;
        self.co_emitted += o.co_emitted;
    }
}

impl std::iter::Sum for ExclusionReport {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut total = ExclusionReport::default();
        for r in iter {
            total += r;
        }
        total
    }
}

struct Tracked {
    state: ArtifactState,
    /// (deletion time, last live state) for the most recent deletion.
    deleted: Option<(i64, ArtifactState)>,
}

struct Pending {
    kept_index: usize,
    artifact_id: String,
    timestamp: i64,
}

/// Only the text differs.
fn is_pure_text_edit(prev: &ArtifactState, curr: &ArtifactState) -> bool {
    prev.text != curr.text
        && ArtifactState {
            text: prev.text.clone(),
            ..curr.clone()
        } == *prev
}

/// Apply the cleaning rules in order: protocol scope, system noise, duplicates,
/// typing-burst consolidation, post-delete reappearance.
///
/// A typing burst is a run of consecutive kept events that are pure text edits of the
/// same artifact, each within `typing_window_ms` of the previous one; only its last
/// snapshot survives. Removed protocol/noise events do not interrupt a burst.
pub fn clean_events(
    stream: &EventStream,
    config: &CleaningConfig,
) -> (EventStream, ExclusionReport) {
    let mut report = ExclusionReport {
        raw_total: stream.events.len() as u64,
        ..Default::default()
    };
    let mut kept: Vec<RawEvent> = Vec::with_capacity(stream.events.len());
    let mut tracked: HashMap<String, Tracked> = HashMap::new();
    let mut pending: Option<Pending> = None;

    let has_code = |codes: &[String], ev: &RawEvent| {
        ev.tag
            .as_ref()
            .is_some_and(|t| codes.iter().any(|c| c == t))
    };

    for ev in &stream.events {
        let outside_window = config
            .task_windows
            .get(&ev.task)
            .is_some_and(|w| ev.timestamp < w.start_ms || ev.timestamp > w.end_ms);
        if outside_window || has_code(&config.protocol_codes, ev) {
            report.protocol_out_of_scope += 1;
            continue;
        }
        if has_code(&config.noise_codes, ev) {
            report.system_noise += 1;
            continue;
        }

        let (EventKind::StateSnapshot, Some(id), Some(state)) =
            (ev.event_kind, &ev.artifact_id, &ev.state)
        else {
            pending = None;
            kept.push(ev.clone());
            continue;
        };

        let prev = tracked.get(id);
        if prev.is_some_and(|t| t.state == *state) {
            report.duplicates_no_change += 1;
            continue;
        }
        if let Some(Tracked {
            state: prev_state,
            deleted: Some((t_del, before)),
        }) = prev
        {
            if prev_state.deleted
                && !state.deleted
                && ev.timestamp - t_del <= config.reappear_window_ms
                && state == before
            {
                report.post_delete_reappear += 1;
                continue;
            }
        }

        let text_edit =
            prev.is_some_and(|t| !t.state.deleted && is_pure_text_edit(&t.state, state));
        let continues_burst = text_edit
            && pending.as_ref().is_some_and(|p| {
                p.artifact_id == *id && ev.timestamp - p.timestamp <= config.typing_window_ms
            });
        if continues_burst {
            let p = pending.take().expect("burst has a pending snapshot");
            kept[p.kept_index] = ev.clone();
            report.typing_consolidated += 1;
            pending = Some(Pending {
                timestamp: ev.timestamp,
                ..p
            });
        } else {
            kept.push(ev.clone());
            pending = text_edit.then(|| Pending {
                kept_index: kept.len() - 1,
                artifact_id: id.clone(),
                timestamp: ev.timestamp,
            });
        }

        let deleted = match tracked.get(id) {
            Some(t) if state.deleted && !t.state.deleted => Some((ev.timestamp, t.state.clone())),
            Some(t) => t.deleted.clone(),
            None => None,
        };
        tracked.insert(
            id.clone(),
            Tracked {
                state: state.clone(),
                deleted,
            },
        );
    }

    report.clean_total = kept.len() as u64;
    (
        EventStream {
            key: stream.key.clone(),
            events: kept,
        },
        report,
    )
}
