//! Event-log abstraction: cleaning, change detection and taxonomy mapping.

mod classify;
mod clean;
mod delta;
mod magnitude;

use std::collections::HashMap;

pub use classify::classify;
pub use clean::{clean_events, CleaningConfig, ExclusionReport, TimeWindow};
pub use delta::{detect_delta, StateDelta};
pub use magnitude::{compute_quartiles, quantize_magnitude, QuartileTriple, Thresholds};

use crate::ingest::{ArtifactState, Diagnostic, EventKind, EventStream};
use crate::model::DesignAction;

#[derive(Debug, Clone, Default)]
pub struct Abstraction {
    pub actions: Vec<DesignAction>,
    pub report: ExclusionReport,
    /// Events that could not be classified; they count as non-significant.
    pub diagnostics: Vec<Diagnostic>,
    /// Timestamps of all clean events, for timelines built on events rather than actions.
    pub clean_timestamps: Vec<i64>,
}

/// Clean one stream, track per-artifact state, and classify each clean event.
///
/// Actions co-emitted from one snapshot share a `concurrent_group` id; ids are unique
/// within the stream.
pub fn abstract_stream(
    stream: &EventStream,
    config: &CleaningConfig,
    thresholds: &Thresholds,
) -> Abstraction {
    let (clean, mut report) = clean_events(stream, config);
    let mut out = Abstraction::default();
    let mut states: HashMap<&str, &ArtifactState> = HashMap::new();
    let mut next_group = 0u64;

    for ev in &clean.events {
        out.clean_timestamps.push(ev.timestamp);
        let delta = match (ev.event_kind, ev.artifact_id.as_deref(), ev.state.as_ref()) {
            (EventKind::StateSnapshot, Some(id), Some(state)) => {
                let prev = states.insert(id, state);
                Some(detect_delta(prev, Some(state)).expect("current state is present"))
            }
            _ => None,
        };
        match classify(ev, delta.as_ref(), thresholds) {
            Ok(mut actions) if !actions.is_empty() => {
                if actions.len() > 1 {
                    for a in &mut actions {
                        a.concurrent_group = Some(next_group);
                    }
                    next_group += 1;
                }
                report.action_total += 1;
                report.co_emitted += actions.len() as u64 - 1;
                out.actions.extend(actions);
            }
            Ok(_) => report.non_significant += 1,
            Err(e) => {
                report.non_significant += 1;
                out.diagnostics.push(Diagnostic {
                    line: ev.source_line,
                    reason: e.to_string(),
                });
            }
        }
    }
    out.report = report;
    out
}
