//! Active-time sessionization and Early/Mid/Late phase assignment.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Condition, DesignAction, Phase};

pub const DEFAULT_GAP_CUTOFF_MS: i64 = 30 * 60 * 1000;
pub const SENSITIVITY_CUTOFFS_MIN: [i64; 3] = [15, 30, 60];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start_ms: i64,
    pub end_ms: i64,
}

impl Segment {
    pub fn span(&self) -> i64 {
        self.end_ms - self.start_ms
    }

    pub fn contains(&self, ts: i64) -> bool {
        self.start_ms <= ts && ts <= self.end_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActiveTimeline {
    pub segments: Vec<Segment>,
    pub active_duration: i64,
    /// Cumulative active offset of each input timestamp, in input order.
    pub offsets: Vec<i64>,
    /// Active time accumulated before each segment.
    segment_base: Vec<i64>,
}

impl ActiveTimeline {
    pub fn segment_of(&self, ts: i64) -> Option<usize> {
        let i = self.segments.partition_point(|s| s.end_ms < ts);
        (i < self.segments.len() && self.segments[i].contains(ts)).then_some(i)
    }

    /// Active time elapsed up to `ts`, which must lie inside a segment.
    pub fn offset_of(&self, ts: i64) -> Result<i64> {
        let i = self.segment_of(ts).ok_or(Error::NotInTimeline(ts))?;
        Ok(self.segment_base[i] + ts - self.segments[i].start_ms)
    }

    pub fn boundaries(&self) -> PhaseBoundaries {
        PhaseBoundaries::new(self.active_duration)
    }
}

/// Split sorted timestamps wherever the gap to the previous one exceeds `gap_cutoff_ms`.
pub fn build_timeline(timestamps: &[i64], gap_cutoff_ms: i64) -> Result<ActiveTimeline> {
    let (&first, rest) = timestamps
        .split_first()
        .ok_or(Error::Empty("timeline of no actions"))?;
    if timestamps.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "timeline timestamps must be sorted".into(),
        ));
    }
    let mut segments = vec![Segment {
        start_ms: first,
        end_ms: first,
    }];
    let mut segment_base = vec![0];
    let mut offsets = vec![0];
    let mut active = 0;
    for &ts in rest {
        let cur = segments.last_mut().expect("at least one segment");
        if ts - cur.end_ms > gap_cutoff_ms {
            active += cur.span();
            segment_base.push(active);
            segments.push(Segment {
                start_ms: ts,
                end_ms: ts,
            });
        } else {
            cur.end_ms = ts;
        }
        let last = segments.len() - 1;
        offsets.push(segment_base[last] + ts - segments[last].start_ms);
    }
    let active_duration = active + segments.last().expect("at least one segment").span();
    Ok(ActiveTimeline {
        segments,
        active_duration,
        offsets,
        segment_base,
    })
}

/// Tertile cut points of a session's active time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseBoundaries {
    pub t1: f64,
    pub t2: f64,
    pub active_duration: i64,
}

impl PhaseBoundaries {
    pub fn new(active_duration: i64) -> PhaseBoundaries {
        let d = active_duration as f64;
        PhaseBoundaries {
            t1: d / 3.0,
            t2: 2.0 * d / 3.0,
            active_duration,
        }
    }
}

/// A point exactly on a cut goes to the earlier phase.
pub fn assign_phase(offset: i64, b: &PhaseBoundaries) -> Result<Phase> {
    if offset < 0 || offset > b.active_duration {
        return Err(Error::OffsetOutOfRange {
            offset,
            duration: b.active_duration,
        });
    }
    let x = offset as f64;
    Ok(if x <= b.t1 {
        Phase::Early
    } else if x <= b.t2 {
        Phase::Mid
    } else {
        Phase::Late
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SessionKey {
    pub designer_id: String,
    pub condition: Condition,
}

impl SessionKey {
    pub fn of(a: &DesignAction) -> SessionKey {
        SessionKey {
            designer_id: a.designer_id.clone(),
            condition: a.condition,
        }
    }
}

/// One designer under one condition, all tasks merged, in timestamp order.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub key: SessionKey,
    pub timeline: ActiveTimeline,
    pub boundaries: PhaseBoundaries,
    /// Every action has `phase` set.
    pub actions: Vec<DesignAction>,
    /// Segment index of each action.
    pub segments: Vec<usize>,
}

/// Which timestamps define active time.
#[derive(Debug, Clone, Default)]
pub enum TimelineBasis {
    #[default]
    Actions,
    /// Clean event timestamps per session; each action must fall inside their segments.
    Events(BTreeMap<SessionKey, Vec<i64>>),
}

/// Group actions into sessions, build each timeline and stamp phases.
/// Actions with equal timestamps keep their input order.
pub fn sessionize(
    actions: Vec<DesignAction>,
    gap_cutoff_ms: i64,
    basis: &TimelineBasis,
) -> Result<Vec<Session>> {
    let mut groups: BTreeMap<SessionKey, Vec<DesignAction>> = BTreeMap::new();
    for a in actions {
        groups.entry(SessionKey::of(&a)).or_default().push(a);
    }
    groups
        .into_iter()
        .map(|(key, mut acts)| {
            acts.sort_by_key(|a| a.timestamp);
            let action_ts: Vec<i64> = acts.iter().map(|a| a.timestamp).collect();
            let timeline = match basis {
                TimelineBasis::Actions => build_timeline(&action_ts, gap_cutoff_ms)?,
                TimelineBasis::Events(map) => {
                    let mut ts = map.get(&key).cloned().unwrap_or_default();
                    ts.sort_unstable();
                    build_timeline(&ts, gap_cutoff_ms)?
                }
            };
            let boundaries = timeline.boundaries();
            let mut segments = Vec::with_capacity(acts.len());
            for a in &mut acts {
                let offset = timeline.offset_of(a.timestamp)?;
                a.phase = Some(assign_phase(offset, &boundaries)?);
                segments.push(
                    timeline
                        .segment_of(a.timestamp)
                        .expect("offset_of found a segment"),
                );
            }
            Ok(Session {
                key,
                timeline,
                boundaries,
                actions: acts,
                segments,
            })
        })
        .collect()
}
