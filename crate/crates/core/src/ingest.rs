//! JSON Lines event-log parsing and per-session stream partitioning.
//!
//! Each line is one [`RawEvent`]. Malformed lines become [`Diagnostic`]s and are
//! skipped; blank lines are ignored. Only stream-level I/O failures are fatal.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{ArtifactKind, Condition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    StateSnapshot,
    SystemEvent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemCode {
    AgentGen,
    PromptGen,
    ImageEdit,
    IntentEditGlobal,
    IntentEditLocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Size {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactState {
    pub position: Position,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<Size>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reaction_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub child_ids: Option<Vec<String>>,
    #[serde(default)]
    pub deleted: bool,
}

impl ArtifactState {
    pub fn at(x: f64, y: f64) -> ArtifactState {
        ArtifactState {
            position: Position { x, y },
            size: None,
            text: None,
            reaction_count: None,
            comment_count: None,
            start_id: None,
            end_id: None,
            child_ids: None,
            deleted: false,
        }
    }

    pub fn text_len(&self) -> i64 {
        self.text.as_deref().map_or(0, |t| t.chars().count() as i64)
    }
}

/// One timestamped log record.
///
/// `tag` is an optional free-form marker (for example `auto_save` or `interview`)
/// that cleaning matches against its noise and protocol code lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawEvent {
    pub timestamp: i64,
    pub designer_id: String,
    pub condition: Condition,
    pub task: String,
    pub event_kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_kind: Option<ArtifactKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<ArtifactState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_code: Option<SystemCode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    /// 1-based line in the source file; not part of the serialized form.
    #[serde(skip)]
    pub source_line: u64,
}

impl RawEvent {
    fn validate(&self) -> std::result::Result<(), String> {
        match self.event_kind {
            EventKind::StateSnapshot => {
                if self.artifact_id.is_none() {
                    return Err("state_snapshot without artifact_id".into());
                }
                let Some(kind) = self.artifact_kind else {
                    return Err("state_snapshot without artifact_kind".into());
                };
                let Some(state) = &self.state else {
                    return Err("state_snapshot without state".into());
                };
                if kind == ArtifactKind::Connector
                    && !state.deleted
                    && (state.start_id.is_none() || state.end_id.is_none())
                {
                    return Err("live connector without start_id/end_id".into());
                }
                if !(state.position.x.is_finite() && state.position.y.is_finite()) {
                    return Err("non-finite position".into());
                }
            }
            EventKind::SystemEvent => {
                if self.system_code.is_none() {
                    return Err("system_event without system_code".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: u64,
    pub reason: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ParsedLog {
    pub events: Vec<RawEvent>,
    pub diagnostics: Vec<Diagnostic>,
    /// Non-blank lines seen.
    pub lines: u64,
}

pub fn parse_log<R: BufRead>(reader: R) -> Result<ParsedLog> {
    let mut out = ParsedLog::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        out.lines += 1;
        match serde_json::from_str::<RawEvent>(&line) {
            Ok(mut ev) => match ev.validate() {
                Ok(()) => {
                    ev.source_line = line_no;
                    out.events.push(ev);
                }
                Err(reason) => out.diagnostics.push(Diagnostic {
                    line: line_no,
                    reason,
                }),
            },
            Err(e) => out.diagnostics.push(Diagnostic {
                line: line_no,
                reason: e.to_string(),
            }),
        }
    }
    Ok(out)
}

pub fn write_events<W: Write>(mut w: W, events: &[RawEvent]) -> Result<()> {
    for ev in events {
        serde_json::to_writer(&mut w, ev)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StreamKey {
    pub designer_id: String,
    pub condition: Condition,
    pub task: String,
}

/// Events of one designer × condition × task, ordered by (timestamp, source_line).
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    pub key: StreamKey,
    pub events: Vec<RawEvent>,
}

impl EventStream {
    pub fn new(key: StreamKey, mut events: Vec<RawEvent>) -> EventStream {
        events.sort_by_key(|e| (e.timestamp, e.source_line));
        EventStream { key, events }
    }
}

/// Group events by (designer, condition, task). Streams come back in key order.
pub fn partition_streams(events: Vec<RawEvent>) -> Vec<EventStream> {
    let mut groups: BTreeMap<StreamKey, Vec<RawEvent>> = BTreeMap::new();
    for ev in events {
        let key = StreamKey {
            designer_id: ev.designer_id.clone(),
            condition: ev.condition,
            task: ev.task.clone(),
        };
        groups.entry(key).or_default().push(ev);
    }
    groups
        .into_iter()
        .map(|(k, v)| EventStream::new(k, v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snapshot(ts: i64, designer: &str, cond: &str) -> String {
        format!(
            r#"{{"timestamp":{ts},"designer_id":"{designer}","condition":"{cond}","task":"space","event_kind":"state_snapshot","artifact_id":"n1","artifact_kind":"note","state":{{"position":{{"x":0,"y":0}},"text":"hi"}}}}"#
        )
    }

    fn system(ts: i64, code: &str) -> String {
        format!(
            r#"{{"timestamp":{ts},"designer_id":"D1","condition":"agent_organizer","task":"space","event_kind":"system_event","system_code":"{code}"}}"#
        )
    }

    #[test]
    fn empty_input() {
        let parsed = parse_log(&b""[..]).unwrap();
        assert!(parsed.events.is_empty());
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn missing_timestamp_is_a_diagnostic() {
        let input = format!(
            "{}\n{}\n",
            snapshot(10, "D1", "baseline"),
            r#"{"designer_id":"D1","condition":"baseline","task":"space","event_kind":"system_event","system_code":"prompt_gen"}"#
        );
        let parsed = parse_log(input.as_bytes()).unwrap();
        assert_eq!(parsed.events.len(), 1);
        assert_eq!(parsed.diagnostics.len(), 1);
        assert_eq!(parsed.diagnostics[0].line, 2);
        assert!(
            parsed.diagnostics[0].reason.contains("timestamp"),
            "{}",
            parsed.diagnostics[0].reason
        );
    }

    #[test]
    fn ten_line_fixture_with_two_system_events() {
        let mut lines = Vec::new();
        for i in 0..8 {
            lines.push(snapshot(i * 1000, "D1", "agent_organizer"));
        }
        lines.insert(3, system(2500, "agent_gen"));
        lines.insert(7, system(5500, "intent_edit_local"));
        let parsed = parse_log(lines.join("\n").as_bytes()).unwrap();
        assert_eq!(parsed.events.len(), 10);
        assert!(parsed.diagnostics.is_empty());
        assert_eq!(
            parsed
                .events
                .iter()
                .filter(|e| e.system_code.is_some())
                .count(),
            2
        );
        assert_eq!(parsed.events[3].system_code, Some(SystemCode::AgentGen));
        assert_eq!(
            parsed.events[7].system_code,
            Some(SystemCode::IntentEditLocal)
        );
        // file order preserved
        let lines_seen: Vec<u64> = parsed.events.iter().map(|e| e.source_line).collect();
        assert_eq!(lines_seen, (1..=10).collect::<Vec<_>>());
    }

    #[test]
    fn schema_violations() {
        let cases = [
            r#"{"timestamp":1,"designer_id":"D1","condition":"baseline","task":"t","event_kind":"state_snapshot","artifact_kind":"note","state":{"position":{"x":0,"y":0}}}"#,
            r#"{"timestamp":1,"designer_id":"D1","condition":"baseline","task":"t","event_kind":"system_event"}"#,
            r#"{"timestamp":1,"designer_id":"D1","condition":"baseline","task":"t","event_kind":"state_snapshot","artifact_id":"c","artifact_kind":"connector","state":{"position":{"x":0,"y":0}}}"#,
            r#"{"timestamp":1,"designer_id":"D1","condition":"baseline","task":"t","event_kind":"state_snapshot","artifact_id":"n","artifact_kind":"note","state":{"position":{"x":0,"y":0},"reaction_count":-1}}"#,
            r#"{"timestamp":1,"designer_id":"D1","condition":"baseline","task":"t","event_kind":"state_snapshot","artifact_id":"n","artifact_kind":"sticker","state":{"position":{"x":0,"y":0}}}"#,
            r#"not json"#,
        ];
        let parsed = parse_log(cases.join("\n").as_bytes()).unwrap();
        assert!(parsed.events.is_empty());
        assert_eq!(parsed.diagnostics.len(), cases.len());
    }

    #[test]
    fn partition_by_designer_and_condition() {
        let lines = [
            snapshot(5, "D1", "baseline"),
            snapshot(3, "D2", "baseline"),
            snapshot(4, "D1", "agent_organizer"),
            snapshot(1, "D2", "agent_organizer"),
            snapshot(2, "D1", "baseline"),
        ];
        let parsed = parse_log(lines.join("\n").as_bytes()).unwrap();
        let streams = partition_streams(parsed.events);
        assert_eq!(streams.len(), 4);
        let d1_base = streams
            .iter()
            .find(|s| s.key.designer_id == "D1" && s.key.condition == Condition::Baseline)
            .unwrap();
        let ts: Vec<i64> = d1_base.events.iter().map(|e| e.timestamp).collect();
        assert_eq!(ts, vec![2, 5]);
    }

    #[test]
    fn single_event_single_stream() {
        let parsed = parse_log(snapshot(1, "D1", "baseline").as_bytes()).unwrap();
        let streams = partition_streams(parsed.events);
        assert_eq!(streams.len(), 1);
        assert_eq!(streams[0].events.len(), 1);
    }

    #[test]
    fn timestamp_ties_keep_file_order() {
        let lines = [
            snapshot(7, "D1", "baseline"),
            snapshot(7, "D1", "baseline"),
            snapshot(1, "D1", "baseline"),
        ];
        let streams = partition_streams(parse_log(lines.join("\n").as_bytes()).unwrap().events);
        let order: Vec<u64> = streams[0].events.iter().map(|e| e.source_line).collect();
        assert_eq!(order, vec![3, 1, 2]);
    }
}
