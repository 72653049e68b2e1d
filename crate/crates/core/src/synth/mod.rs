//! Synthetic canvas logs with known ground truth.
//!
//! A session is sampled as a category sequence from per-phase transition policies,
//! rendered onto a simulated canvas as raw snapshots and system events, and then
//! salted with the noise the cleaning rules remove. Every injected noise event is
//! counted, so the exclusion report the pipeline should produce is known exactly.

mod params;
mod preset;
mod render;

use std::collections::HashMap;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use params::{GeneratorParams, NoiseRates, PhasePolicy, SplitLogNormal, Timing};
pub use preset::preset_paper_like;

use crate::abstraction::ExclusionReport;
use crate::error::Result;
use crate::ingest::RawEvent;
use crate::model::{Condition, DesignAction};

/// 2023-11-14T22:13:20Z; sessions start three days apart from here.
const EPOCH_MS: i64 = 1_700_000_000_000;
const SESSION_SPACING_MS: i64 = 3 * 24 * 3_600_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionTruth {
    pub designer_id: String,
    pub condition: Condition,
    pub task: String,
    /// Exclusion counts the abstraction should report for this session's events.
    pub expected: ExclusionReport,
    /// Sampled categories that had no valid target and were redrawn.
    pub resampled: u64,
    /// Labelled actions, phase included.
    pub actions: Vec<DesignAction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    /// Raw events in session order, `source_line` numbered from 1.
    pub events: Vec<RawEvent>,
    pub truth: Vec<SessionTruth>,
}

impl SynthOutput {
    pub fn actions(&self) -> impl Iterator<Item = &DesignAction> + Clone {
        self.truth.iter().flat_map(|s| &s.actions)
    }

    pub fn expected_report(&self) -> ExclusionReport {
        self.truth.iter().map(|s| s.expected).sum()
    }
}

pub fn designer_id(i: usize) -> String {
    format!("D{:02}", i + 1)
}

pub fn task_for(condition: Condition) -> String {
    match condition {
        Condition::Baseline => "task_a".into(),
        Condition::AgentOrganizer => "task_b".into(),
    }
}

struct Job {
    designer: String,
    condition: Condition,
    seed: u64,
    start_ms: i64,
}

/// Generate every (designer, condition) session. Sub-seeds are drawn up front, so the
/// output depends only on `params` and not on how sessions are spread over threads.
pub fn generate(params: &GeneratorParams) -> Result<SynthOutput> {
    params.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let mut jobs = Vec::new();
    for d in 0..params.designers {
        for &condition in &params.conditions {
            let slot = jobs.len() as i64;
            jobs.push(Job {
                designer: designer_id(d),
                condition,
                seed: master.random(),
                start_ms: EPOCH_MS + slot * SESSION_SPACING_MS,
            });
        }
    }

    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(jobs.len());
    let chunk = jobs.len().div_ceil(workers);
    let results: Vec<Result<(Vec<RawEvent>, SessionTruth)>> = thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|j| {
                            render::generate_session(
                                params,
                                j.designer.clone(),
                                j.condition,
                                task_for(j.condition),
                                j.seed,
                                j.start_ms,
                            )
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("session generator panicked"))
            .collect()
    });

    let mut out = SynthOutput {
        events: Vec::new(),
        truth: Vec::new(),
    };
    for r in results {
        let (events, truth) = r?;
        out.events.extend(events);
        out.truth.push(truth);
    }
    for (i, ev) in out.events.iter_mut().enumerate() {
        ev.source_line = i as u64 + 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Recovery {
    pub expected: u64,
    pub recovered: u64,
    /// Matched on session, timestamp and category.
    pub category_matches: u64,
    /// Matched on session, timestamp and full subtype (magnitude included).
    pub subtype_matches: u64,
}

impl Recovery {
    pub fn category_rate(&self) -> f64 {
        self.category_matches as f64 / self.expected.max(1) as f64
    }

    pub fn subtype_rate(&self) -> f64 {
        self.subtype_matches as f64 / self.expected.max(1) as f64
    }
}

fn multiset_matches<K: std::hash::Hash + Eq>(
    expected: impl Iterator<Item = K>,
    got: impl Iterator<Item = K>,
) -> u64 {
    let mut pool: HashMap<K, u64> = HashMap::new();
    for k in got {
        *pool.entry(k).or_default() += 1;
    }
    let mut hits = 0;
    for k in expected {
        if let Some(n) = pool.get_mut(&k).filter(|n| **n > 0) {
            *n -= 1;
            hits += 1;
        }
    }
    hits
}

/// Compare recovered actions with the labels, one-to-one.
pub fn compare_recovery<'a>(
    expected: impl IntoIterator<Item = &'a DesignAction> + Clone,
    recovered: impl IntoIterator<Item = &'a DesignAction> + Clone,
) -> Recovery {
    let key = |a: &DesignAction| {
        (
            a.designer_id.clone(),
            a.condition,
            a.task.clone(),
            a.timestamp,
        )
    };
    Recovery {
        expected: expected.clone().into_iter().count() as u64,
        recovered: recovered.clone().into_iter().count() as u64,
        category_matches: multiset_matches(
            expected.clone().into_iter().map(|a| (key(a), a.category)),
            recovered.clone().into_iter().map(|a| (key(a), a.category)),
        ),
        subtype_matches: multiset_matches(
            expected.into_iter().map(|a| (key(a), a.subtype)),
            recovered.into_iter().map(|a| (key(a), a.subtype)),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{abstract_stream, CleaningConfig};
    use crate::ingest::{parse_log, partition_streams, write_events};
    use crate::model::ActionCategory;

    fn small(seed: u64) -> GeneratorParams {
        GeneratorParams {
            seed,
            designers: 3,
            session_length: 400,
            ..preset_paper_like()
        }
    }

    fn run_pipeline(
        out: &SynthOutput,
        params: &GeneratorParams,
    ) -> (Vec<DesignAction>, ExclusionReport) {
        let mut actions = Vec::new();
        let mut report = ExclusionReport::default();
        for stream in partition_streams(out.events.clone()) {
            let a = abstract_stream(&stream, &CleaningConfig::default(), &params.thresholds);
            assert!(a.diagnostics.is_empty(), "{:?}", a.diagnostics);
            report += a.report;
            actions.extend(a.actions);
        }
        (actions, report)
    }

    #[test]
    fn noiseless_round_trip() {
        let params = GeneratorParams {
            designers: 1,
            session_length: 100,
            ..preset_paper_like().noiseless()
        };
        let out = generate(&params).unwrap();
        let (actions, report) = run_pipeline(&out, &params);
        assert_eq!(out.truth.len(), 2);
        assert_eq!(actions.len(), 200);
        assert_eq!(report.cleaning_exclusions(), 0);
        assert_eq!(report.non_significant, 0);
        let r = compare_recovery(out.actions(), &actions);
        assert_eq!(r.subtype_matches, 200);
    }

    #[test]
    fn noisy_report_is_exact() {
        let params = small(4);
        let out = generate(&params).unwrap();
        let (actions, report) = run_pipeline(&out, &params);
        let want = out.expected_report();
        assert_eq!(report, want);
        assert!(
            want.duplicates_no_change > 0
                && want.typing_consolidated > 0
                && want.post_delete_reappear > 0
        );
        let r = compare_recovery(out.actions(), &actions);
        assert_eq!(r.recovered, r.expected);
        assert_eq!(r.subtype_matches, r.expected);
    }

    #[test]
    fn concurrent_edits_and_moves() {
        let params = GeneratorParams {
            concurrency: 0.4,
            ..small(8)
        };
        let out = generate(&params).unwrap();
        let (actions, report) = run_pipeline(&out, &params);
        assert_eq!(report, out.expected_report());
        assert!(report.co_emitted > 0);
        assert_eq!(
            compare_recovery(out.actions(), &actions).subtype_matches,
            actions.len() as u64
        );
        let grouped = actions
            .iter()
            .filter(|a| a.concurrent_group.is_some())
            .count() as u64;
        assert_eq!(grouped, 2 * report.co_emitted);
    }

    #[test]
    fn deterministic_bytes() {
        let write = |out: &SynthOutput| {
            let mut buf = Vec::new();
            write_events(&mut buf, &out.events).unwrap();
            buf
        };
        let a = write(&generate(&small(11)).unwrap());
        let b = write(&generate(&small(11)).unwrap());
        let c = write(&generate(&small(12)).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, c);
        let parsed = parse_log(a.as_slice()).unwrap();
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn agent_generation_only_with_the_organizer() {
        let out = generate(&small(2)).unwrap();
        for s in &out.truth {
            let agent = s
                .actions
                .iter()
                .filter(|a| a.category == ActionCategory::AgentGen)
                .count();
            match s.condition {
                Condition::Baseline => assert_eq!(agent, 0),
                Condition::AgentOrganizer => assert!(agent > 0),
            }
            assert!(s.actions.iter().all(|a| a.phase.is_some()));
        }
    }
}
