//! The `abstract`, `mine` and `stats` stages. Each writes its CSVs and a JSON sidecar
//! holding the same numbers at full precision.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use designseq_core::abstraction::{abstract_stream, ExclusionReport, Thresholds};
use designseq_core::ingest::{parse_log, partition_streams};
use designseq_core::mining::{
    acceptance_rate, build_markov, category_counts, extract_ngrams, rank_actions, Scope,
    WeightedNGramTable,
};
use designseq_core::model::{ActionCategory, Condition, DesignAction, Phase};
use designseq_core::stats::{
    chi_square, special, standardized_residuals, two_proportion_z, wilcoxon_signed_rank,
    ContingencyTable, ResidualKind,
};
use designseq_core::timeline::{
    sessionize, Segment, Session, SessionKey, TimelineBasis, SENSITIVITY_CUTOFFS_MIN,
};

use crate::config::{minutes_to_ms, AnalysisConfig, BasisMode, ThresholdMode};
use crate::output::{csv_writer, fmt_g6, fmt_opt, write_json, write_jsonl};
use crate::DataQuality;

pub const ACTIONS_FILE: &str = "actions.jsonl";
pub const CLEAN_TIMES_FILE: &str = "clean_times.csv";
pub const ABSTRACT_JSON: &str = "abstract.json";
pub const MINE_JSON: &str = "mine.json";
pub const STATS_JSON: &str = "stats.json";

const FUNNEL: [&str; 10] = [
    "raw_total",
    "protocol_out_of_scope",
    "system_noise",
    "duplicates_no_change",
    "typing_consolidated",
    "post_delete_reappear",
    "clean_total",
    "non_significant",
    "action_total",
    "co_emitted",
];

fn funnel_values(r: &ExclusionReport) -> [u64; 10] {
    [
        r.raw_total,
        r.protocol_out_of_scope,
        r.system_noise,
        r.duplicates_no_change,
        r.typing_consolidated,
        r.post_delete_reappear,
        r.clean_total,
        r.non_significant,
        r.action_total,
        r.co_emitted,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamExclusions {
    pub designer_id: String,
    pub condition: Condition,
    pub task: String,
    pub report: ExclusionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractSummary {
    /// File names only, so outputs do not depend on where inputs live.
    pub inputs: Vec<String>,
    pub lines: u64,
    pub schema_errors: u64,
    pub classification_errors: u64,
    pub exclusions: ExclusionReport,
    pub streams: Vec<StreamExclusions>,
    pub threshold_mode: ThresholdMode,
    pub thresholds: Thresholds,
    pub relocate_samples: u64,
    pub elaborate_samples: u64,
}

/// Files to read: plain paths as given, directories expanded to their `*.jsonl` files.
pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            files.extend(found);
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            bail!("input {} does not exist", p.display());
        }
    }
    if files.is_empty() {
        bail!("no input logs found");
    }
    Ok(files)
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(
        || p.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

pub fn run_abstract(
    inputs: &[PathBuf],
    cfg: &AnalysisConfig,
    out: &Path,
) -> Result<AbstractSummary> {
    let files = collect_inputs(inputs)?;
    let mut events = Vec::new();
    let (mut lines, mut schema_errors) = (0u64, 0u64);
    for f in &files {
        let reader =
            BufReader::new(File::open(f).with_context(|| format!("opening {}", f.display()))?);
        let parsed = parse_log(reader).with_context(|| format!("reading {}", f.display()))?;
        for d in &parsed.diagnostics {
            eprintln!("{}:{}: {}", f.display(), d.line, d.reason);
        }
        lines += parsed.lines;
        schema_errors += parsed.diagnostics.len() as u64;
        events.extend(parsed.events);
    }

    let cleaning = cfg.cleaning();
    let paper = Thresholds::paper();
    let results: Vec<_> = partition_streams(events)
        .par_iter()
        .map(|s| (s.key.clone(), abstract_stream(s, &cleaning, &paper)))
        .collect();

    let mut actions = Vec::new();
    let mut exclusions = ExclusionReport::default();
    let mut streams = Vec::new();
    let mut clean_times: BTreeMap<SessionKey, Vec<i64>> = BTreeMap::new();
    let mut classification_errors = 0;
    for (key, a) in results {
        for d in &a.diagnostics {
            eprintln!("{}/{}/{}: {d}", key.designer_id, key.condition, key.task);
        }
        classification_errors += a.diagnostics.len() as u64;
        exclusions += a.report;
        let session = SessionKey {
            designer_id: key.designer_id.clone(),
            condition: key.condition,
        };
        clean_times
            .entry(session)
            .or_default()
            .extend(&a.clean_timestamps);
        streams.push(StreamExclusions {
            designer_id: key.designer_id,
            condition: key.condition,
            task: key.task,
            report: a.report,
        });
        actions.extend(a.actions);
    }

    let thresholds = match cfg.thresholds {
        ThresholdMode::Paper => paper,
        ThresholdMode::Recompute => {
            let t = Thresholds::recompute(&actions, &paper)?;
            t.requantize(&mut actions)?;
            t
        }
    };
    let samples = |cat| {
        actions
            .iter()
            .filter(|a| a.category == cat && a.raw_magnitude.is_some())
            .count() as u64
    };
    let summary = AbstractSummary {
        inputs: files.iter().map(|f| file_name(f)).collect(),
        lines,
        schema_errors,
        classification_errors,
        exclusions,
        streams,
        threshold_mode: cfg.thresholds,
        thresholds,
        relocate_samples: samples(ActionCategory::Relocate),
        elaborate_samples: samples(ActionCategory::Elaborate),
    };

    std::fs::create_dir_all(out)?;
    write_jsonl(&out.join(ACTIONS_FILE), &actions)?;
    write_exclusions(&out.join("exclusions.csv"), &summary)?;
    write_thresholds(&out.join("thresholds.csv"), &summary)?;
    let mut w = csv_writer(&out.join(CLEAN_TIMES_FILE))?;
    w.write_record(["designer_id", "condition", "timestamp"])?;
    for (k, ts) in &clean_times {
        for t in ts {
            w.write_record([k.designer_id.as_str(), k.condition.token(), &t.to_string()])?;
        }
    }
    w.flush()?;
    write_json(&out.join(ABSTRACT_JSON), &summary)?;

    if lines > 0 && schema_errors as f64 / lines as f64 > cfg.max_schema_error_rate {
        return Err(DataQuality(format!(
            "{schema_errors} of {lines} input lines failed validation (limit {})",
            cfg.max_schema_error_rate
        ))
        .into());
    }
    Ok(summary)
}

fn write_exclusions(path: &Path, s: &AbstractSummary) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["scope", "class", "count"])?;
    let mut emit = |scope: &str, r: &ExclusionReport| -> Result<()> {
        for (class, v) in FUNNEL.iter().zip(funnel_values(r)) {
            w.write_record([scope, class, &v.to_string()])?;
        }
        Ok(())
    };
    emit("all", &s.exclusions)?;
    for st in &s.streams {
        emit(
            &format!("{}/{}/{}", st.designer_id, st.condition, st.task),
            &st.report,
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_thresholds(path: &Path, s: &AbstractSummary) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["class", "mode", "q1", "q2", "q3", "samples"])?;
    for (class, t, n) in [
        ("relocate_px", s.thresholds.relocate, s.relocate_samples),
        (
            "elaborate_chars",
            s.thresholds.elaborate,
            s.elaborate_samples,
        ),
    ] {
        w.write_record([
            class,
            s.threshold_mode.token(),
            &fmt_g6(t.q1),
            &fmt_g6(t.q2),
            &fmt_g6(t.q3),
            &n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_actions(path: &Path) -> Result<Vec<DesignAction>> {
    let reader =
        BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let a = serde_json::from_str(&line)
            .map_err(|e| DataQuality(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(a);
    }
    Ok(out)
}

#[derive(Deserialize)]
struct CleanTime {
    designer_id: String,
    condition: Condition,
    timestamp: i64,
}

pub fn load_clean_times(path: &Path) -> Result<BTreeMap<SessionKey, Vec<i64>>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut map: BTreeMap<SessionKey, Vec<i64>> = BTreeMap::new();
    for row in r.deserialize() {
        let t: CleanTime = row.with_context(|| format!("reading {}", path.display()))?;
        map.entry(SessionKey {
            designer_id: t.designer_id,
            condition: t.condition,
        })
        .or_default()
        .push(t.timestamp);
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineRow {
    pub designer_id: String,
    pub condition: Condition,
    pub actions: u64,
    pub segments: Vec<Segment>,
    pub active_duration_ms: i64,
    pub t1_ms: f64,
    pub t2_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub gap_min: i64,
    pub condition: Condition,
    pub phase: Phase,
    pub actions: u64,
    /// Of the condition's actions.
    pub share: f64,
    pub segments: u64,
    pub active_duration_ms: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NGramRow {
    pub n: usize,
    pub scope: String,
    pub rank: usize,
    pub tuple: Vec<ActionCategory>,
    pub weight: f64,
    pub share: f64,
    pub baseline_share: Option<f64>,
    pub agent_share: Option<f64>,
    /// Two-proportion test, agent share against baseline share.
    pub z: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovTable {
    pub condition: Condition,
    pub phase: Option<Phase>,
    pub counts: Vec<Vec<f64>>,
    pub support: Vec<f64>,
    /// Row-normalized; `None` for rows without support.
    pub probabilities: Vec<Option<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRow {
    pub phase: Option<Phase>,
    pub accepted: u64,
    pub creates_after_generation: u64,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub condition: Option<Condition>,
    pub phase: Option<Phase>,
    pub rank: usize,
    pub category: ActionCategory,
    pub count: u64,
    pub share: f64,
}

impl RankEntry {
    pub fn scope(&self) -> Scope {
        Scope {
            condition: self.condition,
            phase: self.phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MineSummary {
    pub gap_min: f64,
    pub timeline_basis: BasisMode,
    pub actions: u64,
    pub conditions: Vec<Condition>,
    pub timeline: Vec<TimelineRow>,
    pub sensitivity: Vec<SensitivityRow>,
    pub ngrams: Vec<NGramRow>,
    pub skipped_windows: u64,
    pub markov: Vec<MarkovTable>,
    pub acceptance: Vec<AcceptanceRow>,
    pub ranks: Vec<RankEntry>,
}

fn present_conditions(actions: &[DesignAction]) -> Vec<Condition> {
    Condition::ALL
        .iter()
        .copied()
        .filter(|c| actions.iter().any(|a| a.condition == *c))
        .collect()
}

fn phase_scopes(conditions: &[Condition]) -> Vec<Scope> {
    conditions
        .iter()
        .flat_map(|&c| {
            std::iter::once(Scope::condition(c))
                .chain(Phase::ALL.iter().map(move |&p| Scope::phase(c, p)))
        })
        .collect()
}

fn basis(cfg: &AnalysisConfig, actions_path: &Path) -> Result<TimelineBasis> {
    Ok(match cfg.timeline_basis {
        BasisMode::Actions => TimelineBasis::Actions,
        BasisMode::Events => {
            let dir = actions_path.parent().unwrap_or(Path::new("."));
            TimelineBasis::Events(load_clean_times(&dir.join(CLEAN_TIMES_FILE))?)
        }
    })
}

fn tuple_label(t: &[ActionCategory]) -> String {
    t.iter().map(|c| c.name()).collect::<Vec<_>>().join(">")
}

pub fn run_mine(actions_path: &Path, cfg: &AnalysisConfig, out: &Path) -> Result<MineSummary> {
    let actions = load_actions(actions_path)?;
    let conditions = present_conditions(&actions);
    let basis = basis(cfg, actions_path)?;
    let opts = cfg.mining();
    let total = actions.len() as u64;

    let mut sensitivity = Vec::new();
    for gap in SENSITIVITY_CUTOFFS_MIN {
        let sessions = sessionize(actions.clone(), minutes_to_ms(gap as f64), &basis)?;
        for &c in &conditions {
            let of_condition: u64 = category_counts(&sessions, Scope::condition(c)).iter().sum();
            let mine: Vec<&Session> = sessions.iter().filter(|s| s.key.condition == c).collect();
            for p in Phase::ALL {
                let n: u64 = category_counts(&sessions, Scope::phase(c, p)).iter().sum();
                sensitivity.push(SensitivityRow {
                    gap_min: gap,
                    condition: c,
                    phase: p,
                    actions: n,
                    share: if of_condition > 0 {
                        n as f64 / of_condition as f64
                    } else {
                        0.0
                    },
                    segments: mine.iter().map(|s| s.timeline.segments.len() as u64).sum(),
                    active_duration_ms: mine.iter().map(|s| s.timeline.active_duration).sum(),
                });
            }
        }
    }

    let sessions = sessionize(actions, cfg.gap_cutoff_ms(), &basis)?;
    let timeline = sessions
        .iter()
        .map(|s| TimelineRow {
            designer_id: s.key.designer_id.clone(),
            condition: s.key.condition,
            actions: s.actions.len() as u64,
            segments: s.timeline.segments.clone(),
            active_duration_ms: s.timeline.active_duration,
            t1_ms: s.boundaries.t1,
            t2_ms: s.boundaries.t2,
        })
        .collect();

    let scopes = phase_scopes(&conditions);
    let mut ngrams = Vec::new();
    let mut skipped_windows = 0;
    for n in [2, 3] {
        let tables: BTreeMap<Scope, WeightedNGramTable> = scopes
            .par_iter()
            .map(|&s| Ok((s, extract_ngrams(&sessions, n, s, &opts)?)))
            .collect::<designseq_core::Result<_>>()?;
        for t in tables.values() {
            skipped_windows += t.skipped_windows;
            for d in &t.diagnostics {
                eprintln!("{}: {d}", t.scope.label());
            }
        }
        for (scope, table) in &tables {
            let counterpart = |c: Condition| {
                tables.get(&Scope {
                    condition: Some(c),
                    phase: scope.phase,
                })
            };
            let pair = counterpart(Condition::Baseline).zip(counterpart(Condition::AgentOrganizer));
            for (rank, (tuple, weight)) in table.ranked().into_iter().take(cfg.top_k).enumerate() {
                let mut row = NGramRow {
                    n,
                    scope: scope.label(),
                    rank: rank + 1,
                    tuple: tuple.clone(),
                    weight,
                    share: table.share(tuple),
                    baseline_share: None,
                    agent_share: None,
                    z: None,
                    p_value: None,
                };
                if let Some((b, a)) = pair {
                    let (p1, p2) = (b.share(tuple), a.share(tuple));
                    row.baseline_share = Some(p1);
                    row.agent_share = Some(p2);
                    if let Ok(t) = two_proportion_z(p1, b.total(), p2, a.total()) {
                        row.z = Some(t.statistic);
                        row.p_value = Some(t.p_value);
                    }
                }
                ngrams.push(row);
            }
        }
    }

    let mut markov = Vec::new();
    for &c in &conditions {
        for phase in std::iter::once(None).chain(Phase::ALL.map(Some)) {
            let m = build_markov(
                &sessions,
                Scope {
                    condition: Some(c),
                    phase,
                },
                &opts,
            )?;
            markov.push(MarkovTable {
                condition: c,
                phase,
                counts: m.counts.iter().map(|r| r.to_vec()).collect(),
                support: m.support.to_vec(),
                probabilities: m
                    .probabilities()
                    .iter()
                    .map(|r| r.map(|r| r.to_vec()))
                    .collect(),
            });
        }
    }

    let mut acceptance = Vec::new();
    if conditions.contains(&Condition::AgentOrganizer) {
        for phase in std::iter::once(None).chain(Phase::ALL.map(Some)) {
            let a = acceptance_rate(&sessions, Condition::AgentOrganizer, phase)?;
            acceptance.push(AcceptanceRow {
                phase,
                accepted: a.accepted,
                creates_after_generation: a.creates_after_generation,
                rate: a.rate(),
            });
        }
    }

    let mut ranks = Vec::new();
    for scope in std::iter::once(Scope::all()).chain(scopes.iter().copied()) {
        if total == 0 {
            break;
        }
        for r in rank_actions(&sessions, scope) {
            ranks.push(RankEntry {
                condition: scope.condition,
                phase: scope.phase,
                rank: r.rank,
                category: r.category,
                count: r.count,
                share: r.share,
            });
        }
    }

    let summary = MineSummary {
        gap_min: cfg.gap_min,
        timeline_basis: cfg.timeline_basis,
        actions: total,
        conditions,
        timeline,
        sensitivity,
        ngrams,
        skipped_windows,
        markov,
        acceptance,
        ranks,
    };
    std::fs::create_dir_all(out)?;
    write_mine_csvs(&summary, out)?;
    write_json(&out.join(MINE_JSON), &summary)?;
    Ok(summary)
}

fn phase_token(p: Option<Phase>) -> &'static str {
    p.map_or("all", |p| p.token())
}

fn write_mine_csvs(s: &MineSummary, out: &Path) -> Result<()> {
    let mut w = csv_writer(&out.join("timeline.csv"))?;
    w.write_record([
        "designer_id",
        "condition",
        "actions",
        "segments",
        "active_duration_ms",
        "t1_ms",
        "t2_ms",
        "segment_spans",
    ])?;
    for r in &s.timeline {
        let spans = r
            .segments
            .iter()
            .map(|g| format!("{}-{}", g.start_ms, g.end_ms))
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            r.designer_id.as_str(),
            r.condition.token(),
            &r.actions.to_string(),
            &r.segments.len().to_string(),
            &r.active_duration_ms.to_string(),
            &fmt_g6(r.t1_ms),
            &fmt_g6(r.t2_ms),
            &spans,
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(&out.join("sensitivity.csv"))?;
    w.write_record([
        "gap_min",
        "condition",
        "phase",
        "actions",
        "share",
        "segments",
        "active_duration_ms",
    ])?;
    for r in &s.sensitivity {
        w.write_record([
            &r.gap_min.to_string(),
            r.condition.token(),
            r.phase.token(),
            &r.actions.to_string(),
            &fmt_g6(r.share),
            &r.segments.to_string(),
            &r.active_duration_ms.to_string(),
        ])?;
    }
    w.flush()?;

    for n in [2, 3] {
        let mut w = csv_writer(&out.join(format!("ngrams_{n}.csv")))?;
        w.write_record([
            "scope",
            "rank",
            "tuple",
            "weight",
            "share",
            "baseline_share",
            "agent_share",
            "z",
            "p",
        ])?;
        for r in s.ngrams.iter().filter(|r| r.n == n) {
            w.write_record([
                r.scope.as_str(),
                &r.rank.to_string(),
                &tuple_label(&r.tuple),
                &fmt_g6(r.weight),
                &fmt_g6(r.share),
                &fmt_opt(r.baseline_share),
                &fmt_opt(r.agent_share),
                &fmt_opt(r.z),
                &fmt_opt(r.p_value),
            ])?;
        }
        w.flush()?;
    }

    for m in &s.markov {
        let name = format!(
            "markov_{}_{}.csv",
            m.condition.token(),
            phase_token(m.phase)
        );
        let mut w = csv_writer(&out.join(name))?;
        w.write_record(["row", "col", "count", "p", "support"])?;
        for (i, from) in ActionCategory::ALL.iter().enumerate() {
            for (j, to) in ActionCategory::ALL.iter().enumerate() {
                let p = m.probabilities[i].as_ref().map(|r| r[j]);
                w.write_record([
                    from.name(),
                    to.name(),
                    &fmt_g6(m.counts[i][j]),
                    &p.map_or_else(|| "undefined".into(), fmt_g6),
                    &fmt_g6(m.support[i]),
                ])?;
            }
        }
        w.flush()?;
    }

    let mut w = csv_writer(&out.join("acceptance.csv"))?;
    w.write_record([
        "condition",
        "phase",
        "accepted",
        "creates_after_generation",
        "rate",
    ])?;
    for r in &s.acceptance {
        w.write_record([
            Condition::AgentOrganizer.token(),
            phase_token(r.phase),
            &r.accepted.to_string(),
            &r.creates_after_generation.to_string(),
            &r.rate.map_or_else(|| "undefined".into(), fmt_g6),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(&out.join("ranks.csv"))?;
    w.write_record(["scope", "rank", "category", "count", "share"])?;
    for r in &s.ranks {
        w.write_record([
            r.scope().label().as_str(),
            &r.rank.to_string(),
            r.category.name(),
            &r.count.to_string(),
            &fmt_g6(r.share),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub name: String,
    pub scope: String,
    /// `None` when the test is degenerate on this data.
    pub statistic: Option<f64>,
    pub df: Option<u64>,
    pub p_value: Option<f64>,
    pub effect_size: Option<f64>,
    pub n: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub category: ActionCategory,
    pub condition: Condition,
    pub observed: u64,
    pub expected: f64,
    pub residual: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub actions: u64,
    pub residual_kind: ResidualKind,
    pub tests: Vec<TestRow>,
    pub residuals: Vec<ResidualRow>,
    pub notes: Vec<String>,
}

pub fn run_stats(actions_path: &Path, cfg: &AnalysisConfig, out: &Path) -> Result<StatsSummary> {
    let actions = load_actions(actions_path)?;
    let conditions = present_conditions(&actions);
    let total = actions.len() as u64;
    let sessions = sessionize(actions, cfg.gap_cutoff_ms(), &basis(cfg, actions_path)?)?;
    let mut s = StatsSummary {
        actions: total,
        residual_kind: cfg.residuals,
        tests: Vec::new(),
        residuals: Vec::new(),
        notes: Vec::new(),
    };

    if conditions.len() < 2 {
        s.notes.push(
            "condition comparison unavailable: fewer than two conditions in the input".into(),
        );
        for (name, scope) in [
            ("chi_square", "category x condition"),
            ("wilcoxon_signed_rank", "actions per designer"),
        ] {
            s.tests.push(TestRow {
                name: name.into(),
                scope: scope.into(),
                statistic: None,
                df: None,
                p_value: None,
                effect_size: None,
                n: Some(total),
            });
        }
    } else {
        let counts: Vec<[u64; ActionCategory::COUNT]> = Condition::ALL
            .iter()
            .map(|&c| category_counts(&sessions, Scope::condition(c)))
            .collect();
        let table = ContingencyTable::new(
            ActionCategory::ALL
                .iter()
                .map(|c| c.name().to_string())
                .collect(),
            Condition::ALL
                .iter()
                .map(|c| c.token().to_string())
                .collect(),
            ActionCategory::ALL
                .iter()
                .map(|c| counts.iter().map(|col| col[c.index()]).collect())
                .collect(),
        )?
        .without_empty_rows()?;
        let chi = chi_square(&table)?;
        s.tests.push(TestRow {
            name: chi.name.clone(),
            scope: "category x condition".into(),
            statistic: Some(chi.statistic),
            df: chi.df,
            p_value: Some(chi.p_value),
            effect_size: chi.effect_size,
            n: Some(table.total()),
        });
        let expected = table.expected()?;
        let z = standardized_residuals(&table, cfg.residuals)?;
        for (i, name) in table.rows.iter().enumerate() {
            let category: ActionCategory = name.parse()?;
            for (j, &condition) in Condition::ALL.iter().enumerate() {
                s.residuals.push(ResidualRow {
                    category,
                    condition,
                    observed: table.counts[i][j],
                    expected: expected[i][j],
                    residual: z[i][j],
                    p_value: special::normal_two_tailed(z[i][j]),
                });
            }
        }

        let totals: Vec<f64> = counts
            .iter()
            .map(|c| c.iter().sum::<u64>() as f64)
            .collect();
        for cat in ActionCategory::ALL {
            let p1 = counts[0][cat.index()] as f64 / totals[0];
            let p2 = counts[1][cat.index()] as f64 / totals[1];
            let t = two_proportion_z(p1, totals[0], p2, totals[1]).ok();
            s.tests.push(TestRow {
                name: "two_proportion_z".into(),
                scope: cat.name().into(),
                statistic: t.as_ref().map(|t| t.statistic),
                df: None,
                p_value: t.as_ref().map(|t| t.p_value),
                effect_size: Some(p2 - p1),
                n: Some(totals[0] as u64 + totals[1] as u64),
            });
        }

        let mut per_designer: BTreeMap<&str, [f64; 2]> = BTreeMap::new();
        for sess in &sessions {
            let j = Condition::ALL
                .iter()
                .position(|c| *c == sess.key.condition)
                .expect("known condition");
            per_designer
                .entry(&sess.key.designer_id)
                .or_insert([f64::NAN; 2])[j] = sess.actions.len() as f64;
        }
        let pairs: Vec<(f64, f64)> = per_designer
            .values()
            .filter(|v| v.iter().all(|x| !x.is_nan()))
            .map(|v| (v[0], v[1]))
            .collect();
        let w = if pairs.is_empty() {
            None
        } else {
            wilcoxon_signed_rank(&pairs).ok()
        };
        s.tests.push(TestRow {
            name: "wilcoxon_signed_rank".into(),
            scope: "actions per designer".into(),
            statistic: w.as_ref().map(|w| w.test.statistic),
            df: None,
            p_value: w.as_ref().map(|w| w.test.p_value),
            effect_size: None,
            n: Some(w.as_ref().map_or(pairs.len(), |w| w.n_used) as u64),
        });
    }
    for note in &s.notes {
        eprintln!("{note}");
    }

    std::fs::create_dir_all(out)?;
    let mut w = csv_writer(&out.join("stats.csv"))?;
    w.write_record(["name", "scope", "statistic", "df", "p", "effect_size", "n"])?;
    for t in &s.tests {
        w.write_record([
            t.name.as_str(),
            t.scope.as_str(),
            &fmt_opt(t.statistic),
            &t.df.map_or_else(String::new, |d| d.to_string()),
            &fmt_opt(t.p_value),
            &t.effect_size.map_or_else(String::new, fmt_g6),
            &t.n.map_or_else(String::new, |n| n.to_string()),
        ])?;
    }
    w.flush()?;
    let mut w = csv_writer(&out.join("residuals.csv"))?;
    w.write_record([
        "category",
        "condition",
        "observed",
        "expected",
        "residual",
        "p",
    ])?;
    for r in &s.residuals {
        w.write_record([
            r.category.name(),
            r.condition.token(),
            &r.observed.to_string(),
            &fmt_g6(r.expected),
            &fmt_g6(r.residual),
            &fmt_g6(r.p_value),
        ])?;
    }
    w.flush()?;
    write_json(&out.join(STATS_JSON), &s)?;
    Ok(s)
}
