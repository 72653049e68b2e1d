//! Renders a sampled action sequence onto a simulated canvas as raw events.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::params::GeneratorParams;
use super::SessionTruth;
use crate::abstraction::{quantize_magnitude, ExclusionReport};
use crate::error::Result;
use crate::ingest::{ArtifactState, EventKind, RawEvent, Size, SystemCode};
use crate::model::{
    ActionCategory, ArtifactGroup, ArtifactKind, Condition, DesignAction, Phase, Subtype,
};
use crate::timeline::{assign_phase, build_timeline};

use ActionCategory::*;

const USER_KINDS: [(ArtifactKind, f64); 6] = [
    (ArtifactKind::Note, 0.40),
    (ArtifactKind::Image, 0.20),
    (ArtifactKind::Drawing, 0.10),
    (ArtifactKind::Column, 0.08),
    (ArtifactKind::Table, 0.07),
    (ArtifactKind::TodoList, 0.15),
];
const MAX_TEXT_CHANGE: f64 = 1000.0;
const CANVAS_SPAN: f64 = 3000.0;

struct Artifact {
    id: String,
    kind: ArtifactKind,
    state: ArtifactState,
}

/// Noise still to be injected after an action, once its final state is known.
struct NoiseCtx {
    ts: i64,
    artifact: Option<usize>,
    prune_before: Option<ArtifactState>,
}

/// The previous action, for concurrency rules.
struct Prev {
    category: ActionCategory,
    artifact: Option<usize>,
    action_index: usize,
    /// Event index of a single-snapshot Elaborate that a concurrent move can join.
    joinable_event: Option<usize>,
}

struct SessionGen<'a> {
    params: &'a GeneratorParams,
    rng: ChaCha8Rng,
    designer: String,
    condition: Condition,
    task: String,
    canvas: Vec<Artifact>,
    events: Vec<RawEvent>,
    actions: Vec<DesignAction>,
    report: ExclusionReport,
    next_group: u64,
    resampled: u64,
}

fn default_size(kind: ArtifactKind) -> Option<Size> {
    let (width, height) = match kind {
        ArtifactKind::Note => (200.0, 200.0),
        ArtifactKind::Image | ArtifactKind::AgentImage => (256.0, 256.0),
        ArtifactKind::Drawing => (300.0, 200.0),
        ArtifactKind::Column | ArtifactKind::Table => (400.0, 600.0),
        ArtifactKind::TodoList => (240.0, 300.0),
        ArtifactKind::Connector => return None,
    };
    Some(Size { width, height })
}

fn draw_weighted<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights
        .iter()
        .rposition(|w| *w > 0.0)
        .expect("some positive weight")
}

impl<'a> SessionGen<'a> {
    fn live(&self, excluded: &[usize], pred: impl Fn(&Artifact) -> bool) -> Vec<usize> {
        (0..self.canvas.len())
            .filter(|&i| {
                !excluded.contains(&i) && !self.canvas[i].state.deleted && pred(&self.canvas[i])
            })
            .collect()
    }

    fn pick(&mut self, from: &[usize]) -> usize {
        from[self.rng.random_range(0..from.len())]
    }

    fn letters(&mut self, n: usize) -> String {
        (0..n)
            .map(|_| char::from(b'a' + self.rng.random_range(0..26u8)))
            .collect()
    }

    fn event(&self, ts: i64, kind: EventKind) -> RawEvent {
        RawEvent {
            timestamp: ts,
            designer_id: self.designer.clone(),
            condition: self.condition,
            task: self.task.clone(),
            event_kind: kind,
            artifact_id: None,
            artifact_kind: None,
            state: None,
            system_code: None,
            tag: None,
            source_line: 0,
        }
    }

    fn snapshot(&mut self, ts: i64, idx: usize, tag: Option<&str>) -> usize {
        let a = &self.canvas[idx];
        let mut ev = self.event(ts, EventKind::StateSnapshot);
        ev.artifact_id = Some(a.id.clone());
        ev.artifact_kind = Some(a.kind);
        ev.state = Some(a.state.clone());
        ev.tag = tag.map(str::to_string);
        self.events.push(ev);
        self.events.len() - 1
    }

    fn system(&mut self, ts: i64, code: SystemCode, tag: Option<&str>) {
        let mut ev = self.event(ts, EventKind::SystemEvent);
        ev.system_code = Some(code);
        ev.tag = tag.map(str::to_string);
        self.events.push(ev);
    }

    fn label(
        &mut self,
        ts: i64,
        phase: Phase,
        subtype: Subtype,
        artifact: Option<usize>,
        raw: Option<f64>,
    ) {
        let mut a = DesignAction::new(
            self.designer.clone(),
            self.condition,
            self.task.clone(),
            ts,
            subtype,
        );
        a.artifact_id = artifact.map(|i| self.canvas[i].id.clone());
        a.raw_magnitude = raw;
        a.phase = Some(phase);
        self.actions.push(a);
    }

    /// Candidate artifacts for a category; `None` means the category needs no artifact.
    fn targets(&self, cat: ActionCategory, excluded: &[usize]) -> Option<Vec<usize>> {
        let spatial = |a: &Artifact| a.kind != ArtifactKind::Connector;
        Some(match cat {
            Elaborate => self.live(excluded, |a| a.kind.has_text()),
            Relocate | Interact => self.live(excluded, spatial),
            Prune => self.live(excluded, |_| true),
            Relate => {
                let nodes = self.live(excluded, spatial);
                if nodes.len() < 2 {
                    Vec::new()
                } else {
                    nodes
                }
            }
            Structure => {
                let members = self.live(&[], |a| {
                    matches!(
                        a.kind.group(),
                        ArtifactGroup::Inspiration | ArtifactGroup::Control
                    )
                });
                self.live(excluded, |a| a.kind.group() == ArtifactGroup::Container)
                    .into_iter()
                    .filter(|&c| {
                        let children = self.canvas[c]
                            .state
                            .child_ids
                            .as_deref()
                            .unwrap_or_default();
                        !children.is_empty()
                            || members
                                .iter()
                                .any(|&m| !children.contains(&self.canvas[m].id))
                    })
                    .collect()
            }
            _ => return None,
        })
    }

    fn sample_category(&mut self, weights: &[f64], excluded: &[usize]) -> ActionCategory {
        let mut w = weights.to_vec();
        loop {
            if w.iter().all(|x| *x <= 0.0) {
                self.resampled += 1;
                return Create;
            }
            let cat = ActionCategory::ALL[draw_weighted(&mut self.rng, &w)];
            match self.targets(cat, excluded) {
                Some(t) if t.is_empty() => {
                    self.resampled += 1;
                    w[cat.index()] = 0.0;
                }
                _ => return cat,
            }
        }
    }

    fn new_artifact(&mut self, kind: ArtifactKind) -> usize {
        let x = self.rng.random::<f64>() * CANVAS_SPAN;
        let y = self.rng.random::<f64>() * CANVAS_SPAN;
        let mut state = ArtifactState::at(x, y);
        state.size = default_size(kind);
        if kind.has_text() {
            let n = self.rng.random_range(0..=12);
            state.text = Some(self.letters(n));
        }
        if kind.group() == ArtifactGroup::Container {
            state.child_ids = Some(Vec::new());
        }
        let id = format!("a{}", self.canvas.len() + 1);
        self.canvas.push(Artifact { id, kind, state });
        self.canvas.len() - 1
    }

    fn text_change(&mut self) -> usize {
        self.params
            .text_change
            .sample(&mut self.rng)
            .round()
            .clamp(1.0, MAX_TEXT_CHANGE) as usize
    }

    /// Move an artifact; returns the rendered displacement.
    fn displace(&mut self, idx: usize) -> f64 {
        let d = self.params.displacement.sample(&mut self.rng);
        let theta = self.rng.random::<f64>() * std::f64::consts::TAU;
        let old = self.canvas[idx].state.position;
        let pos = &mut self.canvas[idx].state.position;
        pos.x = old.x + d * theta.cos();
        pos.y = old.y + d * theta.sin();
        (pos.x - old.x).hypot(pos.y - old.y)
    }

    /// Render one action; returns the touched artifact, a joinable Elaborate event and
    /// the pre-deletion state of a pruned artifact.
    #[allow(clippy::too_many_arguments)]
    fn render(
        &mut self,
        cat: ActionCategory,
        prev_cat: Option<ActionCategory>,
        ts: i64,
        phase: Phase,
        excluded: &[usize],
        may_burst: bool,
    ) -> (Option<usize>, Option<usize>, Option<ArtifactState>) {
        let th = self.params.thresholds;
        match cat {
            Create => {
                let agent = self.condition == Condition::AgentOrganizer
                    && prev_cat == Some(AgentGen)
                    && self.rng.random_bool(self.params.acceptance[phase.index()]);
                let kind = if agent {
                    ArtifactKind::AgentImage
                } else {
                    let w: Vec<f64> = USER_KINDS.iter().map(|k| k.1).collect();
                    USER_KINDS[draw_weighted(&mut self.rng, &w)].0
                };
                let idx = self.new_artifact(kind);
                self.snapshot(ts, idx, None);
                self.label(
                    ts,
                    phase,
                    Subtype::create(kind).expect("user and agent kinds can be created"),
                    Some(idx),
                    None,
                );
                (Some(idx), None, None)
            }
            Elaborate => {
                let cands = self
                    .targets(Elaborate, excluded)
                    .expect("artifact category");
                let idx = self.pick(&cands);
                let c = self.text_change();
                let text: Vec<char> = self.canvas[idx]
                    .state
                    .text
                    .as_deref()
                    .unwrap_or_default()
                    .chars()
                    .collect();
                let delete = text.len() >= c && self.rng.random_bool(0.4);
                let n = self.params.noise;
                let members = if may_burst
                    && c >= n.burst_min as usize
                    && self.rng.random_bool(n.typing_burst)
                {
                    self.rng
                        .random_range(n.burst_min as usize..=(n.burst_max as usize).min(c))
                } else {
                    1
                };
                let mut cuts: Vec<usize> =
                    rand::seq::index::sample(&mut self.rng, c - 1, members - 1)
                        .into_iter()
                        .map(|i| i + 1)
                        .collect();
                cuts.sort_unstable();
                cuts.push(c);
                let added = if delete {
                    String::new()
                } else {
                    self.letters(c)
                };
                let steps: Vec<i64> = (1..members)
                    .map(|_| self.rng.random_range(300..=1000))
                    .collect();
                let mut t = ts - steps.iter().sum::<i64>();
                let mut event = 0;
                for (k, &upto) in cuts.iter().enumerate() {
                    let body: String = if delete {
                        text[..text.len() - upto].iter().collect()
                    } else {
                        text.iter()
                            .copied()
                            .chain(added.chars().take(upto))
                            .collect()
                    };
                    self.canvas[idx].state.text = Some(body);
                    event = self.snapshot(t, idx, None);
                    if k < steps.len() {
                        t += steps[k];
                    }
                }
                self.report.typing_consolidated += members as u64 - 1;
                let group = self.canvas[idx].kind.group();
                let subtype = Subtype::quantized(
                    Elaborate,
                    group,
                    quantize_magnitude(c as f64, &th.elaborate),
                )
                .expect("text-bearing kinds are spatial");
                self.label(ts, phase, subtype, Some(idx), Some(c as f64));
                (Some(idx), (members == 1).then_some(event), None)
            }
            Relocate => {
                let cands = self.targets(Relocate, excluded).expect("artifact category");
                let idx = self.pick(&cands);
                let raw = self.displace(idx);
                self.snapshot(ts, idx, None);
                let group = self.canvas[idx].kind.group();
                let subtype =
                    Subtype::quantized(Relocate, group, quantize_magnitude(raw, &th.relocate))
                        .expect("spatial kinds");
                self.label(ts, phase, subtype, Some(idx), Some(raw));
                (Some(idx), None, None)
            }
            Relate => {
                let nodes = self.targets(Relate, excluded).expect("artifact category");
                let connectors = self.live(excluded, |a| a.kind == ArtifactKind::Connector);
                let idx = if !connectors.is_empty() && nodes.len() >= 3 && self.rng.random_bool(0.3)
                {
                    let idx = self.pick(&connectors);
                    let s = &self.canvas[idx].state;
                    let taken = [s.start_id.clone(), s.end_id.clone()];
                    let free: Vec<usize> = nodes
                        .iter()
                        .copied()
                        .filter(|&n| !taken.contains(&Some(self.canvas[n].id.clone())))
                        .collect();
                    let end = self.pick(&free);
                    self.canvas[idx].state.end_id = Some(self.canvas[end].id.clone());
                    idx
                } else {
                    let a = self.pick(&nodes);
                    let rest: Vec<usize> = nodes.iter().copied().filter(|&n| n != a).collect();
                    let b = self.pick(&rest);
                    let (pa, pb) = (self.canvas[a].state.position, self.canvas[b].state.position);
                    let mut state = ArtifactState::at((pa.x + pb.x) / 2.0, (pa.y + pb.y) / 2.0);
                    state.start_id = Some(self.canvas[a].id.clone());
                    state.end_id = Some(self.canvas[b].id.clone());
                    let id = format!("a{}", self.canvas.len() + 1);
                    self.canvas.push(Artifact {
                        id,
                        kind: ArtifactKind::Connector,
                        state,
                    });
                    self.canvas.len() - 1
                };
                self.snapshot(ts, idx, None);
                self.label(ts, phase, Subtype::relate(), Some(idx), None);
                (Some(idx), None, None)
            }
            Structure => {
                let containers = self
                    .targets(Structure, excluded)
                    .expect("artifact category");
                let idx = self.pick(&containers);
                let members = self.live(&[], |a| {
                    matches!(
                        a.kind.group(),
                        ArtifactGroup::Inspiration | ArtifactGroup::Control
                    )
                });
                let children = self.canvas[idx].state.child_ids.clone().unwrap_or_default();
                let addable: Vec<usize> = members
                    .into_iter()
                    .filter(|&m| !children.contains(&self.canvas[m].id))
                    .collect();
                let mut next = children.clone();
                if !children.is_empty() && (addable.is_empty() || self.rng.random_bool(0.3)) {
                    next.remove(self.rng.random_range(0..children.len()));
                } else {
                    let m = self.pick(&addable);
                    next.push(self.canvas[m].id.clone());
                }
                self.canvas[idx].state.child_ids = Some(next);
                self.snapshot(ts, idx, None);
                self.label(ts, phase, Subtype::structure(), Some(idx), None);
                (Some(idx), None, None)
            }
            Prune => {
                let cands = self.targets(Prune, excluded).expect("artifact category");
                let idx = self.pick(&cands);
                let before = self.canvas[idx].state.clone();
                self.canvas[idx].state.deleted = true;
                self.snapshot(ts, idx, None);
                self.label(
                    ts,
                    phase,
                    Subtype::prune(self.canvas[idx].kind.group()),
                    Some(idx),
                    None,
                );
                (Some(idx), None, Some(before))
            }
            Interact => {
                let cands = self.targets(Interact, excluded).expect("artifact category");
                let idx = self.pick(&cands);
                let comment = self.rng.random_bool(0.4);
                let s = &mut self.canvas[idx].state;
                let counter = if comment {
                    &mut s.comment_count
                } else {
                    &mut s.reaction_count
                };
                *counter = Some(counter.unwrap_or(0) + 1);
                self.snapshot(ts, idx, None);
                self.label(ts, phase, Subtype::interact(comment), Some(idx), None);
                (Some(idx), None, None)
            }
            AgentGen | PromptGen | ImageEdit | IntentEdit => {
                let (code, subtype) = match cat {
                    AgentGen => (
                        SystemCode::AgentGen,
                        Subtype::system(AgentGen).expect("system subtype"),
                    ),
                    PromptGen => (
                        SystemCode::PromptGen,
                        Subtype::system(PromptGen).expect("system subtype"),
                    ),
                    ImageEdit => (
                        SystemCode::ImageEdit,
                        Subtype::system(ImageEdit).expect("system subtype"),
                    ),
                    _ => {
                        if self.rng.random_bool(0.5) {
                            (SystemCode::IntentEditGlobal, Subtype::intent_edit(true))
                        } else {
                            (SystemCode::IntentEditLocal, Subtype::intent_edit(false))
                        }
                    }
                };
                self.system(ts, code, None);
                self.label(ts, phase, subtype, None, None);
                (None, None, None)
            }
        }
    }

    /// Move the artifact of a single-snapshot Elaborate inside that same snapshot.
    fn join_move(&mut self, prev: &Prev, event: usize, ts: i64, phase: Phase) {
        let idx = prev.artifact.expect("elaborate touches an artifact");
        let raw = self.displace(idx);
        self.events[event].state = Some(self.canvas[idx].state.clone());
        let group = self.canvas[idx].kind.group();
        let subtype = Subtype::quantized(
            Relocate,
            group,
            quantize_magnitude(raw, &self.params.thresholds.relocate),
        )
        .expect("spatial kinds");
        self.label(ts, phase, subtype, Some(idx), Some(raw));
        let g = Some(self.next_group);
        self.next_group += 1;
        self.actions[prev.action_index].concurrent_group = g;
        self.actions
            .last_mut()
            .expect("just labelled")
            .concurrent_group = g;
        self.report.co_emitted += 1;
    }

    fn inject_noise(&mut self, ctx: NoiseCtx) {
        let n = self.params.noise;
        if let Some(idx) = ctx.artifact {
            if self.rng.random_bool(n.duplicate) {
                self.snapshot(ctx.ts, idx, None);
                self.report.duplicates_no_change += 1;
            }
            if self.rng.random_bool(n.auto_save) {
                self.snapshot(ctx.ts + 200, idx, Some("auto_save"));
                self.report.system_noise += 1;
            }
        }
        if self.rng.random_bool(n.protocol) {
            self.system(ctx.ts + 300, SystemCode::PromptGen, Some("interview"));
            self.report.protocol_out_of_scope += 1;
        }
        if let Some(idx) = ctx.artifact {
            let resizable =
                !self.canvas[idx].state.deleted && self.canvas[idx].state.size.is_some();
            if resizable && self.rng.random_bool(n.resize) {
                let grow = self.rng.random_range(5..60) as f64;
                if let Some(size) = self.canvas[idx].state.size.as_mut() {
                    size.width += grow;
                }
                self.snapshot(ctx.ts + 500, idx, None);
                self.report.non_significant += 1;
            }
            if let Some(before) = ctx.prune_before {
                if self.rng.random_bool(n.reappear) {
                    let at = ctx.ts + self.rng.random_range(1000..=4000);
                    let saved = std::mem::replace(&mut self.canvas[idx].state, before);
                    self.snapshot(at, idx, None);
                    self.canvas[idx].state = saved;
                    self.report.post_delete_reappear += 1;
                }
            }
        }
    }
}

/// Timestamps of one session and which actions share their predecessor's timestamp.
fn schedule(
    params: &GeneratorParams,
    rng: &mut ChaCha8Rng,
    start_ms: i64,
) -> (Vec<i64>, Vec<bool>) {
    let n = params.session_length;
    let t = &params.timing;
    let extra = (t.mean_extra_gap_ms > 0.0)
        .then(|| Exp::new(1.0 / t.mean_extra_gap_ms).expect("positive rate"));
    let mut ts = Vec::with_capacity(n);
    let mut concurrent = vec![false; n];
    let mut now = start_ms;
    ts.push(now);
    for c in concurrent.iter_mut().skip(1) {
        if rng.random_bool(params.concurrency) {
            *c = true;
        } else if rng.random_bool(t.break_rate) {
            now += rng.random_range(t.break_min_ms..=t.break_max_ms);
        } else {
            now += t.min_gap_ms + extra.as_ref().map_or(0, |e| e.sample(rng).round() as i64);
        }
        ts.push(now);
    }
    (ts, concurrent)
}

pub(super) fn generate_session(
    params: &GeneratorParams,
    designer: String,
    condition: Condition,
    task: String,
    seed: u64,
    start_ms: i64,
) -> Result<(Vec<RawEvent>, SessionTruth)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ts, concurrent) = schedule(params, &mut rng, start_ms);
    let timeline = build_timeline(&ts, params.gap_cutoff_ms)?;
    let bounds = timeline.boundaries();
    let phases = timeline
        .offsets
        .iter()
        .map(|&o| assign_phase(o, &bounds))
        .collect::<Result<Vec<Phase>>>()?;

    let mut g = SessionGen {
        params,
        rng,
        designer,
        condition,
        task,
        canvas: Vec::new(),
        events: Vec::new(),
        actions: Vec::new(),
        report: ExclusionReport::default(),
        next_group: 0,
        resampled: 0,
    };
    let mut prev: Option<Prev> = None;
    let mut pending: Option<NoiseCtx> = None;
    // Artifacts touched at the current timestamp; deferred noise snapshots assume no
    // later action at that timestamp changes them.
    let mut touched: Vec<usize> = Vec::new();
    for i in 0..ts.len() {
        let phase = phases[i];
        if !concurrent[i] {
            touched.clear();
        }
        let excluded = touched.as_slice();
        let weights = match &prev {
            None => params.initial.clone(),
            Some(p) => params.matrix(condition, phase)?[p.category.index()].clone(),
        };
        let join = prev
            .as_ref()
            .filter(|p| concurrent[i] && p.category == Elaborate)
            .and_then(|p| p.joinable_event);
        // A joined move targets the Elaborate's own artifact, so it is drawn first and
        // the rest is sampled conditionally.
        let cat = if join.is_some() {
            let mut w = weights;
            if ActionCategory::ALL[draw_weighted(&mut g.rng, &w)] == Relocate {
                Relocate
            } else {
                w[Relocate.index()] = 0.0;
                g.sample_category(&w, excluded)
            }
        } else {
            g.sample_category(&weights, excluded)
        };
        if let (Some(event), Relocate) = (join, cat) {
            let p = prev.take().expect("join needs a previous action");
            g.join_move(&p, event, ts[i], phase);
            prev = Some(Prev {
                category: Relocate,
                joinable_event: None,
                ..p
            });
            continue;
        }
        if let Some(ctx) = pending.take() {
            g.inject_noise(ctx);
        }
        let may_burst = !concurrent[i] && concurrent.get(i + 1).is_none_or(|c| !c);
        let (artifact, joinable_event, prune_before) = g.render(
            cat,
            prev.as_ref().map(|p| p.category),
            ts[i],
            phase,
            excluded,
            may_burst,
        );
        touched.extend(artifact);
        prev = Some(Prev {
            category: cat,
            artifact,
            action_index: g.actions.len() - 1,
            joinable_event,
        });
        pending = Some(NoiseCtx {
            ts: ts[i],
            artifact,
            prune_before,
        });
    }
    if let Some(ctx) = pending.take() {
        g.inject_noise(ctx);
    }

    let mut report = g.report;
    report.raw_total = g.events.len() as u64;
    report.clean_total = report.raw_total - report.cleaning_exclusions();
    report.action_total = g.actions.len() as u64 - report.co_emitted;
    g.events.sort_by_key(|e| e.timestamp);
    let truth = SessionTruth {
        designer_id: g.designer,
        condition,
        task: g.task,
        expected: report,
        resampled: g.resampled,
        actions: g.actions,
    };
    Ok((g.events, truth))
}
