use super::params::{GeneratorParams, NoiseRates, PhasePolicy, SplitLogNormal, Timing};
use crate::abstraction::Thresholds;
use crate::model::{ActionCategory, Condition, Phase};
use crate::timeline::DEFAULT_GAP_CUTOFF_MS;

use ActionCategory::*;

const K: usize = ActionCategory::COUNT;

/// Overall category mix each row drifts toward.
fn target_mix(condition: Condition) -> [f64; K] {
    let pairs: &[(ActionCategory, f64)] = match condition {
        Condition::Baseline => &[
            (Relocate, 0.47),
            (Create, 0.20),
            (Relate, 0.0945),
            (Elaborate, 0.05),
            (Prune, 0.06),
            (Structure, 0.04),
            (Interact, 0.03),
            (PromptGen, 0.025),
            (ImageEdit, 0.015),
            (IntentEdit, 0.0155),
        ],
        Condition::AgentOrganizer => &[
            (Relocate, 0.36),
            (Create, 0.23),
            (Relate, 0.134),
            (AgentGen, 0.06),
            (Elaborate, 0.045),
            (Prune, 0.05),
            (Structure, 0.035),
            (Interact, 0.025),
            (PromptGen, 0.02),
            (ImageEdit, 0.016),
            (IntentEdit, 0.025),
        ],
    };
    let mut mix = [0.0; K];
    for &(c, p) in pairs {
        mix[c.index()] = p;
    }
    mix
}

/// Row with fixed probabilities for `fixed`, the remainder spread over the other
/// categories in proportion to `mix`.
fn pinned_row(mix: &[f64; K], fixed: &[(ActionCategory, f64)]) -> Vec<f64> {
    let pinned: f64 = fixed.iter().map(|(_, p)| p).sum();
    let free: f64 = (0..K)
        .filter(|&j| fixed.iter().all(|(c, _)| c.index() != j))
        .map(|j| mix[j])
        .sum();
    let mut row: Vec<f64> = (0..K).map(|j| (1.0 - pinned) * mix[j] / free).collect();
    for &(c, p) in fixed {
        row[c.index()] = p;
    }
    row
}

fn sticky_row(mix: &[f64; K], from: ActionCategory, stickiness: f64) -> Vec<f64> {
    let mut row: Vec<f64> = mix.iter().map(|p| (1.0 - stickiness) * p).collect();
    row[from.index()] += stickiness;
    row
}

fn policy(condition: Condition, phase: Phase) -> PhasePolicy {
    let mix = target_mix(condition);
    let p = phase.index();
    let relocate_self = match condition {
        Condition::Baseline => [0.6151, 0.6885, 0.5889][p],
        Condition::AgentOrganizer => [0.4989, 0.5255, 0.5844][p],
    };
    let matrix = ActionCategory::ALL
        .iter()
        .map(|&from| match from {
            Relocate => pinned_row(&mix, &[(Relocate, relocate_self)]),
            AgentGen if condition == Condition::AgentOrganizer => {
                let self_loop = [0.3333, 0.4189, 0.4314][p];
                let create = [0.5556, 0.3784, 0.4510][p];
                pinned_row(&mix, &[(AgentGen, self_loop), (Create, create)])
            }
            // Unreachable without the organizer.
            AgentGen => mix.to_vec(),
            Relate => sticky_row(&mix, from, 0.25),
            _ => sticky_row(&mix, from, 0.15),
        })
        .collect();
    PhasePolicy {
        condition,
        phase,
        matrix,
    }
}

/// Policies carrying the reported transition structure: phase-specific Relocate
/// self-loops, the AgentGen self-loop and AgentGen→Create probabilities, and a
/// per-phase acceptance of agent images.
pub fn preset_paper_like() -> GeneratorParams {
    let mut initial = vec![0.0; K];
    initial[Create.index()] = 1.0;
    GeneratorParams {
        seed: 0,
        designers: 10,
        conditions: Condition::ALL.to_vec(),
        session_length: 500,
        gap_cutoff_ms: DEFAULT_GAP_CUTOFF_MS,
        initial,
        policies: Condition::ALL
            .iter()
            .flat_map(|&c| Phase::ALL.iter().map(move |&p| policy(c, p)))
            .collect(),
        acceptance: [0.60, 0.8929, 0.9565],
        noise: NoiseRates {
            auto_save: 0.05,
            duplicate: 0.05,
            typing_burst: 0.5,
            burst_min: 2,
            burst_max: 8,
            reappear: 0.3,
            protocol: 0.01,
            resize: 0.03,
        },
        displacement: SplitLogNormal::from_quartiles(87.0, 302.0, 871.0),
        text_change: SplitLogNormal::from_quartiles(3.0, 12.0, 50.0),
        concurrency: 0.01,
        timing: Timing {
            min_gap_ms: 15_000,
            mean_extra_gap_ms: 40_000.0,
            break_rate: 0.01,
            break_min_ms: 35 * 60_000,
            break_max_ms: 90 * 60_000,
        },
        thresholds: Thresholds::paper(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_is_valid() {
        let p = preset_paper_like();
        p.validate().unwrap();
        let m = p.matrix(Condition::AgentOrganizer, Phase::Mid).unwrap();
        assert_eq!(m[AgentGen.index()][AgentGen.index()], 0.4189);
        assert_eq!(m[AgentGen.index()][Create.index()], 0.3784);
        let b = p.matrix(Condition::Baseline, Phase::Early).unwrap();
        assert_eq!(b[Relocate.index()][Relocate.index()], 0.6151);
        assert!(b.iter().all(|row| row[AgentGen.index()] == 0.0));
    }

    #[test]
    fn invalid_rows_rejected() {
        let mut p = preset_paper_like();
        p.policies[0].matrix[0][0] += 0.1;
        assert!(p.validate().is_err());
        let mut p = preset_paper_like();
        p.policies[0].matrix[0][AgentGen.index()] = p.policies[0].matrix[0][Create.index()];
        p.policies[0].matrix[0][Create.index()] = 0.0;
        assert!(p.validate().is_err(), "agent generation in the baseline");
        let mut p = preset_paper_like();
        p.noise.duplicate = 1.5;
        assert!(p.validate().is_err());
    }
}
