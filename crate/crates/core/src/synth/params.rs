use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::abstraction::Thresholds;
use crate::error::{Error, Result};
use crate::model::{ActionCategory, Condition, Phase};

const K: usize = ActionCategory::COUNT;
/// Upper-quartile point of the standard normal.
const Z75: f64 = 0.674_489_750_196_081_7;

/// Log-normal with separate spreads below and above the median, so all three
/// quartiles can be matched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitLogNormal {
    pub median: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
}

impl SplitLogNormal {
    pub fn from_quartiles(q1: f64, q2: f64, q3: f64) -> SplitLogNormal {
        SplitLogNormal {
            median: q2,
            sigma_lo: (q2 / q1).ln() / Z75,
            sigma_hi: (q3 / q2).ln() / Z75,
        }
    }

    pub fn quartiles(&self) -> (f64, f64, f64) {
        (
            self.median * (-Z75 * self.sigma_lo).exp(),
            self.median,
            self.median * (Z75 * self.sigma_hi).exp(),
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        let sigma = if z < 0.0 {
            self.sigma_lo
        } else {
            self.sigma_hi
        };
        self.median * (z * sigma).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRates {
    /// Per action: an `auto_save`-tagged copy of the touched artifact.
    pub auto_save: f64,
    /// Per snapshot action: an identical re-send at the same timestamp.
    pub duplicate: f64,
    /// Per eligible Elaborate: typed as a burst of intermediate snapshots.
    pub typing_burst: f64,
    pub burst_min: u32,
    pub burst_max: u32,
    /// Per Prune: the artifact flickers back unchanged shortly after deletion.
    pub reappear: f64,
    /// Per action: an `interview`-tagged out-of-scope record.
    pub protocol: f64,
    /// Per action on a sized artifact: a resize with no semantic meaning.
    pub resize: f64,
}

impl NoiseRates {
    pub fn none() -> NoiseRates {
        NoiseRates {
            auto_save: 0.0,
            duplicate: 0.0,
            typing_burst: 0.0,
            burst_min: 2,
            burst_max: 2,
            reappear: 0.0,
            protocol: 0.0,
            resize: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Smallest gap between non-concurrent actions. Injected noise lives inside it.
    pub min_gap_ms: i64,
    pub mean_extra_gap_ms: f64,
    /// Per action: the gap is a break long enough to split the active timeline.
    pub break_rate: f64,
    pub break_min_ms: i64,
    pub break_max_ms: i64,
}

/// Transition policy for one condition and phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePolicy {
    pub condition: Condition,
    pub phase: Phase,
    /// `matrix[from][to]` over the categories in canonical order.
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub seed: u64,
    pub designers: usize,
    pub conditions: Vec<Condition>,
    /// Actions per designer and condition.
    pub session_length: usize,
    pub gap_cutoff_ms: i64,
    /// Distribution of the first action of a session.
    pub initial: Vec<f64>,
    pub policies: Vec<PhasePolicy>,
    /// Per phase: probability that a creation right after an agent generation is the agent's image.
    pub acceptance: [f64; 3],
    pub noise: NoiseRates,
    /// Displacement in px.
    pub displacement: SplitLogNormal,
    /// Characters added or removed by one edit.
    pub text_change: SplitLogNormal,
    /// Probability that an action shares its predecessor's timestamp.
    pub concurrency: f64,
    pub timing: Timing,
    /// Used to label ground-truth magnitudes.
    pub thresholds: Thresholds,
}

fn check_distribution(row: &[f64], what: &str) -> Result<()> {
    if row.len() != K {
        return Err(Error::InvalidParams(format!(
            "{what}: expected {K} entries, got {}",
            row.len()
        )));
    }
    if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidParams(format!(
            "{what}: probabilities must lie in [0,1]"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParams(format!(
            "{what}: sums to {sum}, not 1"
        )));
    }
    Ok(())
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.designers == 0 || self.session_length == 0 || self.conditions.is_empty() {
            return bad("designers, session_length and conditions must be non-empty".into());
        }
        let n = &self.noise;
        let mut rates = vec![
            ("auto_save", n.auto_save),
            ("duplicate", n.duplicate),
            ("typing_burst", n.typing_burst),
            ("reappear", n.reappear),
            ("protocol", n.protocol),
            ("resize", n.resize),
            ("concurrency", self.concurrency),
            ("break_rate", self.timing.break_rate),
        ];
        rates.extend(self.acceptance.iter().map(|&a| ("acceptance", a)));
        for (name, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} rate {r} outside [0,1]"));
            }
        }
        if n.burst_min < 2 || n.burst_max < n.burst_min || n.burst_max > 8 {
            return bad("burst length must satisfy 2 <= min <= max <= 8".into());
        }
        let t = &self.timing;
        if t.min_gap_ms < 15_000
            || t.mean_extra_gap_ms < 0.0
            || t.break_min_ms <= self.gap_cutoff_ms
            || t.break_max_ms < t.break_min_ms
        {
            return bad(
                "timing needs min_gap >= 15 s and breaks longer than the gap cutoff".into(),
            );
        }
        for d in [self.displacement, self.text_change] {
            if !(d.median > 0.0 && d.sigma_lo > 0.0 && d.sigma_hi > 0.0) {
                return bad(format!("invalid magnitude distribution {d:?}"));
            }
        }
        check_distribution(&self.initial, "initial distribution")?;
        for &c in &self.conditions {
            for p in Phase::ALL {
                let m = self.matrix(c, p)?;
                if m.len() != K {
                    return bad(format!("{c}/{p}: matrix needs {K} rows"));
                }
                for (i, row) in m.iter().enumerate() {
                    check_distribution(row, &format!("{c}/{p} row {}", ActionCategory::ALL[i]))?;
                }
                if c != Condition::AgentOrganizer
                    && m.iter()
                        .any(|row| row[ActionCategory::AgentGen.index()] > 0.0)
                {
                    return bad(format!(
                        "{c}/{p}: agent generation is only possible with the agent organizer"
                    ));
                }
            }
        }
        if self.conditions.contains(&Condition::Baseline)
            && self.initial[ActionCategory::AgentGen.index()] > 0.0
        {
            return bad(
                "initial distribution starts baseline sessions with an agent generation".into(),
            );
        }
        Ok(())
    }

    pub fn matrix(&self, condition: Condition, phase: Phase) -> Result<&Vec<Vec<f64>>> {
        self.policies
            .iter()
            .find(|p| p.condition == condition && p.phase == phase)
            .map(|p| &p.matrix)
            .ok_or_else(|| Error::InvalidParams(format!("no policy for {condition}/{phase}")))
    }

    /// Same policies with every noise source and concurrency switched off.
    pub fn noiseless(&self) -> GeneratorParams {
        GeneratorParams {
            noise: NoiseRates::none(),
            concurrency: 0.0,
            ..self.clone()
        }
    }
}
