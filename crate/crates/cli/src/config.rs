use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use designseq_core::abstraction::{CleaningConfig, TimeWindow};
use designseq_core::mining::{MiningOptions, PermutationOptions, DEFAULT_PAIR_CAP};
use designseq_core::stats::ResidualKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Fixed pilot quartiles.
    #[default]
    Paper,
    /// Quartiles of the magnitudes in the input.
    Recompute,
}

impl ThresholdMode {
    pub fn token(self) -> &'static str {
        match self {
            ThresholdMode::Paper => "paper",
            ThresholdMode::Recompute => "recompute",
        }
    }
}

/// What the active timeline is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMode {
    #[default]
    Actions,
    /// All clean events, including those without an action.
    Events,
}

/// Analysis settings, read from a TOML file. Every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub typing_window_s: f64,
    pub reappear_window_s: f64,
    pub noise_codes: Vec<String>,
    pub protocol_codes: Vec<String>,
    pub task_windows: BTreeMap<String, TimeWindow>,
    pub thresholds: ThresholdMode,
    pub gap_min: f64,
    pub timeline_basis: BasisMode,
    pub phase_bounded: bool,
    pub strict_permutations: bool,
    pub permutation_cap: usize,
    pub top_k: usize,
    pub residuals: ResidualKind,
    /// Share of unparseable input lines above which `abstract` exits with status 2.
    pub max_schema_error_rate: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let c = CleaningConfig::default();
        AnalysisConfig {
            typing_window_s: c.typing_window_ms as f64 / 1000.0,
            reappear_window_s: c.reappear_window_ms as f64 / 1000.0,
            noise_codes: c.noise_codes,
            protocol_codes: c.protocol_codes,
            task_windows: c.task_windows,
            thresholds: ThresholdMode::Paper,
            gap_min: 30.0,
            timeline_basis: BasisMode::Actions,
            phase_bounded: true,
            strict_permutations: false,
            permutation_cap: DEFAULT_PAIR_CAP,
            top_k: 10,
            residuals: ResidualKind::Adjusted,
            max_schema_error_rate: 0.05,
        }
    }
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<AnalysisConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: AnalysisConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.typing_window_s >= 0.0 && self.reappear_window_s >= 0.0) {
            bail!("cleaning windows must be non-negative");
        }
        if self.gap_min.is_nan() || self.gap_min <= 0.0 {
            bail!("gap_min must be positive, got {}", self.gap_min);
        }
        if self.top_k == 0 {
            bail!("top_k must be at least 1");
        }
        if self.permutation_cap == 0 {
            bail!("permutation_cap must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.max_schema_error_rate) {
            bail!("max_schema_error_rate must lie in [0,1]");
        }
        Ok(())
    }

    pub fn cleaning(&self) -> CleaningConfig {
        CleaningConfig {
            typing_window_ms: (self.typing_window_s * 1000.0).round() as i64,
            reappear_window_ms: (self.reappear_window_s * 1000.0).round() as i64,
            noise_codes: self.noise_codes.clone(),
            protocol_codes: self.protocol_codes.clone(),
            task_windows: self.task_windows.clone(),
        }
    }

    pub fn mining(&self) -> MiningOptions {
        MiningOptions {
            permutation: PermutationOptions {
                strict: self.strict_permutations,
                cap: self.permutation_cap,
            },
            phase_bounded: self.phase_bounded,
        }
    }

    pub fn gap_cutoff_ms(&self) -> i64 {
        minutes_to_ms(self.gap_min)
    }
}

pub fn minutes_to_ms(minutes: f64) -> i64 {
    (minutes * 60_000.0).round() as i64
}
