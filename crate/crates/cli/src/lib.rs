//! `designseq` command line: abstraction, mining, statistics and reports over canvas logs.

pub mod config;
pub mod output;
pub mod pipeline;
pub mod report;
pub mod svg;

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use designseq_core::ingest::write_events;
use designseq_core::synth::{generate, preset_paper_like, GeneratorParams};

use config::{AnalysisConfig, ThresholdMode};
use output::{write_json, write_jsonl};
use pipeline::ACTIONS_FILE;

/// Input or intermediate data too broken to analyse. Exits with status 2.
#[derive(Debug)]
pub struct DataQuality(pub String);

impl fmt::Display for DataQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DataQuality {}

/// 2 for data-quality failures, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<DataQuality>()) {
        2
    } else {
        1
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "designseq",
    version,
    about = "Semantic action abstraction and sequence mining for canvas interaction logs"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// TOML analysis config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Idle gap (minutes) that splits the active timeline.
    #[arg(long = "gap-min", global = true)]
    pub gap_min: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub thresholds: Option<ThresholdMode>,
    /// Generator seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    PaperLike,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "paper-like")]
    pub preset: Preset,
    #[arg(long)]
    pub designers: Option<usize>,
    /// Actions per designer and condition.
    #[arg(long)]
    pub session_length: Option<usize>,
    /// Switch off all injected noise and concurrency.
    #[arg(long)]
    pub noiseless: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean raw event logs and classify them into design actions.
    Abstract {
        /// JSONL files or directories of them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// N-grams, transition matrices, acceptance rates and ranks.
    Mine {
        /// Defaults to actions.jsonl in the output directory.
        #[arg(long)]
        actions: Option<PathBuf>,
    },
    /// Chi-square, residuals, two-proportion and Wilcoxon tests across conditions.
    Stats {
        #[arg(long)]
        actions: Option<PathBuf>,
    },
    /// Distribution and residual tables, heatmaps and summary.json.
    Report,
    /// Write a synthetic event log with ground truth.
    Synth(SynthArgs),
    /// Every stage in order; generates a synthetic log when no input is given.
    RunAll {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        synth: SynthArgs,
    },
}

pub fn load_config(g: &GlobalOpts) -> Result<AnalysisConfig> {
    let mut cfg = match &g.config {
        Some(p) => AnalysisConfig::load(p)?,
        None => AnalysisConfig::default(),
    };
    if let Some(m) = g.gap_min {
        cfg.gap_min = m;
    }
    if let Some(t) = g.thresholds {
        cfg.thresholds = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn synth_params(args: &SynthArgs, seed: Option<u64>) -> GeneratorParams {
    let mut p = match args.preset {
        Preset::PaperLike => preset_paper_like(),
    };
    if args.noiseless {
        p = p.noiseless();
    }
    if let Some(s) = seed {
        p.seed = s;
    }
    if let Some(d) = args.designers {
        p.designers = d;
    }
    if let Some(n) = args.session_length {
        p.session_length = n;
    }
    p
}

/// Writes `events.jsonl`, `ground_truth.jsonl` and `params.json`.
pub fn run_synth(params: &GeneratorParams, out: &Path) -> Result<PathBuf> {
    let data = generate(params)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let events = out.join("events.jsonl");
    let file =
        std::fs::File::create(&events).with_context(|| format!("creating {}", events.display()))?;
    let mut w = std::io::BufWriter::new(file);
    write_events(&mut w, &data.events)?;
    std::io::Write::flush(&mut w)?;
    write_jsonl(&out.join("ground_truth.jsonl"), &data.truth)?;
    write_json(&out.join("params.json"), params)?;
    Ok(events)
}

pub fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let cfg = load_config(g)?;
    let actions_or_default =
        |a: &Option<PathBuf>| a.clone().unwrap_or_else(|| g.out.join(ACTIONS_FILE));
    match &cli.command {
        Command::Abstract { inputs } => {
            pipeline::run_abstract(inputs, &cfg, &g.out)?;
        }
        Command::Mine { actions } => {
            pipeline::run_mine(&actions_or_default(actions), &cfg, &g.out)?;
        }
        Command::Stats { actions } => {
            pipeline::run_stats(&actions_or_default(actions), &cfg, &g.out)?;
        }
        Command::Report => {
            report::run_report(&g.out)?;
        }
        Command::Synth(args) => {
            run_synth(&synth_params(args, g.seed), &g.out)?;
        }
        Command::RunAll { inputs, synth } => {
            let inputs = if inputs.is_empty() {
                vec![run_synth(&synth_params(synth, g.seed), &g.out)?]
            } else {
                inputs.clone()
            };
            pipeline::run_abstract(&inputs, &cfg, &g.out)?;
            let actions = g.out.join(ACTIONS_FILE);
            pipeline::run_mine(&actions, &cfg, &g.out)?;
            pipeline::run_stats(&actions, &cfg, &g.out)?;
            report::run_report(&g.out)?;
        }
    }
    Ok(())
}
