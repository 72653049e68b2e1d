//! Figures and the combined summary, assembled from the stage sidecars.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use designseq_core::model::{ActionCategory, Condition};

use crate::output::{csv_writer, fmt_g6, write_json};
use crate::pipeline::{
    AbstractSummary, MineSummary, StatsSummary, ABSTRACT_JSON, MINE_JSON, STATS_JSON,
};
use crate::svg::heatmap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub condition: Condition,
    pub category: ActionCategory,
    pub count: u64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZRow {
    pub category: ActionCategory,
    pub baseline: u64,
    pub agent_organizer: u64,
    /// Residual of the agent-organizer cell; positive means over-represented there.
    pub residual: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub abstraction: Option<AbstractSummary>,
    pub mining: MineSummary,
    pub stats: StatsSummary,
    pub distribution: Vec<DistributionRow>,
    pub zscores: Vec<ZRow>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f))
        .with_context(|| format!("parsing {}", path.display()))
}

pub fn run_report(out: &Path) -> Result<Summary> {
    let missing: Vec<&str> = [MINE_JSON, STATS_JSON]
        .into_iter()
        .filter(|f| !out.join(f).is_file())
        .collect();
    if !missing.is_empty() {
        bail!(
            "missing inputs in {}: {}",
            out.display(),
            missing.join(", ")
        );
    }
    let mining: MineSummary = read_json(&out.join(MINE_JSON))?;
    let stats: StatsSummary = read_json(&out.join(STATS_JSON))?;
    let abstract_path = out.join(ABSTRACT_JSON);
    let abstraction = if abstract_path.is_file() {
        Some(read_json(&abstract_path)?)
    } else {
        None
    };

    let mut distribution = Vec::new();
    for &c in &mining.conditions {
        for cat in ActionCategory::ALL {
            if let Some(r) = mining
                .ranks
                .iter()
                .find(|r| r.condition == Some(c) && r.phase.is_none() && r.category == cat)
            {
                distribution.push(DistributionRow {
                    condition: c,
                    category: cat,
                    count: r.count,
                    percent: 100.0 * r.share,
                });
            }
        }
    }

    let observed = |cat, cond| {
        stats
            .residuals
            .iter()
            .find(|r| r.category == cat && r.condition == cond)
            .map_or(0, |r| r.observed)
    };
    let zscores: Vec<ZRow> = stats
        .residuals
        .iter()
        .filter(|r| r.condition == Condition::AgentOrganizer)
        .map(|r| ZRow {
            category: r.category,
            baseline: observed(r.category, Condition::Baseline),
            agent_organizer: r.observed,
            residual: r.residual,
            p_value: r.p_value,
        })
        .collect();

    let mut w = csv_writer(&out.join("distribution.csv"))?;
    w.write_record(["condition", "category", "count", "percent"])?;
    for r in &distribution {
        w.write_record([
            r.condition.token(),
            r.category.name(),
            &r.count.to_string(),
            &fmt_g6(r.percent),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(&out.join("zscores.csv"))?;
    w.write_record(["category", "baseline", "agent_organizer", "residual", "p"])?;
    for r in &zscores {
        w.write_record([
            r.category.name(),
            &r.baseline.to_string(),
            &r.agent_organizer.to_string(),
            &fmt_g6(r.residual),
            &fmt_g6(r.p_value),
        ])?;
    }
    w.flush()?;

    for &c in &mining.conditions {
        let mut shares = [[0.0; 3]; ActionCategory::COUNT];
        for r in mining.ranks.iter().filter(|r| r.condition == Some(c)) {
            if let Some(p) = r.phase {
                shares[r.category.index()][p.index()] = r.share;
            }
        }
        let title = format!("{c}: share of actions per phase (%)");
        std::fs::write(
            out.join(format!("heatmap_{}.svg", c.token())),
            heatmap(&title, &shares),
        )?;
    }

    let summary = Summary {
        abstraction,
        mining,
        stats,
        distribution,
        zscores,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
