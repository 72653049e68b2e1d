use serde::{Deserialize, Serialize};

use super::{special, TestResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    /// `counts[row][col]`
    pub counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(
        rows: Vec<String>,
        cols: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Result<ContingencyTable> {
        if rows.len() < 2 || cols.len() < 2 {
            return Err(Error::InvalidTable(format!(
                "need at least 2x2, got {}x{}",
                rows.len(),
                cols.len()
            )));
        }
        if counts.len() != rows.len() || counts.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::InvalidTable("counts do not match the labels".into()));
        }
        let t = ContingencyTable { rows, cols, counts };
        if t.total() == 0 {
            return Err(Error::InvalidTable("table is empty".into()));
        }
        Ok(t)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<u64> {
        (0..self.cols.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    /// Drop rows whose total is zero (categories absent from every column).
    pub fn without_empty_rows(&self) -> Result<ContingencyTable> {
        let keep: Vec<usize> = (0..self.rows.len())
            .filter(|&i| self.counts[i].iter().any(|&c| c > 0))
            .collect();
        ContingencyTable::new(
            keep.iter().map(|&i| self.rows[i].clone()).collect(),
            self.cols.clone(),
            keep.iter().map(|&i| self.counts[i].clone()).collect(),
        )
    }

    /// `row_total * col_total / N` per cell; every one must be positive.
    pub fn expected(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.total() as f64;
        let (rt, ct) = (self.row_totals(), self.col_totals());
        let mut e = vec![vec![0.0; self.cols.len()]; self.rows.len()];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = rt[i] as f64 * ct[j] as f64 / n;
                if *cell <= 0.0 {
                    return Err(Error::ZeroExpected {
                        row: self.rows[i].clone(),
                        col: self.cols[j].clone(),
                    });
                }
            }
        }
        Ok(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    /// (O − E) / sqrt(E · (1 − row share) · (1 − col share))
    #[default]
    Adjusted,
    /// (O − E) / sqrt(E)
    Pearson,
}

pub fn cramers_v(chi2: f64, n: f64, rows: usize, cols: usize) -> f64 {
    let k = (rows.min(cols) - 1) as f64;
    (chi2 / (n * k)).sqrt().clamp(0.0, 1.0)
}

pub fn standardized_residuals(
    table: &ContingencyTable,
    kind: ResidualKind,
) -> Result<Vec<Vec<f64>>> {
    let e = table.expected()?;
    let n = table.total() as f64;
    let (rt, ct) = (table.row_totals(), table.col_totals());
    Ok(e.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &ex)| {
                    let diff = table.counts[i][j] as f64 - ex;
                    let var = match kind {
                        ResidualKind::Adjusted => {
                            ex * (1.0 - rt[i] as f64 / n) * (1.0 - ct[j] as f64 / n)
                        }
                        ResidualKind::Pearson => ex,
                    };
                    if var > 0.0 {
                        diff / var.sqrt()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect())
}

/// Pearson chi-square test of independence, with Cramér's V and adjusted residuals.
pub fn chi_square(table: &ContingencyTable) -> Result<TestResult> {
    let e = table.expected()?;
    let mut stat = 0.0;
    for (i, row) in e.iter().enumerate() {
        for (j, &ex) in row.iter().enumerate() {
            let d = table.counts[i][j] as f64 - ex;
            stat += d * d / ex;
        }
    }
    let (r, c) = (table.rows.len(), table.cols.len());
    let df = ((r - 1) * (c - 1)) as u64;
    let mut out = TestResult::new("chi_square", stat, special::chi_square_sf(stat, df as f64));
    out.df = Some(df);
    out.effect_size = Some(cramers_v(stat, table.total() as f64, r, c));
    out.per_cell_z = Some(standardized_residuals(table, ResidualKind::Adjusted)?);
    Ok(out)
}
