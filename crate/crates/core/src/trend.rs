//! Row × column count tables with percentage views.

use serde::{Deserialize, Serialize};

/// Which group of cells a percentage is relative to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Each row (topic or type) sums to 100 across the columns.
    #[default]
    PerTopic,
    /// Each column (year) sums to 100 across the rows.
    PerYear,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::PerTopic => "per_topic",
            Normalization::PerYear => "per_year",
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per_topic" | "per-topic" => Ok(Normalization::PerTopic),
            "per_year" | "per-year" => Ok(Normalization::PerYear),
            other => Err(format!("unknown normalization {other:?}")),
        }
    }
}

/// Integer counts over labelled rows and columns, plus their percentages.
///
/// Rows with no counts (or columns, under [`Normalization::PerYear`]) get
/// all-zero percentages; every non-empty group sums to 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendTable {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub percentages: Vec<Vec<f64>>,
    pub normalization: Normalization,
}

impl TrendTable {
    pub fn new(
        rows: Vec<String>,
        columns: Vec<String>,
        counts: Vec<Vec<u64>>,
        normalization: Normalization,
    ) -> Self {
        assert_eq!(rows.len(), counts.len(), "row label count");
        assert!(
            counts.iter().all(|r| r.len() == columns.len()),
            "column label count"
        );
        let percentages = percentages(&counts, columns.len(), normalization);
        Self {
            rows,
            columns,
            counts,
            percentages,
            normalization,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() || self.columns.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_total(&self, row: usize) -> u64 {
        self.counts[row].iter().sum()
    }

    pub fn column_total(&self, col: usize) -> u64 {
        self.counts.iter().map(|r| r[col]).sum()
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.rows.iter().position(|r| r == label)
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == label)
    }

    /// Count at (row label, column label); zero when either label is absent.
    pub fn count(&self, row: &str, col: &str) -> u64 {
        match (self.row_index(row), self.column_index(col)) {
            (Some(r), Some(c)) => self.counts[r][c],
            _ => 0,
        }
    }

    pub fn percentage(&self, row: &str, col: &str) -> Option<f64> {
        Some(self.percentages[self.row_index(row)?][self.column_index(col)?])
    }

    /// Recomputes percentages under another normalization.
    pub fn renormalized(&self, normalization: Normalization) -> Self {
        Self::new(
            self.rows.clone(),
            self.columns.clone(),
            self.counts.clone(),
            normalization,
        )
    }
}

fn percentages(counts: &[Vec<u64>], n_cols: usize, normalization: Normalization) -> Vec<Vec<f64>> {
    match normalization {
        Normalization::PerTopic => counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter().map(|&c| percent(c, total)).collect()
            })
            .collect(),
        Normalization::PerYear => {
            let col_totals: Vec<u64> = (0..n_cols)
                .map(|c| counts.iter().map(|r| r[c]).sum())
                .collect();
            counts
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&col_totals)
                        .map(|(&c, &t)| percent(c, t))
                        .collect()
                })
                .collect()
        }
    }
}

fn percent(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64 * 100.0
    }
}
