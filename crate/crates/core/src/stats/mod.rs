//! Evaluation statistics: t-tests, TOST equivalence, least equivalence
//! interval and grouped summaries.

pub mod dist;
mod summary;
mod tost;
mod ttest;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use summary::{summarize, ColumnSummary, GroupSummary, Summary, SummarySpec, Table};
pub use tost::{least_equivalence_interval, tost, TostResult, VarianceModel};
pub use ttest::{paired_t, welch_t, TTest};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("sample needs at least 2 values, got {0}")]
    TooFewValues(usize),
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("samples have zero variance")]
    DegenerateVariance,
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("equivalence bounds must be positive, got ({0}, {1})")]
    InvalidInterval(f64, f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("no equivalence even at delta = {0}")]
    NonBracketable(f64),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("no rows to summarize")]
    Empty,
    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    BadValue { row: usize, column: String, value: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A labelled set of observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: String,
    pub values: Vec<f64>,
}

impl Sample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }
}

impl std::ops::Deref for Sample {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

fn check_sample(v: &[f64]) -> Result<(), StatsError> {
    if v.len() < 2 {
        return Err(StatsError::TooFewValues(v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

/// Mean and sample standard deviation (n - 1); sd is 0 for one value.
pub fn describe(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}
