//! Per-group summaries of trial metrics.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::stats::describe;

use super::metrics::TrialMetrics;
use super::HarnessError;

/// CSV header of [`Report::write_csv`].
pub const REPORT_COLUMNS: [&str; 10] = [
    "group",
    "trials",
    "time_n",
    "time_na",
    "time_mean_s",
    "time_sd_s",
    "entry_mean_mm",
    "entry_sd_mm",
    "angle_mean_deg",
    "angle_sd_deg",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub group: String,
    pub trials: usize,
    /// Trials with an alignment time.
    pub time_n: usize,
    /// Trials that never reached drill-start; excluded from every mean.
    pub time_na: usize,
    pub time_mean_s: f64,
    pub time_sd_s: f64,
    /// Entry-plane distance `d` at drill-start.
    pub entry_mean_mm: f64,
    pub entry_sd_mm: f64,
    /// Total angle `theta` at drill-start.
    pub angle_mean_deg: f64,
    pub angle_sd_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

/// Groups by target label.
pub fn report(metrics: &[TrialMetrics]) -> Result<Report, HarnessError> {
    report_by(metrics, |m| m.label.clone())
}

pub fn report_by(metrics: &[TrialMetrics], group: impl Fn(&TrialMetrics) -> String) -> Result<Report, HarnessError> {
    if metrics.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    let mut groups: BTreeMap<String, Vec<&TrialMetrics>> = BTreeMap::new();
    for m in metrics {
        groups.entry(group(m)).or_default().push(m);
    }
    let rows = groups
        .into_iter()
        .map(|(group, ms)| {
            let done: Vec<_> = ms
                .iter()
                .filter_map(|m| m.alignment_time_s.zip(m.final_error))
                .collect();
            let times: Vec<f64> = done.iter().map(|(t, _)| *t).collect();
            let entry: Vec<f64> = done.iter().map(|(_, e)| e.d).collect();
            let angle: Vec<f64> = done.iter().map(|(_, e)| e.theta).collect();
            let (time_mean_s, time_sd_s) = describe(&times);
            let (entry_mean_mm, entry_sd_mm) = describe(&entry);
            let (angle_mean_deg, angle_sd_deg) = describe(&angle);
            ReportRow {
                group,
                trials: ms.len(),
                time_n: times.len(),
                time_na: ms.len() - times.len(),
                time_mean_s,
                time_sd_s,
                entry_mean_mm,
                entry_sd_mm,
                angle_mean_deg,
                angle_sd_deg,
            }
        })
        .collect();
    Ok(Report { rows })
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

impl Report {
    /// Empty cells mark statistics with no data.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), HarnessError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(REPORT_COLUMNS)?;
        for r in &self.rows {
            out.write_record([
                r.group.clone(),
                r.trials.to_string(),
                r.time_n.to_string(),
                r.time_na.to_string(),
                num(r.time_mean_s),
                num(r.time_sd_s),
                num(r.entry_mean_mm),
                num(r.entry_sd_mm),
                num(r.angle_mean_deg),
                num(r.angle_sd_deg),
            ])?;
        }
        out.flush().map_err(|e| HarnessError::Io("<report>".into(), e))?;
        Ok(())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:>6} {:>5} {:>18} {:>18} {:>18}",
            "group", "trials", "n/a", "time (s)", "entry (mm)", "angle (deg)"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<16} {:>6} {:>5} {:>8.3} ± {:<7.3} {:>8.3} ± {:<7.3} {:>8.3} ± {:<7.3}",
                r.group,
                r.trials,
                r.time_na,
                r.time_mean_s,
                r.time_sd_s,
                r.entry_mean_mm,
                r.entry_sd_mm,
                r.angle_mean_deg,
                r.angle_sd_deg
            )?;
        }
        Ok(())
    }
}
