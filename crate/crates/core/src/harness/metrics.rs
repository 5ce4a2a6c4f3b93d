use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fsm::{Phase, TransitionEvent};
use crate::geometry::ErrorVector;
use crate::io::session::{SessionLog, SessionRecord};

/// Outcome of one target's alignment.
///
/// Alignment starts at the first `EnterEP` event and ends at drill-start, the
/// first tick of a final-phase stretch lasting at least the dwell time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub target_id: usize,
    pub label: String,
    pub alignment_start_s: Option<f64>,
    pub drill_start_s: Option<f64>,
    /// `None` when the trial never reached a sustained final phase.
    pub alignment_time_s: Option<f64>,
    /// Error at drill-start.
    pub final_error: Option<ErrorVector>,
    pub last_error: ErrorVector,
    /// Keyed by event display name, e.g. `APtoEP`, `DimensionReached(x)`.
    pub transition_counts: BTreeMap<String, usize>,
    pub events: Vec<(f64, TransitionEvent)>,
}

impl TrialMetrics {
    pub fn count(&self, event: &TransitionEvent) -> usize {
        self.transition_counts.get(&event.to_string()).copied().unwrap_or(0)
    }
}

fn drill_start(records: &[SessionRecord], dwell_s: f64) -> Option<usize> {
    let mut run_start: Option<usize> = None;
    for (i, r) in records.iter().enumerate() {
        if r.phase != Phase::Final {
            run_start = None;
            continue;
        }
        let s = *run_start.get_or_insert(i);
        // tolerate float error in tick timestamps
        if r.timestamp_s - records[s].timestamp_s >= dwell_s - 1e-9 {
            return Some(s);
        }
    }
    None
}

/// One row per contiguous run of records on the same target.
pub fn compute_metrics(log: &SessionLog, dwell_s: f64) -> Vec<TrialMetrics> {
    let mut out = Vec::new();
    let records = &log.records;
    let mut start = 0;
    while start < records.len() {
        let id = records[start].target_id;
        let end = records[start..]
            .iter()
            .position(|r| r.target_id != id)
            .map_or(records.len(), |n| start + n);
        let seg = &records[start..end];

        let events: Vec<(f64, TransitionEvent)> = seg
            .iter()
            .flat_map(|r| r.events.iter().map(move |e| (r.timestamp_s, *e)))
            .collect();
        let mut transition_counts = BTreeMap::new();
        for (_, e) in &events {
            *transition_counts.entry(e.to_string()).or_insert(0) += 1;
        }
        let alignment_start_s = events
            .iter()
            .find(|(_, e)| *e == TransitionEvent::EnterEp)
            .map(|(t, _)| *t);
        let drill = drill_start(seg, dwell_s);
        let drill_start_s = drill.map(|i| seg[i].timestamp_s);
        let alignment_time_s = match (alignment_start_s, drill_start_s) {
            (Some(a), Some(d)) => Some((d - a).max(0.0)),
            _ => None,
        };
        let label = log
            .header
            .plan
            .targets
            .get(id)
            .map_or_else(|| format!("target-{id}"), |t| t.label.clone());
        out.push(TrialMetrics {
            target_id: id,
            label,
            alignment_start_s,
            drill_start_s,
            alignment_time_s,
            final_error: drill.map(|i| seg[i].error),
            last_error: seg[seg.len() - 1].error,
            transition_counts,
            events,
        });
        start = end;
    }
    out
}
