//! Planned targets for a session.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsm::{FsmError, ZoneThresholds};
use crate::geometry::{AnatomicalFrame, GeometryError, PlannedTrajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("plan has no targets")]
    Empty,
    #[error("duplicate target label {0:?}")]
    DuplicateLabel(String),
    #[error("target {label:?}: {source}")]
    Trajectory { label: String, source: GeometryError },
    #[error(transparent)]
    Thresholds(#[from] FsmError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledTarget {
    /// e.g. `L4-left`
    pub label: String,
    pub trajectory: PlannedTrajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetPlan {
    #[serde(default)]
    pub frame: AnatomicalFrame,
    pub targets: Vec<LabeledTarget>,
    #[serde(default)]
    pub thresholds: ZoneThresholds,
}

impl TargetPlan {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.targets.is_empty() {
            return Err(PlanError::Empty);
        }
        let mut seen = HashSet::new();
        for t in &self.targets {
            if !seen.insert(t.label.as_str()) {
                return Err(PlanError::DuplicateLabel(t.label.clone()));
            }
            t.trajectory.validate().map_err(|source| PlanError::Trajectory {
                label: t.label.clone(),
                source,
            })?;
        }
        self.thresholds.validate()?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.targets.iter().position(|t| t.label == label)
    }
}
