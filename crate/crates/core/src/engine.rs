//! Per-tick pipeline: pose → error vector → phase → synth parameters.

use thiserror::Error;

use crate::fsm::{AlignmentMachine, AlignmentState, FsmError};
use crate::geometry::{error_vector, make_entry_plane, EntryPlane, GeometryError, Pose};
use crate::io::session::{SessionHeader, SessionLog, SessionRecord};
use crate::mapping::{earcons_for, map_params, normalize_errors, EarconSpec, MappingConfig};
use crate::plan::{PlanError, TargetPlan};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fsm(#[from] FsmError),
    #[error("invalid mapping config: {0}")]
    Mapping(String),
    #[error("unknown target id {0}")]
    UnknownTarget(usize),
    #[error("timestamp {0} precedes the previous tick")]
    NonMonotonic(f64),
}

/// Single-owner alignment engine for one target plan.
///
/// Switching targets resets the state machine to the initial phase.
pub struct Engine {
    plan: TargetPlan,
    mapping: MappingConfig,
    planes: Vec<EntryPlane>,
    machine: AlignmentMachine,
    active_target: Option<usize>,
    last_timestamp: f64,
}

impl Engine {
    pub fn new(plan: TargetPlan, mapping: MappingConfig) -> Result<Self, EngineError> {
        plan.validate()?;
        mapping.validate().map_err(EngineError::Mapping)?;
        let planes = plan
            .targets
            .iter()
            .map(|t| make_entry_plane(&t.trajectory, &plan.frame))
            .collect::<Result<Vec<_>, _>>()?;
        for (plane, t) in planes.iter().zip(&plan.targets) {
            if plane.fallback_axis {
                log::warn!(
                    "target {}: direction parallel to X_a, using Y_a for the entry-plane basis",
                    t.label
                );
            }
        }
        let machine = AlignmentMachine::new(plan.thresholds)?;
        Ok(Self {
            plan,
            mapping,
            planes,
            machine,
            active_target: None,
            last_timestamp: f64::NEG_INFINITY,
        })
    }

    pub fn plan(&self) -> &TargetPlan {
        &self.plan
    }

    pub fn mapping(&self) -> &MappingConfig {
        &self.mapping
    }

    pub fn state(&self) -> &AlignmentState {
        self.machine.state()
    }

    pub fn active_target(&self) -> Option<usize> {
        self.active_target
    }

    pub fn session_header(&self, tick_rate_hz: f64) -> SessionHeader {
        SessionHeader::new(self.plan.clone(), self.mapping.clone(), tick_rate_hz)
    }

    /// Processes one pose sample.
    pub fn tick(&mut self, timestamp_s: f64, pose: &Pose, target_id: usize) -> Result<SessionRecord, EngineError> {
        if timestamp_s.is_nan() || timestamp_s < self.last_timestamp {
            return Err(EngineError::NonMonotonic(timestamp_s));
        }
        let target = self
            .plan
            .targets
            .get(target_id)
            .ok_or(EngineError::UnknownTarget(target_id))?;
        pose.validate()?;
        let error = error_vector(pose, &target.trajectory, &self.planes[target_id], &self.plan.frame)?;

        if self.active_target != Some(target_id) {
            self.machine.reset();
            self.active_target = Some(target_id);
        }
        let events = self.machine.update(&error)?;
        self.last_timestamp = timestamp_s;

        let phase = self.machine.state().phase;
        let params = map_params(phase, &normalize_errors(&error, &self.plan.thresholds), &self.mapping);
        Ok(SessionRecord {
            timestamp_s,
            target_id,
            pose: *pose,
            error,
            phase,
            params,
            events,
        })
    }

    pub fn earcons(&self, record: &SessionRecord) -> Vec<EarconSpec> {
        earcons_for(&record.events, &self.mapping.earcons)
    }
}

/// Re-runs a recorded session's poses through a fresh engine built from its
/// header.
pub fn replay(log: &SessionLog) -> Result<SessionLog, EngineError> {
    let mut engine = Engine::new(log.header.plan.clone(), log.header.mapping.clone())?;
    let mut out = SessionLog::new(log.header.clone());
    for r in &log.records {
        out.records.push(engine.tick(r.timestamp_s, &r.pose, r.target_id)?);
    }
    Ok(out)
}
