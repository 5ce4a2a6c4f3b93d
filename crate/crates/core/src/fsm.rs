//! Four-phase alignment state machine with target/transition zone hysteresis.
//!
//! Forward transitions (IP→EP→AP→FP) need the tool inside the inner
//! transition zone; backward ones need it to leave the outer target zone.
//! Between the two boundaries the previous phase is kept.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ErrorVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FsmError {
    #[error("error vector contains a non-finite component")]
    InvalidInput,
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Phase {
    /// Tool outside the entry-point working area.
    #[default]
    #[serde(rename = "IP")]
    Initial,
    #[serde(rename = "EP")]
    EntryPoint,
    #[serde(rename = "AP")]
    Angle,
    /// Aligned in all four degrees of freedom.
    #[serde(rename = "FP")]
    Final,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Initial, Phase::EntryPoint, Phase::Angle, Phase::Final];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Initial => "IP",
            Phase::EntryPoint => "EP",
            Phase::Angle => "AP",
            Phase::Final => "FP",
        }
    }

    pub fn is_interactive(self) -> bool {
        matches!(self, Phase::EntryPoint | Phase::Angle)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneThresholds {
    /// Radius of the entry-point working area, mm.
    pub working_radius_mm: f64,
    /// Angular working area, degrees. Only bounds the angle-phase mapping.
    pub working_angle_deg: f64,
    pub target_mm: f64,
    pub target_deg: f64,
    pub transition_mm: f64,
    pub transition_deg: f64,
}

impl Default for ZoneThresholds {
    fn default() -> Self {
        Self {
            working_radius_mm: 20.0,
            working_angle_deg: 30.0,
            target_mm: 2.0,
            target_deg: 1.5,
            transition_mm: 0.5,
            transition_deg: 0.375,
        }
    }
}

impl ZoneThresholds {
    pub fn validate(&self) -> Result<(), FsmError> {
        let all = [
            self.working_radius_mm,
            self.working_angle_deg,
            self.target_mm,
            self.target_deg,
            self.transition_mm,
            self.transition_deg,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(FsmError::InvalidThresholds("non-finite value"));
        }
        if !(0.0 < self.transition_mm && self.transition_mm < self.target_mm && self.target_mm < self.working_radius_mm)
        {
            return Err(FsmError::InvalidThresholds(
                "need 0 < transition_mm < target_mm < working_radius_mm",
            ));
        }
        if !(0.0 < self.transition_deg
            && self.transition_deg < self.target_deg
            && self.target_deg < self.working_angle_deg)
        {
            return Err(FsmError::InvalidThresholds(
                "need 0 < transition_deg < target_deg < working_angle_deg",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    X,
    Y,
    Phi,
    Delta,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [Dimension::X, Dimension::Y, Dimension::Phi, Dimension::Delta];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::X => "x",
            Dimension::Y => "y",
            Dimension::Phi => "phi",
            Dimension::Delta => "delta",
        }
    }
}

/// Per-dimension "at target" flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DimensionFlags {
    pub x: bool,
    pub y: bool,
    pub phi: bool,
    pub delta: bool,
}

impl DimensionFlags {
    pub fn get(&self, dim: Dimension) -> bool {
        match dim {
            Dimension::X => self.x,
            Dimension::Y => self.y,
            Dimension::Phi => self.phi,
            Dimension::Delta => self.delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransitionEvent {
    #[serde(rename = "EnterEP")]
    EnterEp,
    #[serde(rename = "EPtoAP")]
    EpToAp,
    #[serde(rename = "APtoEP")]
    ApToEp,
    #[serde(rename = "APtoFP")]
    ApToFp,
    #[serde(rename = "FPtoAP")]
    FpToAp,
    #[serde(rename = "ExitToIP")]
    ExitToIp,
    DimensionReached(Dimension),
    DimensionLost(Dimension),
}

impl TransitionEvent {
    /// Phase reached by a phase-change event.
    pub fn target_phase(&self) -> Option<Phase> {
        match self {
            TransitionEvent::EnterEp | TransitionEvent::ApToEp => Some(Phase::EntryPoint),
            TransitionEvent::EpToAp | TransitionEvent::FpToAp => Some(Phase::Angle),
            TransitionEvent::ApToFp => Some(Phase::Final),
            TransitionEvent::ExitToIp => Some(Phase::Initial),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TransitionEvent::EnterEp => "EnterEP",
            TransitionEvent::EpToAp => "EPtoAP",
            TransitionEvent::ApToEp => "APtoEP",
            TransitionEvent::ApToFp => "APtoFP",
            TransitionEvent::FpToAp => "FPtoAP",
            TransitionEvent::ExitToIp => "ExitToIP",
            TransitionEvent::DimensionReached(_) => "DimensionReached",
            TransitionEvent::DimensionLost(_) => "DimensionLost",
        }
    }

    pub fn dimension(&self) -> Option<Dimension> {
        match self {
            TransitionEvent::DimensionReached(d) | TransitionEvent::DimensionLost(d) => Some(*d),
            _ => None,
        }
    }
}

impl fmt::Display for TransitionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dimension() {
            Some(d) => write!(f, "{}({})", self.name(), d.as_str()),
            None => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AlignmentState {
    pub phase: Phase,
    /// Entry-plane distance seen at the last step, mm.
    pub d: f64,
    /// Total angle seen at the last step, degrees.
    pub theta: f64,
    pub flags: DimensionFlags,
}

/// Per-dimension at-target flags for the interactive phases. Boundaries are
/// inclusive. Flags of dimensions not mapped in `phase` are false.
pub fn dimension_flags(error: &ErrorVector, thresholds: &ZoneThresholds, phase: Phase) -> DimensionFlags {
    match phase {
        Phase::EntryPoint => DimensionFlags {
            x: error.e_x.abs() <= thresholds.target_mm,
            y: error.e_y.abs() <= thresholds.target_mm,
            ..Default::default()
        },
        Phase::Angle => DimensionFlags {
            phi: error.e_phi.abs() <= thresholds.target_deg,
            delta: error.e_delta.abs() <= thresholds.target_deg,
            ..Default::default()
        },
        Phase::Initial | Phase::Final => DimensionFlags::default(),
    }
}

fn next_phase(phase: Phase, d: f64, theta: f64, t: &ZoneThresholds) -> Option<(Phase, TransitionEvent)> {
    use TransitionEvent::*;
    match phase {
        Phase::Initial if d < t.working_radius_mm => Some((Phase::EntryPoint, EnterEp)),
        Phase::EntryPoint if d > t.working_radius_mm => Some((Phase::Initial, ExitToIp)),
        Phase::EntryPoint if d <= t.transition_mm => Some((Phase::Angle, EpToAp)),
        Phase::Angle if d > t.target_mm => Some((Phase::EntryPoint, ApToEp)),
        Phase::Angle if theta <= t.transition_deg => Some((Phase::Final, ApToFp)),
        Phase::Final if theta > t.target_deg || d > t.target_mm => Some((Phase::Angle, FpToAp)),
        _ => None,
    }
}

/// Advances the state machine by one tick.
///
/// Several phase changes may happen in one step (e.g. leaving FP with the
/// tip far off target walks back FP→AP→EP); events are returned in the order
/// they occurred, phase changes before per-dimension edges.
pub fn step(
    state: &AlignmentState,
    error: &ErrorVector,
    thresholds: &ZoneThresholds,
) -> Result<(AlignmentState, Vec<TransitionEvent>), FsmError> {
    if !error.is_finite() {
        return Err(FsmError::InvalidInput);
    }
    let (d, theta) = (error.d, error.theta);
    let mut phase = state.phase;
    let mut events = Vec::new();

    // Transition conditions are mutually exclusive, so this walks at most the
    // length of the phase chain.
    for _ in 0..Phase::ALL.len() {
        match next_phase(phase, d, theta, thresholds) {
            Some((next, event)) => {
                phase = next;
                events.push(event);
            }
            None => break,
        }
    }

    let flags = dimension_flags(error, thresholds, phase);
    let previous = if phase == state.phase {
        state.flags
    } else {
        DimensionFlags::default()
    };
    for dim in Dimension::ALL {
        match (previous.get(dim), flags.get(dim)) {
            (false, true) => events.push(TransitionEvent::DimensionReached(dim)),
            (true, false) if phase == state.phase => events.push(TransitionEvent::DimensionLost(dim)),
            _ => {}
        }
    }

    Ok((AlignmentState { phase, d, theta, flags }, events))
}

/// Convenience owner of an [`AlignmentState`] for a single target.
#[derive(Debug, Clone)]
pub struct AlignmentMachine {
    state: AlignmentState,
    thresholds: ZoneThresholds,
}

impl AlignmentMachine {
    pub fn new(thresholds: ZoneThresholds) -> Result<Self, FsmError> {
        thresholds.validate()?;
        Ok(Self {
            state: AlignmentState::default(),
            thresholds,
        })
    }

    pub fn state(&self) -> &AlignmentState {
        &self.state
    }

    pub fn thresholds(&self) -> &ZoneThresholds {
        &self.thresholds
    }

    pub fn reset(&mut self) {
        self.state = AlignmentState::default();
    }

    pub fn update(&mut self, error: &ErrorVector) -> Result<Vec<TransitionEvent>, FsmError> {
        let (next, events) = step(&self.state, error, &self.thresholds)?;
        self.state = next;
        Ok(events)
    }
}
