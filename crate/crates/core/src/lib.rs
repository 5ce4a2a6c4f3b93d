//! Auditory navigation for tracked surgical tools.
//!
//! A tracked tool pose is compared against a planned trajectory, reduced to a
//! four-dimensional error (entry-point offset plus two angles), classified by
//! a four-phase alignment state machine and mapped to FM pulse-tone
//! parameters. Around that pipeline sit an OSC ingest path, JSONL session
//! logs with deterministic replay, a WebSocket state stream for clients, a
//! scenario simulator and the statistics used to evaluate user studies.

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b, tol): (f64, f64, f64) = ($a, $b, $tol);
        assert!(
            (a - b).abs() <= tol,
            "{} = {a} vs {} = {b} (tol {tol})",
            stringify!($a),
            stringify!($b)
        );
    }};
}

pub mod config;
pub mod engine;
pub mod fsm;
pub mod geometry;
pub mod handoff;
pub mod harness;
pub mod io;
pub mod mapping;
pub mod plan;
pub mod stats;
pub mod synth;

pub use engine::{replay, Engine, EngineError};
pub use fsm::{AlignmentMachine, Phase, TransitionEvent, ZoneThresholds};
pub use geometry::{error_vector, ErrorVector, Pose};
pub use mapping::{map_params, MappingConfig, SynthParams};
pub use plan::{LabeledTarget, TargetPlan};
