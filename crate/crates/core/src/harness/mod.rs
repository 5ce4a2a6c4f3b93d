//! Scenario simulation, trial metrics, reports and the live engine loop.

mod metrics;
mod report;
mod scenario;
mod serve;

use std::path::PathBuf;

use thiserror::Error;

pub use metrics::{compute_metrics, TrialMetrics};
pub use report::{report, report_by, Report, ReportRow, REPORT_COLUMNS};
pub use scenario::{run_scenario, scripted_pose, Keyframe, NoiseModel, Scenario, TargetScript};
pub use serve::{LiveEngine, ServeOptions, TickStats};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
    #[error(transparent)]
    Plan(#[from] crate::plan::PlanError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Session(#[from] crate::io::session::SessionError),
    #[error(transparent)]
    Synth(#[from] crate::synth::SynthError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("nothing to report")]
    EmptyReport,
    #[error("engine thread panicked")]
    EnginePanic,
}
