//! Error-to-sound parameter mapping.
//!
//! In the entry-point phase `e_x` drives the FM fundamental (exponential
//! interpolation) and `e_y` the pulse interval (linear). The angle phase uses
//! `e_phi`/`e_delta` the same way on a lower, non-overlapping frequency
//! range. The two static phases play a constant pulsing chord.

use serde::{Deserialize, Serialize};

use crate::fsm::{Dimension, Phase, TransitionEvent, ZoneThresholds};
use crate::geometry::ErrorVector;

/// Errors scaled into `[0, 1]` by the working-area extents.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalizedError {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub delta: f64,
}

impl NormalizedError {
    pub fn new(x: f64, y: f64, phi: f64, delta: f64) -> Self {
        Self { x, y, phi, delta }
    }
}

pub fn normalize_errors(error: &ErrorVector, thresholds: &ZoneThresholds) -> NormalizedError {
    let scale = |v: f64, range: f64| (v.abs() / range).clamp(0.0, 1.0);
    NormalizedError {
        x: scale(error.e_x, thresholds.working_radius_mm),
        y: scale(error.e_y, thresholds.working_radius_mm),
        phi: scale(error.e_phi, thresholds.working_angle_deg),
        delta: scale(error.e_delta, thresholds.working_angle_deg),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chord {
    pub freqs_hz: Vec<f64>,
    pub interval_s: f64,
}

/// Which end of each range corresponds to zero error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointOrder {
    /// Zero error maps to the first listed endpoint.
    #[default]
    Literal,
    Reversed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EarconConfig {
    pub optimum_x_phi_hz: [f64; 2],
    pub optimum_y_delta_hz: [f64; 2],
    pub optimum_note_s: f64,
    /// Lowest note of the transition scale.
    pub transition_base_hz: f64,
    pub transition_note_s: f64,
}

impl Default for EarconConfig {
    fn default() -> Self {
        Self {
            optimum_x_phi_hz: [1320.0, 1760.0],
            optimum_y_delta_hz: [1320.0, 1567.98],
            optimum_note_s: 0.08,
            transition_base_hz: 440.0,
            transition_note_s: 0.06,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingConfig {
    pub ep_freq_range: [f64; 2],
    pub ap_freq_range: [f64; 2],
    pub pulse_interval_range: [f64; 2],
    pub ip_chord: Chord,
    pub fp_chord: Chord,
    pub endpoint_order: EndpointOrder,
    pub earcons: EarconConfig,
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self {
            ep_freq_range: [880.0, 1760.0],
            ap_freq_range: [110.0, 440.0],
            pulse_interval_range: [0.35, 0.1],
            ip_chord: Chord {
                freqs_hz: vec![123.47, 155.56, 185.0, 246.94],
                interval_s: 0.66,
            },
            fp_chord: Chord {
                freqs_hz: vec![440.0, 523.25, 659.26, 880.0],
                interval_s: 1.5,
            },
            endpoint_order: EndpointOrder::Literal,
            earcons: EarconConfig::default(),
        }
    }
}

impl MappingConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let ranges = [self.ep_freq_range, self.ap_freq_range, self.pulse_interval_range];
        if !ranges.iter().flatten().all(|&v| positive(v)) {
            return Err("mapping ranges must be positive and finite".into());
        }
        for chord in [&self.ip_chord, &self.fp_chord] {
            if chord.freqs_hz.is_empty() || !chord.freqs_hz.iter().all(|&f| positive(f)) {
                return Err("chord frequencies must be positive and finite".into());
            }
            if !positive(chord.interval_s) {
                return Err("chord interval must be positive".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthMode {
    PulseStream,
    Chord,
}

/// Complete control state for the synthesizer at one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub mode: SynthMode,
    /// Carrier of the pulse stream; the chord root in chord mode.
    pub fundamental_hz: f64,
    pub pulse_interval_s: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chord_freqs: Vec<f64>,
    pub active_phase: Phase,
}

impl SynthParams {
    /// Voice frequencies to sound on the next pulse.
    pub fn voice_freqs(&self) -> &[f64] {
        match self.mode {
            SynthMode::PulseStream => std::slice::from_ref(&self.fundamental_hz),
            SynthMode::Chord => &self.chord_freqs,
        }
    }
}

fn exp_interp(range: [f64; 2], e: f64) -> f64 {
    range[0] * (range[1] / range[0]).powf(e)
}

fn lin_interp(range: [f64; 2], e: f64) -> f64 {
    range[0] + e * (range[1] - range[0])
}

fn chord_params(chord: &Chord, phase: Phase) -> SynthParams {
    SynthParams {
        mode: SynthMode::Chord,
        fundamental_hz: chord.freqs_hz[0],
        pulse_interval_s: chord.interval_s,
        chord_freqs: chord.freqs_hz.clone(),
        active_phase: phase,
    }
}

/// Maps a phase and normalized error to synthesizer parameters.
pub fn map_params(phase: Phase, e: &NormalizedError, config: &MappingConfig) -> SynthParams {
    let orient = |v: f64| match config.endpoint_order {
        EndpointOrder::Literal => v,
        EndpointOrder::Reversed => 1.0 - v,
    };
    let pulse = |range: [f64; 2], pitch: f64, rate: f64| SynthParams {
        mode: SynthMode::PulseStream,
        fundamental_hz: exp_interp(range, orient(pitch)),
        pulse_interval_s: lin_interp(config.pulse_interval_range, orient(rate)),
        chord_freqs: Vec::new(),
        active_phase: phase,
    };
    match phase {
        Phase::EntryPoint => pulse(config.ep_freq_range, e.x, e.y),
        Phase::Angle => pulse(config.ap_freq_range, e.phi, e.delta),
        Phase::Initial => chord_params(&config.ip_chord, phase),
        Phase::Final => chord_params(&config.fp_chord, phase),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EarconKind {
    OptimumXPhi,
    OptimumYDelta,
    TransitionUp,
    TransitionDown,
}

/// A short sequence of equal-length notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EarconSpec {
    pub kind: EarconKind,
    pub note_freqs: Vec<f64>,
    pub note_duration_s: f64,
}

impl EarconSpec {
    pub fn duration_s(&self) -> f64 {
        self.note_freqs.len() as f64 * self.note_duration_s
    }

    pub fn for_kind(kind: EarconKind, config: &EarconConfig) -> Self {
        const MAJOR_SCALE: [i32; 8] = [0, 2, 4, 5, 7, 9, 11, 12];
        let scale = || {
            MAJOR_SCALE
                .iter()
                .map(|&s| config.transition_base_hz * 2f64.powf(s as f64 / 12.0))
        };
        let (note_freqs, note_duration_s) = match kind {
            EarconKind::OptimumXPhi => (config.optimum_x_phi_hz.to_vec(), config.optimum_note_s),
            EarconKind::OptimumYDelta => (config.optimum_y_delta_hz.to_vec(), config.optimum_note_s),
            EarconKind::TransitionUp => (scale().collect(), config.transition_note_s),
            EarconKind::TransitionDown => (scale().rev().collect(), config.transition_note_s),
        };
        Self {
            kind,
            note_freqs,
            note_duration_s,
        }
    }
}

/// Earcons triggered by a step's events, in event order.
pub fn earcons_for(events: &[TransitionEvent], config: &EarconConfig) -> Vec<EarconSpec> {
    events
        .iter()
        .filter_map(|e| match e {
            TransitionEvent::DimensionReached(Dimension::X | Dimension::Phi) => Some(EarconKind::OptimumXPhi),
            TransitionEvent::DimensionReached(Dimension::Y | Dimension::Delta) => Some(EarconKind::OptimumYDelta),
            TransitionEvent::EpToAp => Some(EarconKind::TransitionUp),
            TransitionEvent::ApToEp => Some(EarconKind::TransitionDown),
            _ => None,
        })
        .map(|kind| EarconSpec::for_kind(kind, config))
        .collect()
}
