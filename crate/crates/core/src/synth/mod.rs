//! FM pulse-tone synthesis.
//!
//! [`PulseSynth`] turns a stream of [`SynthParams`] updates and earcon
//! triggers into mono audio. Pulse parameters are latched at pulse onsets; a
//! phase change retriggers the pulse immediately after a short fade so the new
//! sound starts within a millisecond.

mod live;
mod offline;
mod voice;
mod wav;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use live::{AudioSink, CollectSink, LiveRenderer, NullSink, WavFileSink};
pub use offline::{offline_render, EventMark, OfflineRender};
pub use voice::{FmVoice, PulseEnvelope};
pub use wav::{wav_bytes, write_wav, WavFormat};

use crate::fsm::Phase;
use crate::mapping::{EarconSpec, SynthParams};

pub const MIN_SAMPLE_RATE_HZ: u32 = 8000;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("sample rate {0} Hz is below the {MIN_SAMPLE_RATE_HZ} Hz minimum")]
    InvalidSampleRate(u32),
    #[error("invalid synth parameters: {0}")]
    InvalidParams(String),
    #[error("malformed session log: {0}")]
    MalformedLog(String),
    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub sample_rate_hz: u32,
    /// Frames per block in live mode.
    pub block_size: usize,
    pub harmonicity_ratio: f64,
    pub modulation_index: f64,
    pub attack_s: f64,
    /// Fraction of the pulse interval at which the decay reaches -60 dB.
    pub decay_fraction: f64,
    /// Peak level of the pulse stream.
    pub stream_gain: f64,
    /// Peak level of earcons.
    pub earcon_gain: f64,
    /// Attenuation applied to the pulse stream while an earcon plays.
    pub duck_db: f64,
    /// Fade applied before retriggering on a phase change.
    pub retrigger_fade_s: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 48_000,
            block_size: 256,
            harmonicity_ratio: 1.0,
            modulation_index: 1.0,
            attack_s: 0.005,
            decay_fraction: 0.5,
            stream_gain: 0.5,
            earcon_gain: 0.5,
            duck_db: -6.0,
            retrigger_fade_s: 0.001,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.sample_rate_hz < MIN_SAMPLE_RATE_HZ {
            return Err(SynthError::InvalidSampleRate(self.sample_rate_hz));
        }
        if self.block_size == 0 {
            return Err(SynthError::InvalidParams("block_size must be > 0".into()));
        }
        let gains_ok = self.stream_gain >= 0.0 && self.earcon_gain >= 0.0 && self.stream_gain + self.earcon_gain <= 1.0;
        if !gains_ok {
            return Err(SynthError::InvalidParams(
                "stream_gain + earcon_gain must lie in [0, 1]".into(),
            ));
        }
        if !(self.attack_s > 0.0 && self.decay_fraction > 0.0 && self.decay_fraction <= 1.0) {
            return Err(SynthError::InvalidParams("bad envelope settings".into()));
        }
        Ok(())
    }

    fn duck_gain(&self) -> f64 {
        10f64.powf(self.duck_db / 20.0)
    }
}

/// Mono audio at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBlock {
    pub sample_rate_hz: u32,
    pub samples: Vec<f32>,
}

impl AudioBlock {
    pub fn empty(sample_rate_hz: u32) -> Self {
        Self {
            sample_rate_hz,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn append(&mut self, other: &AudioBlock) {
        self.samples.extend_from_slice(&other.samples);
    }
}

fn validate_params(p: &SynthParams) -> Result<(), SynthError> {
    let freqs_ok = p.voice_freqs().iter().all(|f| f.is_finite() && *f > 0.0);
    if !freqs_ok || p.voice_freqs().is_empty() {
        return Err(SynthError::InvalidParams("voice frequencies must be positive".into()));
    }
    if !(0.1..=1.5).contains(&p.pulse_interval_s) {
        return Err(SynthError::InvalidParams(format!(
            "pulse interval {} s outside [0.1, 1.5]",
            p.pulse_interval_s
        )));
    }
    Ok(())
}

struct ActiveEarcon {
    spec: EarconSpec,
    note: usize,
    pos: usize,
    note_len: usize,
    voice: FmVoice,
    envelope: PulseEnvelope,
}

/// Pulse-stream synthesizer with an earcon layer on top.
pub struct PulseSynth {
    config: SynthConfig,
    rate: f64,
    current: Option<SynthParams>,
    pending: Option<SynthParams>,
    voices: Vec<FmVoice>,
    envelope: PulseEnvelope,
    pos: usize,
    pulse_len: usize,
    /// Samples left in a retrigger fade and the fade length.
    fade: Option<(usize, usize)>,
    earcon_queue: VecDeque<EarconSpec>,
    earcon: Option<ActiveEarcon>,
    duck: f64,
    onsets: u64,
}

impl PulseSynth {
    pub fn new(config: SynthConfig) -> Result<Self, SynthError> {
        config.validate()?;
        let rate = config.sample_rate_hz as f64;
        let envelope = PulseEnvelope::for_interval(config.attack_s, config.decay_fraction, 1.0);
        Ok(Self {
            config,
            rate,
            current: None,
            pending: None,
            voices: Vec::new(),
            envelope,
            pos: 0,
            pulse_len: 0,
            fade: None,
            earcon_queue: VecDeque::new(),
            earcon: None,
            duck: 1.0,
            onsets: 0,
        })
    }

    pub fn config(&self) -> &SynthConfig {
        &self.config
    }

    /// Parameters of the pulse currently sounding.
    pub fn current(&self) -> Option<&SynthParams> {
        self.current.as_ref()
    }

    /// Number of pulse onsets so far.
    pub fn onsets(&self) -> u64 {
        self.onsets
    }

    /// Queues new parameters. They take effect at the next pulse onset, or
    /// right away (after a short fade) when the active phase changes.
    pub fn set_params(&mut self, params: SynthParams) -> Result<(), SynthError> {
        validate_params(&params)?;
        let phase_changed = self
            .current
            .as_ref()
            .is_some_and(|c| c.active_phase != params.active_phase);
        if phase_changed && self.fade.is_none() {
            let t = self.pos as f64 / self.rate;
            if self.envelope.amplitude(t) > 0.0 {
                let len = ((self.config.retrigger_fade_s * self.rate).round() as usize).max(1);
                self.fade = Some((len, len));
            } else {
                // already silent: start the next pulse on the next sample
                self.pos = self.pulse_len;
            }
        }
        self.pending = Some(params);
        Ok(())
    }

    /// Appends an earcon; earcons play one after another.
    pub fn trigger_earcon(&mut self, spec: EarconSpec) {
        if !spec.note_freqs.is_empty() {
            self.earcon_queue.push_back(spec);
        }
    }

    pub fn earcon_active(&self) -> bool {
        self.earcon.is_some() || !self.earcon_queue.is_empty()
    }

    pub fn active_phase(&self) -> Option<Phase> {
        self.current.as_ref().map(|c| c.active_phase)
    }

    fn onset(&mut self) {
        if let Some(p) = self.pending.take() {
            self.current = Some(p);
        }
        let Some(p) = &self.current else {
            return;
        };
        let freqs = p.voice_freqs();
        self.voices.truncate(freqs.len());
        while self.voices.len() < freqs.len() {
            self.voices.push(FmVoice::new(
                0.0,
                self.config.harmonicity_ratio,
                self.config.modulation_index,
            ));
        }
        for (v, f) in self.voices.iter_mut().zip(freqs) {
            v.carrier_hz = *f;
            v.reset_phase();
        }
        self.envelope =
            PulseEnvelope::for_interval(self.config.attack_s, self.config.decay_fraction, p.pulse_interval_s);
        self.pulse_len = (p.pulse_interval_s * self.rate).round() as usize;
        self.pos = 0;
        self.onsets += 1;
    }

    fn next_earcon_sample(&mut self) -> f64 {
        if self.earcon.is_none() {
            let Some(spec) = self.earcon_queue.pop_front() else {
                return 0.0;
            };
            let note_len = (spec.note_duration_s * self.rate).round().max(1.0) as usize;
            let envelope = PulseEnvelope::for_interval(self.config.attack_s, 1.0, spec.note_duration_s);
            let voice = FmVoice::new(
                spec.note_freqs[0],
                self.config.harmonicity_ratio,
                self.config.modulation_index,
            );
            self.earcon = Some(ActiveEarcon {
                spec,
                note: 0,
                pos: 0,
                note_len,
                voice,
                envelope,
            });
        }
        let rate = self.rate;
        let active = self.earcon.as_mut().expect("set above");
        let t = active.pos as f64 / rate;
        let y = active.envelope.amplitude(t) * active.voice.next_sample(rate);
        active.pos += 1;
        if active.pos >= active.note_len {
            active.note += 1;
            active.pos = 0;
            if active.note < active.spec.note_freqs.len() {
                active.voice.carrier_hz = active.spec.note_freqs[active.note];
                active.voice.reset_phase();
            } else {
                self.earcon = None;
            }
        }
        y
    }

    #[inline]
    fn next_sample(&mut self) -> f64 {
        let mut fade_gain = 1.0;
        match self.fade {
            Some((0, _)) => {
                self.fade = None;
                self.onset();
            }
            Some((left, len)) => {
                fade_gain = left as f64 / len as f64;
                self.fade = Some((left - 1, len));
            }
            None => {
                let starting = self.current.is_none() && self.pending.is_some();
                let elapsed = self.current.is_some() && self.pos >= self.pulse_len;
                if starting || elapsed {
                    self.onset();
                }
            }
        }

        let mut stream = 0.0;
        if self.current.is_some() {
            let amp = self.envelope.amplitude(self.pos as f64 / self.rate) * fade_gain;
            if amp > 0.0 {
                let rate = self.rate;
                let sum: f64 = self.voices.iter_mut().map(|v| v.next_sample(rate)).sum();
                stream = amp * sum / self.voices.len() as f64;
            } else {
                for v in &mut self.voices {
                    v.next_sample(self.rate);
                }
            }
            self.pos += 1;
        }

        let earcon = self.next_earcon_sample();
        let target = if self.earcon.is_some() {
            self.config.duck_gain()
        } else {
            1.0
        };
        let step = 1.0 / (self.config.attack_s * self.rate);
        self.duck = if self.duck < target {
            (self.duck + step).min(target)
        } else {
            (self.duck - step).max(target)
        };

        self.config.stream_gain * self.duck * stream + self.config.earcon_gain * earcon
    }

    /// Renders `frames` samples.
    pub fn render(&mut self, frames: usize) -> AudioBlock {
        let mut samples = Vec::with_capacity(frames);
        self.render_into(frames, &mut samples);
        AudioBlock {
            sample_rate_hz: self.config.sample_rate_hz,
            samples,
        }
    }

    pub fn render_into(&mut self, frames: usize, out: &mut Vec<f32>) {
        out.extend((0..frames).map(|_| self.next_sample() as f32));
    }
}

/// Applies `params` and renders one block from `synth`.
pub fn render_block(
    params: &SynthParams,
    synth: &mut PulseSynth,
    frame_count: usize,
) -> Result<AudioBlock, SynthError> {
    synth.set_params(params.clone())?;
    Ok(synth.render(frame_count))
}

/// Renders an earcon on its own; the block is exactly as long as its notes.
pub fn render_earcon(spec: &EarconSpec, config: &SynthConfig) -> Result<AudioBlock, SynthError> {
    let mut synth = PulseSynth::new(config.clone())?;
    if spec.note_freqs.is_empty() {
        return Ok(AudioBlock::empty(config.sample_rate_hz));
    }
    let note_len = (spec.note_duration_s * config.sample_rate_hz as f64).round().max(1.0) as usize;
    synth.trigger_earcon(spec.clone());
    Ok(synth.render(note_len * spec.note_freqs.len()))
}
