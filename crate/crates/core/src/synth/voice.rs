use std::f64::consts::TAU;

/// Two-operator FM voice: `sin(φc + I·sin(φm))` with the modulator running at
/// `carrier_hz · harmonicity_ratio`.
#[derive(Debug, Clone, PartialEq)]
pub struct FmVoice {
    pub carrier_hz: f64,
    pub harmonicity_ratio: f64,
    pub modulation_index: f64,
    carrier_phase: f64,
    modulator_phase: f64,
}

impl FmVoice {
    pub fn new(carrier_hz: f64, harmonicity_ratio: f64, modulation_index: f64) -> Self {
        Self {
            carrier_hz,
            harmonicity_ratio,
            modulation_index,
            carrier_phase: 0.0,
            modulator_phase: 0.0,
        }
    }

    pub fn reset_phase(&mut self) {
        self.carrier_phase = 0.0;
        self.modulator_phase = 0.0;
    }

    pub fn phases(&self) -> (f64, f64) {
        (self.carrier_phase, self.modulator_phase)
    }

    /// Produces one sample in `[-1, 1]` and advances both accumulators.
    #[inline]
    pub fn next_sample(&mut self, sample_rate: f64) -> f64 {
        let y = (self.carrier_phase + self.modulation_index * self.modulator_phase.sin()).sin();
        self.carrier_phase = (self.carrier_phase + TAU * self.carrier_hz / sample_rate).rem_euclid(TAU);
        self.modulator_phase =
            (self.modulator_phase + TAU * self.carrier_hz * self.harmonicity_ratio / sample_rate).rem_euclid(TAU);
        y
    }
}

/// Percussive pulse envelope: linear attack, then exponential decay reaching
/// -60 dB at `attack_s + decay_s`, silent afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseEnvelope {
    pub attack_s: f64,
    pub decay_s: f64,
}

/// Amplitude ratio of -60 dB.
const DECAY_FLOOR: f64 = 1e-3;

impl PulseEnvelope {
    /// Envelope for a pulse repeating every `interval_s`, whose decay ends at
    /// `decay_fraction · interval_s` after onset.
    pub fn for_interval(attack_s: f64, decay_fraction: f64, interval_s: f64) -> Self {
        let end = (decay_fraction * interval_s).max(2.0 * attack_s);
        Self {
            attack_s,
            decay_s: end - attack_s,
        }
    }

    pub fn total_s(&self) -> f64 {
        self.attack_s + self.decay_s
    }

    /// Amplitude in `[0, 1]` at `t` seconds after onset.
    #[inline]
    pub fn amplitude(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else if t < self.attack_s {
            t / self.attack_s
        } else if t < self.total_s() {
            let k = -DECAY_FLOOR.ln() / self.decay_s;
            (-k * (t - self.attack_s)).exp()
        } else {
            0.0
        }
    }
}
