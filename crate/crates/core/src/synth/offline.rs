use crate::fsm::TransitionEvent;
use crate::io::session::SessionLog;
use crate::mapping::earcons_for;

use super::{AudioBlock, PulseSynth, SynthConfig, SynthError};

/// Sample position of a logged transition event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventMark {
    /// Index of the record carrying the event.
    pub record: usize,
    pub event: TransitionEvent,
    pub sample: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineRender {
    pub audio: AudioBlock,
    pub events: Vec<EventMark>,
}

/// Renders a session log to audio, applying each record at
/// `round(timestamp · sample_rate)` relative to the first record. The output
/// runs one block past the last record; an empty log renders nothing.
pub fn offline_render(log: &SessionLog, config: &SynthConfig) -> Result<OfflineRender, SynthError> {
    config.validate()?;
    let mut synth = PulseSynth::new(config.clone())?;
    let rate = config.sample_rate_hz as f64;
    let Some(first) = log.records.first() else {
        return Ok(OfflineRender {
            audio: AudioBlock::empty(config.sample_rate_hz),
            events: Vec::new(),
        });
    };
    let t0 = first.timestamp_s;
    let mut samples = Vec::new();
    let mut events = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    for (i, rec) in log.records.iter().enumerate() {
        if !rec.timestamp_s.is_finite() || rec.timestamp_s < last_t {
            return Err(SynthError::MalformedLog(format!(
                "record {i}: timestamp {} out of order",
                rec.timestamp_s
            )));
        }
        last_t = rec.timestamp_s;
        let at = ((rec.timestamp_s - t0) * rate).round() as usize;
        if at > samples.len() {
            synth.render_into(at - samples.len(), &mut samples);
        }
        synth
            .set_params(rec.params.clone())
            .map_err(|e| SynthError::MalformedLog(format!("record {i}: {e}")))?;
        for spec in earcons_for(&rec.events, &log.header.mapping.earcons) {
            synth.trigger_earcon(spec);
        }
        events.extend(rec.events.iter().map(|&event| EventMark {
            record: i,
            event,
            sample: at,
        }));
    }
    synth.render_into(config.block_size, &mut samples);
    Ok(OfflineRender {
        audio: AudioBlock {
            sample_rate_hz: config.sample_rate_hz,
            samples,
        },
        events,
    })
}
