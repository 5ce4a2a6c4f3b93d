//! Render a pulse stream sweep, the final chord and an earcon to WAV files.

use sononav::fsm::Phase;
use sononav::mapping::{map_params, EarconKind, EarconSpec, MappingConfig, NormalizedError};
use sononav::synth::{render_earcon, write_wav, PulseSynth, SynthConfig, WavFormat};

fn main() -> anyhow::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().display().to_string());
    let mapping = MappingConfig::default();
    let cfg = SynthConfig::default();

    // Entry error shrinking from the edge of the working area to zero over 4 s.
    let mut synth = PulseSynth::new(cfg.clone())?;
    let mut audio = Vec::new();
    for step in 0..200 {
        let e = 1.0 - step as f64 / 199.0;
        synth.set_params(map_params(
            Phase::EntryPoint,
            &NormalizedError::new(e, e, 0.0, 0.0),
            &mapping,
        ))?;
        synth.render_into(cfg.sample_rate_hz as usize / 50, &mut audio);
    }
    synth.set_params(map_params(Phase::Final, &NormalizedError::default(), &mapping))?;
    synth.render_into(2 * cfg.sample_rate_hz as usize, &mut audio);
    let sweep = sononav::synth::AudioBlock {
        sample_rate_hz: cfg.sample_rate_hz,
        samples: audio,
    };
    let path = format!("{out}/sononav_sweep.wav");
    write_wav(&path, &sweep, WavFormat::Pcm16)?;
    println!("{path}: {:.1} s, peak {:.3}", sweep.duration_s(), sweep.peak());

    let earcon = render_earcon(&EarconSpec::for_kind(EarconKind::TransitionUp, &mapping.earcons), &cfg)?;
    let path = format!("{out}/sononav_transition_up.wav");
    write_wav(&path, &earcon, WavFormat::Float32)?;
    println!("{path}: {:.2} s", earcon.duration_s());
    Ok(())
}
