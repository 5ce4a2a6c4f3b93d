//! Print the synthesis parameters across each phase's error range.

use sononav::fsm::Phase;
use sononav::mapping::{map_params, MappingConfig, NormalizedError};

fn main() {
    let cfg = MappingConfig::default();
    for phase in Phase::ALL {
        println!("{phase}:");
        for e in [0.0, 0.25, 0.5, 1.0] {
            let p = map_params(phase, &NormalizedError::new(e, e, e, e), &cfg);
            println!(
                "  e={e:<4} voices {:>7.2?} Hz  every {:.3} s",
                p.voice_freqs(),
                p.pulse_interval_s
            );
        }
    }
}
