//! Drive the alignment state machine through a scripted approach.

use sononav::fsm::{AlignmentMachine, ZoneThresholds};
use sononav::geometry::ErrorVector;

fn main() -> anyhow::Result<()> {
    let mut fsm = AlignmentMachine::new(ZoneThresholds::default())?;
    // (e_x, e_y, e_phi, e_delta, theta)
    let script = [
        (25.0, 3.0, 12.0, 5.0, 13.0),
        (12.0, 1.0, 12.0, 5.0, 13.0),
        (1.0, 0.3, 10.0, 4.0, 10.8),
        (0.3, 0.2, 6.0, 3.0, 6.7),
        (1.6, 1.2, 4.0, 2.0, 4.5), // wobble inside the target zone: stays in AP
        (2.2, 1.0, 3.0, 1.0, 3.2), // past 2 mm: back to EP
        (0.4, 0.1, 2.0, 1.0, 2.2),
        (0.2, 0.1, 0.2, 0.1, 0.25),
    ];
    for (i, &(x, y, phi, delta, theta)) in script.iter().enumerate() {
        let events = fsm.update(&ErrorVector::new(x, y, phi, delta, theta))?;
        let names: Vec<String> = events.iter().map(ToString::to_string).collect();
        println!("tick {i}: {:<2} {}", fsm.state().phase, names.join(", "));
    }
    Ok(())
}
