//! Record a session, read it back, replay it and render it offline twice.

use sononav::config::EngineConfig;
use sononav::harness::{run_scenario, Scenario};
use sononav::io::{read_session, write_session};
use sononav::synth::offline_render;

fn main() -> anyhow::Result<()> {
    let cfg = EngineConfig::default();
    let scenario = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/demo.toml"))?;
    let (log, _) = run_scenario(&scenario, &cfg)?;

    let path = std::env::temp_dir().join("sononav_demo_session.jsonl");
    write_session(&path, &log)?;
    let loaded = read_session(&path)?;
    assert_eq!(loaded, log);

    let replayed = sononav::replay(&loaded)?;
    println!(
        "{} records, phases identical: {}",
        loaded.records.len(),
        replayed.phases() == loaded.phases()
    );
    println!(
        "events identical: {}",
        replayed.event_timeline() == loaded.event_timeline()
    );

    let a = offline_render(&loaded, &cfg.synth)?;
    let b = offline_render(&read_session(&path)?, &cfg.synth)?;
    println!("{:.2} s rendered, bit-identical: {}", a.audio.duration_s(), a == b);
    for mark in a.events.iter().filter(|m| m.event.target_phase().is_some()) {
        println!("  sample {:>8}: {}", mark.sample, mark.event);
    }
    Ok(())
}
