//! Simulate the demo scenario under several noise seeds and report.

use sononav::config::EngineConfig;
use sononav::harness::{report, run_scenario, Scenario};

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/demo.toml").into());
    let cfg = EngineConfig::default();
    let mut scenario = Scenario::load(&path)?;
    let mut trials = Vec::new();
    for seed in 0..10 {
        scenario.noise.seed = seed;
        let (_, metrics) = run_scenario(&scenario, &cfg)?;
        trials.extend(metrics);
    }
    print!("{}", report(&trials)?);
    Ok(())
}
