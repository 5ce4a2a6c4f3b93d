//! Start the live engine, stream poses over OSC and watch the state stream.

use std::time::Duration;

use nalgebra::Vector3;
use sononav::config::EngineConfig;
use sononav::geometry::{PlannedTrajectory, Pose};
use sononav::harness::{LiveEngine, ServeOptions};
use sononav::io::{pose_message, OscSender, ServerFrame};
use sononav::plan::{LabeledTarget, TargetPlan};
use sononav::synth::CollectSink;

fn main() -> anyhow::Result<()> {
    let mut config = EngineConfig::default();
    config.network.osc_listen = "127.0.0.1:0".parse()?;
    config.network.bridge_listen = "127.0.0.1:0".parse()?;
    let target = PlannedTrajectory::new(Vector3::new(0.0, 0.0, 30.0), Vector3::new(0.2, 1.0, 0.1))?;
    let plan = TargetPlan {
        frame: Default::default(),
        targets: vec![LabeledTarget {
            label: "L3-left".into(),
            trajectory: target,
        }],
        thresholds: config.thresholds,
    };
    let sink = CollectSink::default();
    let audio = sink.samples.clone();
    let live = LiveEngine::start(ServeOptions {
        config,
        plan,
        audio: Some(Box::new(sink)),
        realtime_audio: true,
        session_path: None,
    })?;
    let states = live.broadcaster().subscribe();
    println!(
        "OSC on {}, WebSocket bridge on ws://{}",
        live.osc_addr(),
        live.bridge_addr()
    );

    let tx = OscSender::new(live.osc_addr())?;
    for i in 0..=100 {
        let u = 1.0 - i as f64 / 100.0;
        let tip = target.entry_point + Vector3::new(15.0, 0.0, 6.0) * u;
        let axis = target.direction + Vector3::new(0.3, 0.0, -0.2) * u;
        tx.send(&pose_message(0, &Pose::from_tip_and_axis(tip, axis)))?;
        std::thread::sleep(Duration::from_millis(20));
        while let Some(ServerFrame::State(f)) = states.try_next() {
            if !f.events.is_empty() {
                let names: Vec<String> = f.events.iter().map(ToString::to_string).collect();
                println!(
                    "t={:.2}s {} d={:.2} theta={:.2} {}",
                    f.timestamp_s,
                    f.phase,
                    f.error.d,
                    f.error.theta,
                    names.join(" ")
                );
            }
        }
    }
    let stats = live.stop()?;
    println!(
        "{} ticks, mean {:?}, max {:?}; {} audio samples rendered",
        stats.ticks,
        stats.mean(),
        stats.max,
        audio.lock().unwrap().len()
    );
    Ok(())
}
