//! Encode pose/params/event OSC messages and send a pose over UDP.

use std::net::UdpSocket;

use nalgebra::Vector3;
use sononav::fsm::{Phase, TransitionEvent};
use sononav::geometry::Pose;
use sononav::io::{decode_osc, encode_osc, event_message, ingest_pose, pose_message, OscSender};
use sononav::mapping::{map_params, MappingConfig, NormalizedError};

fn main() -> anyhow::Result<()> {
    let pose = Pose::from_tip_and_axis(Vector3::new(-21.0, 0.4, 35.2), Vector3::new(0.3, 1.0, -0.1));
    let msg = pose_message(0, &pose);
    let bytes = encode_osc(&msg)?;
    println!("{} -> {} bytes", msg.address, bytes.len());
    for row in bytes.chunks(16) {
        println!(
            "  {}",
            row.iter().map(|b| format!("{b:02x}")).collect::<Vec<_>>().join(" ")
        );
    }

    let params = map_params(
        Phase::Angle,
        &NormalizedError::new(0.0, 0.0, 0.5, 0.2),
        &MappingConfig::default(),
    );
    for m in [
        sononav::io::params_message(&params),
        event_message(&TransitionEvent::EpToAp),
    ] {
        let back = decode_osc(&encode_osc(&m)?)?;
        assert_eq!(back, m);
        println!("{} {:?}", back.address, back.args);
    }

    let rx = UdpSocket::bind("127.0.0.1:0")?;
    OscSender::new(rx.local_addr()?)?.send(&msg)?;
    let mut buf = [0u8; 512];
    let n = rx.recv(&mut buf)?;
    let inbound = ingest_pose(&decode_osc(&buf[..n])?, 1)?;
    println!(
        "received target {} at {:?}",
        inbound.target_id,
        inbound.pose.position.as_slice()
    );
    Ok(())
}
