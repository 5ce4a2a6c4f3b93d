use std::net::TcpStream;
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use serde_json::{json, Value};
use sononav::config::EngineConfig;
use sononav::geometry::{AnatomicalFrame, PlannedTrajectory};
use sononav::harness::{LiveEngine, ServeOptions};
use sononav::io::{ClientFrame, ServerFrame};
use sononav::{LabeledTarget, TargetPlan};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

type Client = WebSocket<MaybeTlsStream<TcpStream>>;

fn start() -> LiveEngine {
    let mut config = EngineConfig::default();
    config.network.osc_listen = "127.0.0.1:0".parse().unwrap();
    config.network.bridge_listen = "127.0.0.1:0".parse().unwrap();
    let plan = TargetPlan {
        frame: AnatomicalFrame::identity(),
        targets: vec![
            LabeledTarget {
                label: "left".into(),
                trajectory: PlannedTrajectory::new(Vector3::new(-20.0, 0.0, 30.0), Vector3::new(0.2, 1.0, 0.0))
                    .unwrap(),
            },
            LabeledTarget {
                label: "right".into(),
                trajectory: PlannedTrajectory::new(Vector3::new(20.0, 0.0, 30.0), Vector3::new(-0.2, 1.0, 0.0))
                    .unwrap(),
            },
        ],
        thresholds: config.thresholds,
    };
    LiveEngine::start(ServeOptions {
        config,
        plan,
        audio: None,
        realtime_audio: false,
        session_path: None,
    })
    .unwrap()
}

fn connect(engine: &LiveEngine) -> Client {
    let (ws, _) = tungstenite::connect(format!("ws://{}", engine.bridge_addr())).unwrap();
    if let MaybeTlsStream::Plain(s) = ws.get_ref() {
        s.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
    }
    ws
}

fn next_json(ws: &mut Client) -> Value {
    loop {
        match ws.read().expect("frame before timeout") {
            Message::Text(t) => return serde_json::from_str(&t).unwrap(),
            Message::Ping(_) | Message::Pong(_) => continue,
            other => panic!("unexpected message {other:?}"),
        }
    }
}

fn pose_frame(target_id: i64, position: [f64; 3]) -> String {
    json!({
        "type": "pose",
        "target_id": target_id,
        "position": position,
        // rotation taking +z onto +y
        "orientation": [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0],
    })
    .to_string()
}

fn wait_for_subscribers(engine: &LiveEngine, n: usize) {
    let deadline = Instant::now() + Duration::from_secs(5);
    while engine.broadcaster().subscriber_count() < n {
        assert!(Instant::now() < deadline, "clients never subscribed");
        std::thread::sleep(Duration::from_millis(5));
    }
}

#[test]
fn pose_frame_produces_state_frame() {
    let engine = start();
    let mut ws = connect(&engine);
    wait_for_subscribers(&engine, 1);
    ws.send(Message::Text(pose_frame(1, [20.1, 0.0, 30.2]))).unwrap();
    let v = next_json(&mut ws);
    assert_eq!(v["type"], "state");
    assert_eq!(v["snapshot"], false);
    assert_eq!(v["seq"], 1);
    assert_eq!(v["target_id"], 1);
    assert_eq!(v["target_label"], "right");
    assert_eq!(v["phase"], "AP");
    for key in ["e_x", "e_y", "e_phi", "e_delta", "theta", "d"] {
        assert!(v["error"][key].is_number(), "error.{key} missing in {v}");
    }
    assert!(v["error"]["d"].as_f64().unwrap() < 0.5);
    assert!(v["params"]["fundamental_hz"].is_number());
    // phase events are bare strings, per-dimension events `{"DimensionReached": "x"}`
    let events = v["events"].as_array().unwrap();
    let names: Vec<&str> = events.iter().filter_map(|e| e.as_str()).collect();
    assert!(names.contains(&"EnterEP") && names.contains(&"EPtoAP"), "{events:?}");
    assert!(events.contains(&json!({"DimensionReached": "delta"})), "{events:?}");

    // the typed frame parses the same payload
    let typed: ServerFrame = serde_json::from_value(v).unwrap();
    assert!(matches!(typed, ServerFrame::State(s) if s.target_id == 1));
    engine.stop().unwrap();
}

#[test]
fn every_subscriber_sees_every_tick() {
    let engine = start();
    let mut a = connect(&engine);
    let mut b = connect(&engine);
    wait_for_subscribers(&engine, 2);
    for i in 0..5 {
        a.send(Message::Text(pose_frame(0, [-20.0 + i as f64, 0.0, 30.0])))
            .unwrap();
        let fa = next_json(&mut a);
        let fb = next_json(&mut b);
        assert_eq!(fa, fb);
        assert_eq!(fa["seq"], i + 1);
    }
    engine.stop().unwrap();
}

#[test]
fn malformed_frames_get_error_replies() {
    let engine = start();
    let mut ws = connect(&engine);
    wait_for_subscribers(&engine, 1);
    for bad in [
        "not json".to_string(),
        json!({"type": "pose", "target_id": 7, "position": [0, 0, 0], "orientation": [1, 0, 0, 0]}).to_string(),
        json!({"type": "pose", "target_id": 0, "position": [0, 0, 0], "orientation": [2, 0, 0, 0]}).to_string(),
        json!({"type": "pose", "target_id": 0, "position": [0, 0], "orientation": [1, 0, 0, 0]}).to_string(),
        json!({"type": "pose", "target_id": 0, "position": [0, 0, 0], "orientation": [1, 0, 0, 0], "extra": 1})
            .to_string(),
        json!({"type": "shutdown"}).to_string(),
    ] {
        ws.send(Message::Text(bad.clone())).unwrap();
        let v = next_json(&mut ws);
        assert_eq!(v["type"], "error", "for {bad}");
        assert!(!v["message"].as_str().unwrap().is_empty());
    }
    // still usable afterwards
    ws.send(Message::Text(pose_frame(0, [-20.0, 0.0, 30.0]))).unwrap();
    assert_eq!(next_json(&mut ws)["type"], "state");
    assert_eq!(engine.stats().ticks, 1);
    engine.stop().unwrap();
}

#[test]
fn late_subscriber_gets_snapshot_first() {
    let engine = start();
    let mut first = connect(&engine);
    wait_for_subscribers(&engine, 1);
    first.send(Message::Text(pose_frame(0, [-20.0, 0.0, 30.0]))).unwrap();
    let live = next_json(&mut first);
    assert!(!live["events"].as_array().unwrap().is_empty());

    let mut late = connect(&engine);
    let snap = next_json(&mut late);
    assert_eq!(snap["snapshot"], true);
    assert_eq!(snap["seq"], live["seq"]);
    assert_eq!(snap["phase"], live["phase"]);
    assert_eq!(snap["events"], json!([]));
    engine.stop().unwrap();
}

#[test]
fn client_frame_schema() {
    let f: ClientFrame = serde_json::from_str(&pose_frame(1, [1.0, 2.0, 3.0])).unwrap();
    let ClientFrame::Pose {
        target_id,
        position,
        orientation,
    } = f;
    assert_eq!((target_id, position), (1, [1.0, 2.0, 3.0]));
    assert!((orientation[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
}
