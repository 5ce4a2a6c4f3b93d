use std::io::Write;

use nalgebra::{UnitQuaternion, Vector3};
use sononav::geometry::{AnatomicalFrame, PlannedTrajectory};
use sononav::io::{read_session, read_session_from, write_session, write_session_to, SessionError, SessionLog};
use sononav::{Engine, LabeledTarget, MappingConfig, Pose, TargetPlan, ZoneThresholds};

fn engine() -> Engine {
    let plan = TargetPlan {
        frame: AnatomicalFrame::identity(),
        targets: vec![LabeledTarget {
            label: "T".into(),
            trajectory: PlannedTrajectory::new(Vector3::new(0.0, 0.0, 30.0), Vector3::new(0.2, 1.0, 0.1)).unwrap(),
        }],
        thresholds: ZoneThresholds::default(),
    };
    Engine::new(plan, MappingConfig::default()).unwrap()
}

fn recorded(ticks: usize) -> SessionLog {
    let mut engine = engine();
    let mut log = SessionLog::new(engine.session_header(50.0));
    let target = engine.plan().targets[0].trajectory;
    for i in 0..ticks {
        let u = 1.0 - i as f64 / ticks as f64;
        let tilt = UnitQuaternion::from_euler_angles(0.3 * u, 0.0, -0.2 * u);
        let pose = Pose::from_tip_and_axis(
            target.entry_point + Vector3::new(9.0 * u, 0.1, 4.0 * u),
            tilt * target.direction,
        );
        log.records.push(engine.tick(i as f64 / 50.0, &pose, 0).unwrap());
    }
    log
}

fn to_string(log: &SessionLog) -> String {
    let mut buf = Vec::new();
    write_session_to(&mut buf, log).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn hundred_tick_log_round_trips_exactly() {
    let log = recorded(100);
    assert!(log.records.iter().any(|r| !r.events.is_empty()));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.jsonl");
    write_session(&path, &log).unwrap();
    let back = read_session(&path).unwrap();
    assert_eq!(back, log);
    assert_eq!(to_string(&back), to_string(&log));
}

#[test]
fn one_json_object_per_line() {
    let text = to_string(&recorded(10));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    let header: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(header["format"], "sononav-session");
    assert_eq!(header["version"], "1");
    for l in &lines[1..] {
        let rec: serde_json::Value = serde_json::from_str(l).unwrap();
        for key in ["timestamp_s", "target_id", "pose", "error", "phase", "params", "events"] {
            assert!(rec.get(key).is_some(), "record lacks {key}");
        }
    }
}

#[test]
fn unknown_version_is_rejected() {
    let text = to_string(&recorded(3)).replacen("\"version\":\"1\"", "\"version\":\"2\"", 1);
    match read_session_from(text.as_bytes()) {
        Err(SessionError::Version { found }) => assert_eq!(found, "2"),
        other => panic!("expected version error, got {other:?}"),
    }
}

#[test]
fn foreign_format_is_rejected() {
    let text = to_string(&recorded(3)).replacen("sononav-session", "other-log", 1);
    assert!(matches!(read_session_from(text.as_bytes()), Err(SessionError::Format(f)) if f == "other-log"));
    assert!(matches!(read_session_from(&b""[..]), Err(SessionError::Empty)));
}

#[test]
fn truncated_record_reports_its_line() {
    let text = to_string(&recorded(5));
    let cut = text.trim_end().len() - 20;
    let err = read_session_from(&text.as_bytes()[..cut]).unwrap_err();
    match err {
        SessionError::Parse { line, .. } => assert_eq!(line, 6),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn timestamps_must_not_decrease() {
    let mut log = recorded(6);
    log.records[4].timestamp_s = log.records[2].timestamp_s;
    let err = read_session_from(to_string(&log).as_bytes()).unwrap_err();
    assert!(matches!(err, SessionError::NonMonotonic { line: 6, .. }), "{err:?}");

    // equal timestamps are allowed
    let mut log = recorded(6);
    log.records[4].timestamp_s = log.records[3].timestamp_s;
    assert!(read_session_from(to_string(&log).as_bytes()).is_ok());
}

#[test]
fn blank_lines_are_skipped() {
    let log = recorded(4);
    let mut text = to_string(&log);
    text.push('\n');
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    assert_eq!(read_session(f.path()).unwrap(), log);
}
