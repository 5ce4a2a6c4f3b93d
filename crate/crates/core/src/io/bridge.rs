//! State stream for interactive clients.
//!
//! Every engine tick is published as a JSON text frame over a WebSocket.
//! A new subscriber first receives a snapshot of the latest state, then one
//! frame per tick. Slow subscribers lose their oldest queued frames.
//! Clients may send virtual tool poses in the same shape as the OSC pose
//! message; malformed input is answered with an error frame and the
//! connection stays open.
//!
//! Server frames:
//!
//! ```json
//! {"type":"state","seq":12,"snapshot":false,"timestamp_s":0.24,"target_id":0,
//!  "target_label":"L4-left","error":{"e_x":..,"e_y":..,"e_phi":..,"e_delta":..,"d":..,"theta":..},
//!  "phase":"EP","params":{..},"events":["EnterEP"]}
//! {"type":"error","message":"..."}
//! ```
//!
//! Client frames:
//!
//! ```json
//! {"type":"pose","target_id":0,"position":[x,y,z],"orientation":[w,x,y,z]}
//! ```

use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, Weak};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tungstenite::{Message, WebSocket};

use super::ingest::{validate_pose, InboundPose};
use super::session::SessionRecord;
use crate::fsm::{Phase, TransitionEvent};
use crate::geometry::ErrorVector;
use crate::handoff::NewestWinsQueue;
use crate::mapping::SynthParams;

/// Frames buffered per subscriber before the oldest are dropped.
pub const SUBSCRIBER_QUEUE: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub seq: u64,
    pub snapshot: bool,
    pub timestamp_s: f64,
    pub target_id: usize,
    #[serde(default)]
    pub target_label: String,
    pub error: ErrorVector,
    pub phase: Phase,
    pub params: SynthParams,
    pub events: Vec<TransitionEvent>,
}

impl StateFrame {
    pub fn from_record(record: &SessionRecord, target_label: &str) -> Self {
        Self {
            seq: 0,
            snapshot: false,
            timestamp_s: record.timestamp_s,
            target_id: record.target_id,
            target_label: target_label.to_owned(),
            error: record.error,
            phase: record.phase,
            params: record.params.clone(),
            events: record.events.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerFrame {
    State(StateFrame),
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientFrame {
    Pose {
        target_id: i64,
        position: [f64; 3],
        /// `[w, x, y, z]`
        orientation: [f64; 4],
    },
}

/// Parses and validates one inbound text frame.
pub fn parse_client_frame(text: &str, target_count: usize) -> Result<InboundPose, String> {
    let frame: ClientFrame = serde_json::from_str(text).map_err(|e| format!("bad frame: {e}"))?;
    match frame {
        ClientFrame::Pose {
            target_id,
            position,
            orientation,
        } => validate_pose(target_id, position, orientation, target_count).map_err(|e| e.to_string()),
    }
}

/// One subscriber's frame queue.
pub struct Subscription {
    queue: NewestWinsQueue<ServerFrame>,
}

impl Subscription {
    pub fn try_next(&self) -> Option<ServerFrame> {
        self.queue.pop()
    }

    pub fn next_timeout(&self, timeout: Duration) -> Option<ServerFrame> {
        self.queue.pop_timeout(timeout)
    }

    pub fn drain(&self) -> Vec<ServerFrame> {
        self.queue.drain()
    }

    pub fn dropped(&self) -> u64 {
        self.queue.dropped()
    }
}

/// Fan-out of state frames to any number of subscribers.
pub struct StateBroadcaster {
    latest: Mutex<Option<StateFrame>>,
    subscribers: Mutex<Vec<Weak<Subscription>>>,
    seq: AtomicU64,
    queue_len: usize,
}

impl Default for StateBroadcaster {
    fn default() -> Self {
        Self::new(SUBSCRIBER_QUEUE)
    }
}

impl StateBroadcaster {
    pub fn new(queue_len: usize) -> Self {
        Self {
            latest: Mutex::new(None),
            subscribers: Mutex::new(Vec::new()),
            seq: AtomicU64::new(0),
            queue_len,
        }
    }

    /// Registers a subscriber. If any state was published, the first queued
    /// frame is a snapshot of it (with its events cleared).
    pub fn subscribe(&self) -> Arc<Subscription> {
        let sub = Arc::new(Subscription {
            queue: NewestWinsQueue::new(self.queue_len),
        });
        // Hold the subscriber list while reading `latest` so no frame
        // published in between is missed or duplicated.
        let mut subs = self.subscribers.lock().unwrap();
        if let Some(latest) = self.latest.lock().unwrap().as_ref() {
            let mut snap = latest.clone();
            snap.snapshot = true;
            snap.events.clear();
            sub.queue.push(ServerFrame::State(snap));
        }
        subs.push(Arc::downgrade(&sub));
        sub
    }

    pub fn subscriber_count(&self) -> usize {
        let mut subs = self.subscribers.lock().unwrap();
        subs.retain(|w| w.strong_count() > 0);
        subs.len()
    }

    /// Publishes a tick; assigns the sequence number.
    pub fn publish(&self, mut frame: StateFrame) -> u64 {
        let mut subs = self.subscribers.lock().unwrap();
        frame.seq = self.seq.fetch_add(1, Ordering::Relaxed) + 1;
        frame.snapshot = false;
        *self.latest.lock().unwrap() = Some(frame.clone());
        subs.retain(|w| match w.upgrade() {
            Some(s) => {
                s.queue.push(ServerFrame::State(frame.clone()));
                true
            }
            None => false,
        });
        frame.seq
    }

    pub fn latest(&self) -> Option<StateFrame> {
        self.latest.lock().unwrap().clone()
    }
}

/// WebSocket endpoint serving a [`StateBroadcaster`].
pub struct BridgeServer {
    local_addr: SocketAddr,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl BridgeServer {
    pub fn spawn(
        bind: SocketAddr,
        broadcaster: Arc<StateBroadcaster>,
        inbound: Arc<NewestWinsQueue<InboundPose>>,
        target_count: usize,
    ) -> std::io::Result<Self> {
        let listener = TcpListener::bind(bind)?;
        listener.set_nonblocking(true)?;
        let local_addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let t_stop = Arc::clone(&stop);
        let handle = std::thread::Builder::new()
            .name("sononav-bridge".into())
            .spawn(move || {
                let mut workers = Vec::new();
                while !t_stop.load(Ordering::Relaxed) {
                    match listener.accept() {
                        Ok((stream, peer)) => {
                            let (b, q, s) = (Arc::clone(&broadcaster), Arc::clone(&inbound), Arc::clone(&t_stop));
                            workers.push(std::thread::spawn(move || {
                                if let Err(e) = serve_client(stream, &b, &q, target_count, &s) {
                                    log::debug!("bridge client {peer}: {e}");
                                }
                            }));
                        }
                        Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                            std::thread::sleep(Duration::from_millis(10));
                        }
                        Err(e) => {
                            log::error!("bridge accept: {e}");
                            break;
                        }
                    }
                }
                for w in workers {
                    let _ = w.join();
                }
            })?;
        Ok(Self {
            local_addr,
            stop,
            handle: Some(handle),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for BridgeServer {
    fn drop(&mut self) {
        self.shutdown();
    }
}

#[allow(clippy::result_large_err)]
fn send_frame(ws: &mut WebSocket<TcpStream>, frame: &ServerFrame) -> tungstenite::Result<()> {
    let text = serde_json::to_string(frame).expect("frames serialize");
    ws.send(Message::Text(text))
}

#[allow(clippy::result_large_err)]
fn serve_client(
    stream: TcpStream,
    broadcaster: &StateBroadcaster,
    inbound: &NewestWinsQueue<InboundPose>,
    target_count: usize,
    stop: &AtomicBool,
) -> tungstenite::Result<()> {
    stream.set_nonblocking(false)?;
    let mut ws = tungstenite::accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(e) => e,
        tungstenite::HandshakeError::Interrupted(_) => tungstenite::Error::ConnectionClosed,
    })?;
    ws.get_ref().set_read_timeout(Some(Duration::from_millis(5)))?;
    let sub = broadcaster.subscribe();

    while !stop.load(Ordering::Relaxed) {
        for frame in sub.drain() {
            send_frame(&mut ws, &frame)?;
        }
        match ws.read() {
            Ok(Message::Text(text)) => match parse_client_frame(&text, target_count) {
                Ok(pose) => {
                    inbound.push(pose);
                }
                Err(message) => send_frame(&mut ws, &ServerFrame::Error { message })?,
            },
            Ok(Message::Binary(_)) => send_frame(
                &mut ws,
                &ServerFrame::Error {
                    message: "binary frames are not supported".into(),
                },
            )?,
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => break,
            Err(e) => return Err(e),
        }
    }
    let _ = ws.close(None);
    let _ = ws.flush();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::SynthMode;

    fn frame(t: f64) -> StateFrame {
        StateFrame {
            seq: 0,
            snapshot: false,
            timestamp_s: t,
            target_id: 0,
            target_label: "L1-left".into(),
            error: ErrorVector::default(),
            phase: Phase::EntryPoint,
            params: SynthParams {
                mode: SynthMode::PulseStream,
                fundamental_hz: 880.0,
                pulse_interval_s: 0.35,
                chord_freqs: vec![],
                active_phase: Phase::EntryPoint,
            },
            events: vec![TransitionEvent::EnterEp],
        }
    }

    fn state(f: ServerFrame) -> StateFrame {
        match f {
            ServerFrame::State(s) => s,
            other => panic!("expected state, got {other:?}"),
        }
    }

    #[test]
    fn late_subscriber_gets_snapshot_first() {
        let b = StateBroadcaster::default();
        b.publish(frame(0.0));
        b.publish(frame(0.02));
        let sub = b.subscribe();
        b.publish(frame(0.04));
        let frames: Vec<_> = sub.drain().into_iter().map(state).collect();
        assert_eq!(frames.len(), 2);
        assert!(frames[0].snapshot);
        assert_eq!(frames[0].timestamp_s, 0.02);
        assert!(frames[0].events.is_empty());
        assert!(!frames[1].snapshot);
        assert_eq!(frames[1].seq, 3);
    }

    #[test]
    fn subscribers_see_same_sequence() {
        let b = StateBroadcaster::new(8);
        let a = b.subscribe();
        let c = b.subscribe();
        for i in 0..20 {
            b.publish(frame(i as f64));
            if i % 3 == 0 {
                a.drain();
            }
        }
        let tail = |s: &Subscription| s.drain().into_iter().map(|f| state(f).seq).collect::<Vec<_>>();
        let ta = tail(&a);
        let tc = tail(&c);
        assert!(tc.ends_with(&ta));
        assert_eq!(tc, (13..=20).collect::<Vec<_>>());
        assert_eq!(c.dropped(), 12);
        drop(a);
        assert_eq!(b.subscriber_count(), 1);
    }

    #[test]
    fn client_frame_parsing() {
        let ok = parse_client_frame(
            r#"{"type":"pose","target_id":1,"position":[1,2,3],"orientation":[1,0,0,0]}"#,
            2,
        )
        .unwrap();
        assert_eq!(ok.target_id, 1);
        assert!(parse_client_frame("{not json", 2).is_err());
        assert!(parse_client_frame(
            r#"{"type":"pose","target_id":5,"position":[1,2,3],"orientation":[1,0,0,0]}"#,
            2
        )
        .unwrap_err()
        .contains("unknown target"));
    }

    #[test]
    fn frame_json_shape() {
        let json = serde_json::to_value(ServerFrame::State(frame(1.0))).unwrap();
        assert_eq!(json["type"], "state");
        assert_eq!(json["phase"], "EP");
        assert_eq!(json["events"][0], "EnterEP");
        let err = serde_json::to_value(ServerFrame::Error { message: "x".into() }).unwrap();
        assert_eq!(err["type"], "error");
    }
}
