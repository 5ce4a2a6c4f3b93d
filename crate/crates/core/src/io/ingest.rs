//! Inbound pose messages and the OSC address space of the engine.

use std::net::{SocketAddr, UdpSocket};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use thiserror::Error;

use super::osc::{decode_osc, encode_osc, OscArg, OscError, OscMessage};
use crate::fsm::TransitionEvent;
use crate::geometry::Pose;
use crate::handoff::NewestWinsQueue;
use crate::mapping::SynthParams;

/// Inbound tool pose: `,ifffffff` target id, position xyz (mm), quaternion wxyz.
pub const POSE_ADDRESS: &str = "/sononav/pose";
/// Outbound synthesis parameters.
pub const PARAMS_ADDRESS: &str = "/sononav/params";
/// Outbound transition events.
pub const EVENT_ADDRESS: &str = "/sononav/event";

/// Largest quaternion norm deviation that is silently renormalized.
pub const QUATERNION_RENORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error(transparent)]
    Osc(#[from] OscError),
    #[error("unexpected address {0:?}")]
    WrongAddress(String),
    #[error("pose message needs int32 target id, 3 position floats and 4 quaternion floats")]
    BadArguments,
    #[error("quaternion norm {0} too far from 1")]
    BadQuaternion(f64),
    #[error("non-finite position")]
    NonFinite,
    #[error("unknown target id {id} (plan has {count} targets)")]
    UnknownTarget { id: i64, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InboundPose {
    pub target_id: usize,
    pub pose: Pose,
}

/// Validates raw pose components. The quaternion (`[w, x, y, z]`) is
/// renormalized when its norm is within [`QUATERNION_RENORM_TOLERANCE`] of 1.
pub fn validate_pose(
    target_id: i64,
    position: [f64; 3],
    quaternion: [f64; 4],
    target_count: usize,
) -> Result<InboundPose, IngestError> {
    if target_id < 0 || target_id as u64 >= target_count as u64 {
        return Err(IngestError::UnknownTarget {
            id: target_id,
            count: target_count,
        });
    }
    let position = Vector3::from(position);
    if position.iter().any(|c| !c.is_finite()) {
        return Err(IngestError::NonFinite);
    }
    let [w, x, y, z] = quaternion;
    let q = Quaternion::new(w, x, y, z);
    let norm = q.norm();
    if !norm.is_finite() || (norm - 1.0).abs() >= QUATERNION_RENORM_TOLERANCE {
        return Err(IngestError::BadQuaternion(norm));
    }
    Ok(InboundPose {
        target_id: target_id as usize,
        pose: Pose::new(position, UnitQuaternion::from_quaternion(q)),
    })
}

/// Decodes a `/sononav/pose` message.
pub fn ingest_pose(msg: &OscMessage, target_count: usize) -> Result<InboundPose, IngestError> {
    if msg.address != POSE_ADDRESS {
        return Err(IngestError::WrongAddress(msg.address.clone()));
    }
    if msg.args.len() != 8 {
        return Err(IngestError::BadArguments);
    }
    let id = msg.args[0].as_int().ok_or(IngestError::BadArguments)?;
    let mut f = [0.0f64; 7];
    for (slot, arg) in f.iter_mut().zip(&msg.args[1..]) {
        *slot = arg.as_float().ok_or(IngestError::BadArguments)? as f64;
    }
    validate_pose(id as i64, [f[0], f[1], f[2]], [f[3], f[4], f[5], f[6]], target_count)
}

pub fn pose_message(target_id: i32, pose: &Pose) -> OscMessage {
    let q = pose.orientation.quaternion();
    let mut args = vec![OscArg::Int(target_id)];
    args.extend(
        [pose.position.x, pose.position.y, pose.position.z, q.w, q.i, q.j, q.k]
            .into_iter()
            .map(|v| OscArg::Float(v as f32)),
    );
    OscMessage::new(POSE_ADDRESS, args)
}

/// `,sffs[f...]`: phase, fundamental, pulse interval, mode, then chord
/// frequencies in chord mode.
pub fn params_message(params: &SynthParams) -> OscMessage {
    let mode = match params.mode {
        crate::mapping::SynthMode::PulseStream => "pulse",
        crate::mapping::SynthMode::Chord => "chord",
    };
    let mut args = vec![
        OscArg::String(params.active_phase.as_str().into()),
        OscArg::Float(params.fundamental_hz as f32),
        OscArg::Float(params.pulse_interval_s as f32),
        OscArg::String(mode.into()),
    ];
    args.extend(params.chord_freqs.iter().map(|&f| OscArg::Float(f as f32)));
    OscMessage::new(PARAMS_ADDRESS, args)
}

/// `,s` with the event name, or `,ss` with the dimension for per-dimension events.
pub fn event_message(event: &TransitionEvent) -> OscMessage {
    let mut args = vec![OscArg::String(event.name().into())];
    if let Some(d) = event.dimension() {
        args.push(OscArg::String(d.as_str().into()));
    }
    OscMessage::new(EVENT_ADDRESS, args)
}

/// Counters kept by [`UdpIngress`].
#[derive(Debug, Default)]
pub struct IngressStats {
    pub received: AtomicU64,
    pub rejected: AtomicU64,
}

/// UDP listener thread feeding validated poses into a newest-wins queue.
pub struct UdpIngress {
    local_addr: SocketAddr,
    stop: Arc<AtomicBool>,
    stats: Arc<IngressStats>,
    handle: Option<JoinHandle<()>>,
}

impl UdpIngress {
    pub fn spawn(
        bind: SocketAddr,
        target_count: usize,
        queue: Arc<NewestWinsQueue<InboundPose>>,
    ) -> std::io::Result<Self> {
        let socket = UdpSocket::bind(bind)?;
        socket.set_read_timeout(Some(Duration::from_millis(20)))?;
        let local_addr = socket.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let stats = Arc::new(IngressStats::default());
        let (t_stop, t_stats) = (Arc::clone(&stop), Arc::clone(&stats));
        let handle = std::thread::Builder::new()
            .name("sononav-osc-in".into())
            .spawn(move || {
                let mut buf = vec![0u8; 65_536];
                while !t_stop.load(Ordering::Relaxed) {
                    let n = match socket.recv(&mut buf) {
                        Ok(n) => n,
                        Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
                            continue
                        }
                        Err(e) => {
                            log::error!("osc ingress: {e}");
                            break;
                        }
                    };
                    t_stats.received.fetch_add(1, Ordering::Relaxed);
                    match decode_osc(&buf[..n])
                        .map_err(IngestError::from)
                        .and_then(|m| ingest_pose(&m, target_count))
                    {
                        Ok(p) => {
                            queue.push(p);
                        }
                        Err(e) => {
                            t_stats.rejected.fetch_add(1, Ordering::Relaxed);
                            log::debug!("dropping datagram: {e}");
                        }
                    }
                }
            })?;
        Ok(Self {
            local_addr,
            stop,
            stats,
            handle: Some(handle),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn stats(&self) -> &IngressStats {
        &self.stats
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

impl Drop for UdpIngress {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Sends engine output over UDP as OSC.
pub struct OscSender {
    socket: UdpSocket,
    dest: SocketAddr,
}

impl OscSender {
    pub fn new(dest: SocketAddr) -> std::io::Result<Self> {
        let bind: SocketAddr = if dest.is_ipv4() {
            "0.0.0.0:0".parse().expect("literal")
        } else {
            "[::]:0".parse().expect("literal")
        };
        Ok(Self {
            socket: UdpSocket::bind(bind)?,
            dest,
        })
    }

    pub fn send(&self, msg: &OscMessage) -> std::io::Result<()> {
        let bytes = encode_osc(msg).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
        self.socket.send_to(&bytes, self.dest).map(|_| ())
    }
}
