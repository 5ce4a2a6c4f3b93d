//! Live engine: OSC ingress, engine tick, audio, UI bridge and session log.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use crate::config::EngineConfig;
use crate::engine::Engine;
use crate::handoff::NewestWinsQueue;
use crate::io::bridge::{BridgeServer, StateBroadcaster, StateFrame};
use crate::io::ingest::{event_message, params_message, InboundPose, OscSender, UdpIngress};
use crate::io::session::SessionWriter;
use crate::plan::TargetPlan;
use crate::synth::{AudioSink, LiveRenderer};

use super::HarnessError;

pub struct ServeOptions {
    pub config: EngineConfig,
    pub plan: TargetPlan,
    /// Audio output; `None` disables rendering.
    pub audio: Option<Box<dyn AudioSink>>,
    /// Pace audio blocks to the wall clock.
    pub realtime_audio: bool,
    /// Session log destination.
    pub session_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TickStats {
    pub ticks: u64,
    pub rejected: u64,
    pub total: Duration,
    pub max: Duration,
}

impl TickStats {
    pub fn mean(&self) -> Duration {
        if self.ticks == 0 {
            Duration::ZERO
        } else {
            self.total / self.ticks as u32
        }
    }
}

/// Running live engine. Poses arrive over OSC/UDP or as bridge `pose`
/// frames; each one is processed as a tick stamped with the engine clock.
pub struct LiveEngine {
    ingress: Option<UdpIngress>,
    bridge: Option<BridgeServer>,
    broadcaster: Arc<StateBroadcaster>,
    queue: Arc<NewestWinsQueue<InboundPose>>,
    stats: Arc<Mutex<TickStats>>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<Result<(), HarnessError>>>,
}

impl LiveEngine {
    pub fn start(opts: ServeOptions) -> Result<Self, HarnessError> {
        let ServeOptions {
            config,
            plan,
            audio,
            realtime_audio,
            session_path,
        } = opts;
        config.validate()?;
        let mut engine = Engine::new(plan, config.mapping.clone())?;
        let count = engine.plan().len();
        let labels: Vec<String> = engine.plan().targets.iter().map(|t| t.label.clone()).collect();

        let queue = Arc::new(NewestWinsQueue::new(config.network.ingress_queue));
        let broadcaster = Arc::new(StateBroadcaster::default());
        let ingress = UdpIngress::spawn(config.network.osc_listen, count, Arc::clone(&queue))
            .map_err(|e| HarnessError::Io("osc listen".into(), e))?;
        let bridge = BridgeServer::spawn(
            config.network.bridge_listen,
            Arc::clone(&broadcaster),
            Arc::clone(&queue),
            count,
        )
        .map_err(|e| HarnessError::Io("bridge listen".into(), e))?;
        let sender = config
            .network
            .osc_out
            .map(OscSender::new)
            .transpose()
            .map_err(|e| HarnessError::Io("osc out".into(), e))?;
        let renderer = audio
            .map(|sink| LiveRenderer::spawn(config.synth.clone(), sink, realtime_audio))
            .transpose()?;
        let mut writer = match &session_path {
            Some(p) => Some(SessionWriter::create(
                p,
                &engine.session_header(config.sim.tick_rate_hz),
            )?),
            None => None,
        };

        let stop = Arc::new(AtomicBool::new(false));
        let stats = Arc::new(Mutex::new(TickStats::default()));
        let (t_queue, t_bc, t_stop, t_stats) = (
            Arc::clone(&queue),
            Arc::clone(&broadcaster),
            Arc::clone(&stop),
            Arc::clone(&stats),
        );
        let handle = std::thread::Builder::new()
            .name("sononav-engine".into())
            .spawn(move || {
                let clock = Instant::now();
                while !t_stop.load(Ordering::Relaxed) {
                    let Some(inbound) = t_queue.pop_timeout(Duration::from_millis(20)) else {
                        continue;
                    };
                    let started = Instant::now();
                    let ts = clock.elapsed().as_secs_f64();
                    let record = match engine.tick(ts, &inbound.pose, inbound.target_id) {
                        Ok(r) => r,
                        Err(e) => {
                            log::warn!("tick rejected: {e}");
                            t_stats.lock().expect("stats lock").rejected += 1;
                            continue;
                        }
                    };
                    t_bc.publish(StateFrame::from_record(&record, &labels[record.target_id]));
                    if let Some(r) = &renderer {
                        r.set_params(record.params.clone());
                        for spec in engine.earcons(&record) {
                            r.trigger_earcon(spec);
                        }
                    }
                    if let Some(s) = &sender {
                        let sent = s
                            .send(&params_message(&record.params))
                            .and_then(|_| record.events.iter().try_for_each(|e| s.send(&event_message(e))));
                        if let Err(e) = sent {
                            log::debug!("osc out: {e}");
                        }
                    }
                    if let Some(w) = &mut writer {
                        w.append(&record)?;
                    }
                    let took = started.elapsed();
                    let mut st = t_stats.lock().expect("stats lock");
                    st.ticks += 1;
                    st.total += took;
                    st.max = st.max.max(took);
                }
                if let Some(w) = &mut writer {
                    w.flush()?;
                }
                if let Some(r) = renderer {
                    r.stop();
                }
                Ok(())
            })
            .map_err(|e| HarnessError::Io("engine thread".into(), e))?;

        Ok(Self {
            ingress: Some(ingress),
            bridge: Some(bridge),
            broadcaster,
            queue,
            stats,
            stop,
            handle: Some(handle),
        })
    }

    pub fn osc_addr(&self) -> std::net::SocketAddr {
        self.ingress.as_ref().expect("running").local_addr()
    }

    pub fn bridge_addr(&self) -> std::net::SocketAddr {
        self.bridge.as_ref().expect("running").local_addr()
    }

    pub fn broadcaster(&self) -> &Arc<StateBroadcaster> {
        &self.broadcaster
    }

    /// Poses dropped because the engine fell behind.
    pub fn dropped_poses(&self) -> u64 {
        self.queue.dropped()
    }

    pub fn stats(&self) -> TickStats {
        *self.stats.lock().expect("stats lock")
    }

    pub fn stop(mut self) -> Result<TickStats, HarnessError> {
        self.shutdown()?;
        Ok(self.stats())
    }

    fn shutdown(&mut self) -> Result<(), HarnessError> {
        if let Some(i) = self.ingress.take() {
            i.stop();
        }
        if let Some(b) = self.bridge.take() {
            b.stop();
        }
        self.stop.store(true, Ordering::Relaxed);
        match self.handle.take() {
            Some(h) => h.join().map_err(|_| HarnessError::EnginePanic)?,
            None => Ok(()),
        }
    }
}

impl Drop for LiveEngine {
    fn drop(&mut self) {
        if let Err(e) = self.shutdown() {
            log::error!("live engine: {e}");
        }
    }
}
