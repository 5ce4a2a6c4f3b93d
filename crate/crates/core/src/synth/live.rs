use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use super::{write_wav, AudioBlock, PulseSynth, SynthConfig, SynthError, WavFormat};
use crate::handoff::LatestValue;
use crate::mapping::{EarconSpec, SynthParams};

/// Destination for rendered blocks. Implementations must not block for long:
/// they run on the render thread.
pub trait AudioSink: Send {
    fn write_block(&mut self, block: &AudioBlock);
    fn finish(&mut self) {}
}

/// Discards audio.
pub struct NullSink;

impl AudioSink for NullSink {
    fn write_block(&mut self, _block: &AudioBlock) {}
}

/// Keeps every block in memory; clone the handle to inspect from elsewhere.
#[derive(Clone, Default)]
pub struct CollectSink {
    pub samples: Arc<Mutex<Vec<f32>>>,
}

impl AudioSink for CollectSink {
    fn write_block(&mut self, block: &AudioBlock) {
        self.samples.lock().unwrap().extend_from_slice(&block.samples);
    }
}

/// Accumulates audio and writes a WAV file when the renderer stops.
pub struct WavFileSink {
    path: PathBuf,
    format: WavFormat,
    audio: AudioBlock,
}

impl WavFileSink {
    pub fn new(path: impl Into<PathBuf>, sample_rate_hz: u32, format: WavFormat) -> Self {
        Self {
            path: path.into(),
            format,
            audio: AudioBlock::empty(sample_rate_hz),
        }
    }
}

impl AudioSink for WavFileSink {
    fn write_block(&mut self, block: &AudioBlock) {
        self.audio.append(block);
    }

    fn finish(&mut self) {
        if let Err(e) = write_wav(&self.path, &self.audio, self.format) {
            log::error!("writing {}: {e}", self.path.display());
        }
    }
}

/// Real-time render loop on its own thread.
///
/// Parameters are read from a [`LatestValue`] once per block; earcons arrive
/// over a channel. The loop never waits on the engine.
pub struct LiveRenderer {
    params: Arc<LatestValue<SynthParams>>,
    earcons: Sender<EarconSpec>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl LiveRenderer {
    /// Starts rendering into `sink`. With `realtime` false, blocks are produced
    /// as fast as possible.
    pub fn spawn(config: SynthConfig, mut sink: Box<dyn AudioSink>, realtime: bool) -> Result<Self, SynthError> {
        let mut synth = PulseSynth::new(config.clone())?;
        let params = Arc::new(LatestValue::new());
        let (earcons, rx): (Sender<EarconSpec>, Receiver<EarconSpec>) = mpsc::channel();
        let stop = Arc::new(AtomicBool::new(false));

        let thread_params = Arc::clone(&params);
        let thread_stop = Arc::clone(&stop);
        let block_time = Duration::from_secs_f64(config.block_size as f64 / config.sample_rate_hz as f64);
        let handle = std::thread::Builder::new()
            .name("sononav-audio".into())
            .spawn(move || {
                let start = Instant::now();
                let mut blocks: u32 = 0;
                while !thread_stop.load(Ordering::Relaxed) {
                    if let Some(p) = thread_params.take_if_newer() {
                        if let Err(e) = synth.set_params(p) {
                            log::warn!("ignoring synth params: {e}");
                        }
                    }
                    while let Ok(spec) = rx.try_recv() {
                        synth.trigger_earcon(spec);
                    }
                    let block = synth.render(config.block_size);
                    sink.write_block(&block);
                    blocks += 1;
                    if realtime {
                        let due = start + block_time * blocks;
                        if let Some(wait) = due.checked_duration_since(Instant::now()) {
                            std::thread::sleep(wait);
                        }
                    }
                }
                sink.finish();
            })?;

        Ok(Self {
            params,
            earcons,
            stop,
            handle: Some(handle),
        })
    }

    pub fn set_params(&self, params: SynthParams) {
        self.params.publish(params);
    }

    pub fn trigger_earcon(&self, spec: EarconSpec) {
        let _ = self.earcons.send(spec);
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

impl Drop for LiveRenderer {
    fn drop(&mut self) {
        self.shutdown();
    }
}
