use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use sononav::config::EngineConfig;
use sononav::harness::{self, compute_metrics, run_scenario, LiveEngine, Scenario, ServeOptions, TrialMetrics};
use sononav::io::session::{read_session, write_session};
use sononav::plan::TargetPlan;
use sononav::stats::{summarize, SummarySpec, Table};
use sononav::synth::{offline_render, write_wav, AudioSink, NullSink, WavFileSink, WavFormat};

#[derive(Parser)]
#[command(name = "sononav", version, about = "Auditory navigation engine for tool alignment")]
struct Cli {
    /// Engine configuration file (TOML).
    #[arg(long, global = true, env = "SONONAV_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario file and write its session log and metrics.
    Run {
        scenario: PathBuf,
        /// Session log output (JSONL).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Metrics output (JSON).
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Also render the session to a WAV file.
        #[arg(long)]
        wav: Option<PathBuf>,
    },
    /// Render a session log to WAV.
    Replay {
        log: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// 32-bit float samples instead of 16-bit PCM.
        #[arg(long)]
        float: bool,
        /// Re-run the engine on the logged poses and check the phase/event sequence.
        #[arg(long)]
        verify: bool,
    },
    /// Run the live engine with OSC ingress and the WebSocket bridge.
    Serve {
        /// Target plan (TOML).
        plan: PathBuf,
        /// Write rendered audio to this WAV file instead of discarding it.
        #[arg(long)]
        wav: Option<PathBuf>,
        /// Stop after this many seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Session log path; defaults to a timestamped file in the log directory.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Summarize session logs, or a CSV table, as CSV.
    Report {
        /// Session logs (JSONL).
        logs: Vec<PathBuf>,
        /// Group trials by the log file name instead of the target label.
        #[arg(long)]
        by_file: bool,
        /// Summarize this CSV table instead of session logs.
        #[arg(long, conflicts_with = "logs")]
        table: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', requires = "table")]
        group_by: Vec<String>,
        #[arg(long, value_delimiter = ',', requires = "table")]
        values: Vec<String>,
        /// Paired difference columns as `a:b`.
        #[arg(long, value_delimiter = ',', requires = "table")]
        diff: Vec<String>,
        /// Column flagging excluded rows.
        #[arg(long, requires = "table")]
        exclude: Option<String>,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<EngineConfig> {
    let mut cfg = match path {
        Some(p) => EngineConfig::load(p)?,
        None => EngineConfig::default(),
    };
    cfg.apply_process_env()?;
    cfg.validate()?;
    Ok(cfg)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn print_metrics(metrics: &[TrialMetrics]) {
    for m in metrics {
        let time = m
            .alignment_time_s
            .map_or_else(|| "n/a".to_owned(), |t| format!("{t:.2} s"));
        let err = m.final_error.map_or_else(
            || "not converged".to_owned(),
            |e| format!("d {:.3} mm, theta {:.3} deg", e.d, e.theta),
        );
        println!("{:<12} alignment {time:>9}  final {err}", m.label);
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Run {
            scenario,
            log,
            metrics,
            wav,
        } => {
            let sc = Scenario::load(&scenario)?;
            let (session, trials) = run_scenario(&sc, &cfg)?;
            print_metrics(&trials);
            if let Some(p) = log {
                write_session(&p, &session)?;
            }
            if let Some(p) = metrics {
                serde_json::to_writer_pretty(output(Some(&p))?, &trials)?;
            }
            if let Some(p) = wav {
                let r = offline_render(&session, &cfg.synth)?;
                write_wav(&p, &r.audio, WavFormat::Pcm16)?;
            }
        }
        Command::Replay {
            log,
            out,
            float,
            verify,
        } => {
            let session = read_session(&log)?;
            if verify {
                let again = sononav::replay(&session)?;
                if again.phases() != session.phases() || again.event_timeline() != session.event_timeline() {
                    bail!("replay diverged from the recorded phase/event sequence");
                }
                println!("replay matches {} records", session.records.len());
            }
            let r = offline_render(&session, &cfg.synth)?;
            let format = if float { WavFormat::Float32 } else { WavFormat::Pcm16 };
            write_wav(&out, &r.audio, format)?;
            println!(
                "{:.2} s of audio, {} events -> {}",
                r.audio.duration_s(),
                r.events.len(),
                out.display()
            );
        }
        Command::Serve {
            plan,
            wav,
            duration,
            log,
        } => {
            let text = std::fs::read_to_string(&plan).with_context(|| format!("reading {}", plan.display()))?;
            let mut target_plan: TargetPlan = toml::from_str(&text)?;
            if !text.contains("[thresholds]") {
                target_plan.thresholds = cfg.thresholds;
            }
            let session_path = match log {
                Some(p) => p,
                None => {
                    std::fs::create_dir_all(&cfg.network.log_dir)?;
                    let stamp = SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs();
                    cfg.network.log_dir.join(format!("session-{stamp}.jsonl"))
                }
            };
            let sink: Box<dyn AudioSink> = match wav {
                Some(p) => Box::new(WavFileSink::new(p, cfg.synth.sample_rate_hz, WavFormat::Pcm16)),
                None => Box::new(NullSink),
            };
            let live = LiveEngine::start(ServeOptions {
                config: cfg.clone(),
                plan: target_plan,
                audio: Some(sink),
                realtime_audio: true,
                session_path: Some(session_path.clone()),
            })?;
            log::info!(
                "osc on {}, bridge on ws://{}, logging to {}",
                live.osc_addr(),
                live.bridge_addr(),
                session_path.display()
            );
            match duration {
                Some(s) => std::thread::sleep(Duration::from_secs_f64(s)),
                None => loop {
                    std::thread::sleep(Duration::from_secs(3600));
                },
            }
            let stats = live.stop()?;
            log::info!("{} ticks, mean {:?}, max {:?}", stats.ticks, stats.mean(), stats.max);
        }
        Command::Report {
            logs,
            by_file,
            table,
            group_by,
            values,
            diff,
            exclude,
            out,
        } => {
            let mut w = output(out.as_deref())?;
            if let Some(t) = table {
                let differences = diff
                    .iter()
                    .map(|d| {
                        d.split_once(':')
                            .map(|(a, b)| (a.to_owned(), b.to_owned()))
                            .with_context(|| format!("--diff {d:?} is not a:b"))
                    })
                    .collect::<Result<_>>()?;
                let spec = SummarySpec {
                    group_by,
                    values,
                    differences,
                    exclude_column: exclude,
                };
                summarize(&Table::from_path(&t)?, &spec)?.write_csv(&mut w)?;
            } else {
                if logs.is_empty() {
                    bail!("no session logs given");
                }
                let mut rows = Vec::new();
                for p in &logs {
                    let session = read_session(p).with_context(|| format!("reading {}", p.display()))?;
                    let stem = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                    for mut m in compute_metrics(&session, cfg.sim.dwell_s) {
                        if by_file {
                            m.label = stem.clone();
                        }
                        rows.push(m);
                    }
                }
                harness::report(&rows)?.write_csv(&mut w)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
