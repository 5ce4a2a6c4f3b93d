//! Line-delimited JSON session logs.
//!
//! The first line is a header object carrying the format name, schema
//! version, target plan and mapping configuration. Each following line is
//! one [`SessionRecord`], one per processed tick.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsm::{Phase, TransitionEvent};
use crate::geometry::{ErrorVector, Pose};
use crate::mapping::{MappingConfig, SynthParams};
use crate::plan::TargetPlan;

pub const SESSION_FORMAT: &str = "sononav-session";
pub const SESSION_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session log is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported session version {found:?} (reader supports {SESSION_VERSION:?})")]
    Version { found: String },
    #[error("not a session log (format {0:?})")]
    Format(String),
    #[error("line {line}: timestamp {timestamp} is earlier than the previous record")]
    NonMonotonic { line: usize, timestamp: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub format: String,
    pub version: String,
    pub plan: TargetPlan,
    pub mapping: MappingConfig,
    /// Nominal engine tick rate, Hz.
    pub tick_rate_hz: f64,
}

impl SessionHeader {
    pub fn new(plan: TargetPlan, mapping: MappingConfig, tick_rate_hz: f64) -> Self {
        Self {
            format: SESSION_FORMAT.into(),
            version: SESSION_VERSION.into(),
            plan,
            mapping,
            tick_rate_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    /// Engine-monotonic seconds since session start.
    pub timestamp_s: f64,
    pub target_id: usize,
    pub pose: Pose,
    pub error: ErrorVector,
    pub phase: Phase,
    pub params: SynthParams,
    #[serde(default)]
    pub events: Vec<TransitionEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub header: SessionHeader,
    pub records: Vec<SessionRecord>,
}

impl SessionLog {
    pub fn new(header: SessionHeader) -> Self {
        Self {
            header,
            records: Vec::new(),
        }
    }

    pub fn phases(&self) -> Vec<Phase> {
        self.records.iter().map(|r| r.phase).collect()
    }

    /// `(timestamp, event)` for every event in the log.
    pub fn event_timeline(&self) -> Vec<(f64, TransitionEvent)> {
        self.records
            .iter()
            .flat_map(|r| r.events.iter().map(move |e| (r.timestamp_s, *e)))
            .collect()
    }
}

pub fn write_session_to<W: Write>(mut w: W, log: &SessionLog) -> Result<(), SessionError> {
    serde_json::to_writer(&mut w, &log.header)?;
    w.write_all(b"\n")?;
    for r in &log.records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_session_from<R: Read>(r: R) -> Result<SessionLog, SessionError> {
    let mut lines = BufReader::new(r).lines();
    let header_line = match lines.next() {
        Some(l) => l?,
        None => return Err(SessionError::Empty),
    };
    // Check format/version before the full header so version errors win over
    // schema drift.
    let probe: serde_json::Value = serde_json::from_str(&header_line).map_err(|e| SessionError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let format = probe.get("format").and_then(|v| v.as_str()).unwrap_or_default();
    if format != SESSION_FORMAT {
        return Err(SessionError::Format(format.into()));
    }
    let version = probe.get("version").and_then(|v| v.as_str()).unwrap_or_default();
    if version != SESSION_VERSION {
        return Err(SessionError::Version { found: version.into() });
    }
    let header: SessionHeader = serde_json::from_value(probe).map_err(|e| SessionError::Parse {
        line: 1,
        message: e.to_string(),
    })?;

    let mut log = SessionLog::new(header);
    let mut last = f64::NEG_INFINITY;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SessionRecord = serde_json::from_str(&line).map_err(|e| SessionError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if rec.timestamp_s.is_nan() || rec.timestamp_s < last {
            return Err(SessionError::NonMonotonic {
                line: line_no,
                timestamp: rec.timestamp_s,
            });
        }
        last = rec.timestamp_s;
        log.records.push(rec);
    }
    Ok(log)
}

pub fn write_session(path: impl AsRef<Path>, log: &SessionLog) -> Result<(), SessionError> {
    write_session_to(BufWriter::new(File::create(path)?), log)
}

pub fn read_session(path: impl AsRef<Path>) -> Result<SessionLog, SessionError> {
    read_session_from(File::open(path)?)
}

/// Streams records to a file as they are produced.
pub struct SessionWriter<W: Write> {
    out: W,
}

impl SessionWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>, header: &SessionHeader) -> Result<Self, SessionError> {
        Self::new(BufWriter::new(File::create(path)?), header)
    }
}

impl<W: Write> SessionWriter<W> {
    pub fn new(mut out: W, header: &SessionHeader) -> Result<Self, SessionError> {
        serde_json::to_writer(&mut out, header)?;
        out.write_all(b"\n")?;
        Ok(Self { out })
    }

    pub fn append(&mut self, record: &SessionRecord) -> Result<(), SessionError> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), SessionError> {
        self.out.flush()?;
        Ok(())
    }
}
