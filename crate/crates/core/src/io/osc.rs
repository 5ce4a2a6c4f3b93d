//! OSC 1.0 message codec (messages only, no bundles).
//!
//! A message is an address string, a type-tag string starting with `,`, and
//! the arguments; strings are NUL-terminated and zero-padded to a multiple of
//! four bytes, numbers are big-endian.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OscError {
    #[error("packet length {0} is not a multiple of 4")]
    Misaligned(usize),
    #[error("packet truncated at byte {0}")]
    Truncated(usize),
    #[error("string at byte {0} is not NUL-terminated, zero-padded UTF-8")]
    BadString(usize),
    #[error("address must start with '/'")]
    BadAddress,
    #[error("type tag string must start with ','")]
    MissingTypeTag,
    #[error("unknown type tag '{0}'")]
    UnknownTypeTag(char),
    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(usize),
    #[error("bundles are not supported")]
    Bundle,
    #[error("string argument contains NUL")]
    InteriorNul,
}

#[derive(Debug, Clone)]
pub enum OscArg {
    Int(i32),
    Float(f32),
    String(String),
    Blob(Vec<u8>),
}

impl PartialEq for OscArg {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (OscArg::Int(a), OscArg::Int(b)) => a == b,
            // bitwise so NaN payloads round-trip as equal
            (OscArg::Float(a), OscArg::Float(b)) => a.to_bits() == b.to_bits(),
            (OscArg::String(a), OscArg::String(b)) => a == b,
            (OscArg::Blob(a), OscArg::Blob(b)) => a == b,
            _ => false,
        }
    }
}

impl OscArg {
    fn tag(&self) -> u8 {
        match self {
            OscArg::Int(_) => b'i',
            OscArg::Float(_) => b'f',
            OscArg::String(_) => b's',
            OscArg::Blob(_) => b'b',
        }
    }

    pub fn as_int(&self) -> Option<i32> {
        match self {
            OscArg::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f32> {
        match self {
            OscArg::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            OscArg::String(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscMessage {
    pub address: String,
    pub args: Vec<OscArg>,
}

impl OscMessage {
    pub fn new(address: impl Into<String>, args: Vec<OscArg>) -> Self {
        Self {
            address: address.into(),
            args,
        }
    }
}

fn padded_len(n: usize) -> usize {
    (n + 3) & !3
}

fn push_str(out: &mut Vec<u8>, s: &str) -> Result<(), OscError> {
    if s.as_bytes().contains(&0) {
        return Err(OscError::InteriorNul);
    }
    out.extend_from_slice(s.as_bytes());
    let total = padded_len(s.len() + 1);
    out.resize(out.len() + total - s.len(), 0);
    Ok(())
}

fn push_blob(out: &mut Vec<u8>, b: &[u8]) {
    out.extend_from_slice(&(b.len() as i32).to_be_bytes());
    out.extend_from_slice(b);
    out.resize(out.len() + padded_len(b.len()) - b.len(), 0);
}

pub fn encode_osc(msg: &OscMessage) -> Result<Vec<u8>, OscError> {
    if !msg.address.starts_with('/') {
        return Err(OscError::BadAddress);
    }
    let mut out = Vec::with_capacity(64);
    push_str(&mut out, &msg.address)?;
    let tags: String = std::iter::once(',')
        .chain(msg.args.iter().map(|a| a.tag() as char))
        .collect();
    push_str(&mut out, &tags)?;
    for arg in &msg.args {
        match arg {
            OscArg::Int(v) => out.extend_from_slice(&v.to_be_bytes()),
            OscArg::Float(v) => out.extend_from_slice(&v.to_bits().to_be_bytes()),
            OscArg::String(s) => push_str(&mut out, s)?,
            OscArg::Blob(b) => push_blob(&mut out, b),
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], OscError> {
        let end = self.pos.checked_add(n).ok_or(OscError::Truncated(self.pos))?;
        if end > self.buf.len() {
            return Err(OscError::Truncated(self.pos));
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn word(&mut self) -> Result<[u8; 4], OscError> {
        Ok(self.take(4)?.try_into().expect("4 bytes"))
    }

    fn string(&mut self) -> Result<&'a str, OscError> {
        let start = self.pos;
        let rest = &self.buf[start..];
        let nul = rest.iter().position(|&b| b == 0).ok_or(OscError::Truncated(start))?;
        let total = padded_len(nul + 1);
        let raw = self.take(total)?;
        if raw[nul..].iter().any(|&b| b != 0) {
            return Err(OscError::BadString(start));
        }
        std::str::from_utf8(&raw[..nul]).map_err(|_| OscError::BadString(start))
    }

    fn blob(&mut self) -> Result<Vec<u8>, OscError> {
        let start = self.pos;
        let len = i32::from_be_bytes(self.word()?);
        let len = usize::try_from(len).map_err(|_| OscError::Truncated(start))?;
        let raw = self.take(padded_len(len))?;
        if raw[len..].iter().any(|&b| b != 0) {
            return Err(OscError::BadString(start));
        }
        Ok(raw[..len].to_vec())
    }
}

pub fn decode_osc(bytes: &[u8]) -> Result<OscMessage, OscError> {
    if !bytes.len().is_multiple_of(4) {
        return Err(OscError::Misaligned(bytes.len()));
    }
    if bytes.is_empty() {
        return Err(OscError::Truncated(0));
    }
    if bytes.starts_with(b"#bundle\0") {
        return Err(OscError::Bundle);
    }
    let mut r = Reader { buf: bytes, pos: 0 };
    let address = r.string()?;
    if !address.starts_with('/') {
        return Err(OscError::BadAddress);
    }
    let tags = r.string()?;
    let tags = tags.strip_prefix(',').ok_or(OscError::MissingTypeTag)?;
    let mut args = Vec::with_capacity(tags.len());
    for tag in tags.chars() {
        let arg = match tag {
            'i' => OscArg::Int(i32::from_be_bytes(r.word()?)),
            'f' => OscArg::Float(f32::from_bits(u32::from_be_bytes(r.word()?))),
            's' => OscArg::String(r.string()?.to_owned()),
            'b' => OscArg::Blob(r.blob()?),
            other => return Err(OscError::UnknownTypeTag(other)),
        };
        args.push(arg);
    }
    if r.pos != bytes.len() {
        return Err(OscError::TrailingBytes(bytes.len() - r.pos));
    }
    Ok(OscMessage {
        address: address.to_owned(),
        args,
    })
}
