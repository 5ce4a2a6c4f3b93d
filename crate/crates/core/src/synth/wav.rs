use std::io::{Cursor, Seek, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AudioBlock, SynthError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WavFormat {
    #[default]
    Pcm16,
    Float32,
}

fn spec(block: &AudioBlock, format: WavFormat) -> hound::WavSpec {
    let (bits_per_sample, sample_format) = match format {
        WavFormat::Pcm16 => (16, hound::SampleFormat::Int),
        WavFormat::Float32 => (32, hound::SampleFormat::Float),
    };
    hound::WavSpec {
        channels: 1,
        sample_rate: block.sample_rate_hz,
        bits_per_sample,
        sample_format,
    }
}

fn write_to<W: Write + Seek>(w: W, block: &AudioBlock, format: WavFormat) -> Result<(), SynthError> {
    let mut writer = hound::WavWriter::new(w, spec(block, format))?;
    match format {
        WavFormat::Pcm16 => {
            for &s in &block.samples {
                let v = (s.clamp(-1.0, 1.0) * i16::MAX as f32).round() as i16;
                writer.write_sample(v)?;
            }
        }
        WavFormat::Float32 => {
            for &s in &block.samples {
                writer.write_sample(s)?;
            }
        }
    }
    writer.finalize()?;
    Ok(())
}

/// Mono RIFF/WAVE encoding of `block`.
pub fn wav_bytes(block: &AudioBlock, format: WavFormat) -> Result<Vec<u8>, SynthError> {
    let mut cursor = Cursor::new(Vec::new());
    write_to(&mut cursor, block, format)?;
    Ok(cursor.into_inner())
}

pub fn write_wav(path: impl AsRef<Path>, block: &AudioBlock, format: WavFormat) -> Result<(), SynthError> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_to(file, block, format)
}
