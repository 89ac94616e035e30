use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioBuffer;
use crate::error::{Error, Result};

/// Outcome of [`write_wav`]; `clipped` counts samples hard-limited to ±1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WriteSummary {
    pub clipped: usize,
}

fn map_hound(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Error::Format {
            path: path.to_path_buf(),
            reason: "unexpected end of file".into(),
        },
        hound::Error::IoError(e) => Error::io(path, e),
        hound::Error::FormatError(reason) => Error::Format {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        },
        hound::Error::Unsupported => Error::Unsupported(format!("{}", path.display())),
        other => Error::Format {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

/// Reads 16-bit PCM or 32-bit float WAV, averaging channels down to mono.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    // past a successful open, any I/O failure means the file is cut short
    let reader = WavReader::new(std::io::BufReader::new(file)).map_err(|e| match e {
        hound::Error::IoError(io) => Error::Format {
            path: path.to_path_buf(),
            reason: io.to_string(),
        },
        other => map_hound(path, other),
    })?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: "zero channels".into(),
        });
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(path, e))?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(path, e))?,
        (fmt, bits) => {
            return Err(Error::Unsupported(format!(
                "{}: {bits}-bit {fmt:?} samples",
                path.display()
            )))
        }
    };

    let samples = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    AudioBuffer::new(samples, spec.sample_rate)
}

/// Writes a 16-bit PCM mono file, hard-clipping anything outside `[-1, 1]`.
pub fn write_wav(buffer: &AudioBuffer, path: impl AsRef<Path>) -> Result<WriteSummary> {
    let path = path.as_ref();
    if buffer.is_empty() {
        return Err(Error::Precondition("cannot write an empty buffer".into()));
    }
    let spec = WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    let mut summary = WriteSummary::default();
    for &s in &buffer.samples {
        let s = if s.is_nan() { 0.0 } else { s };
        if s.abs() > 1.0 {
            summary.clipped += 1;
        }
        let q = (s.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(q).map_err(|e| map_hound(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound(path, e))?;
    if summary.clipped > 0 {
        log::warn!("{}: clipped {} samples", path.display(), summary.clipped);
    }
    Ok(summary)
}
