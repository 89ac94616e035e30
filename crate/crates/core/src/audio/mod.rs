//! Waveform I/O, resampling and dataset manifests.

mod manifest;
mod resample;
mod wav;

pub use manifest::{load_manifest, write_manifest, DatasetManifest, UtteranceRecord};
pub use resample::resample;
pub use wav::{read_wav, write_wav, WriteSummary};

use crate::error::{Error, Result};

/// Working sample rate of every anonymizer.
pub const WORKING_RATE_HZ: u32 = 16_000;

/// Mono PCM signal with amplitudes nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::Precondition("sample rate must be positive".into()));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }

    /// Fails unless the buffer is non-empty and at the working rate.
    pub fn ensure_working_rate(&self) -> Result<()> {
        if self.sample_rate_hz != WORKING_RATE_HZ {
            return Err(Error::Precondition(format!(
                "expected {WORKING_RATE_HZ} Hz audio, got {} Hz",
                self.sample_rate_hz
            )));
        }
        if self.samples.is_empty() {
            return Err(Error::Precondition("empty audio buffer".into()));
        }
        Ok(())
    }
}
