use std::f64::consts::PI;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Analysis window. Hann variants use the half-sample-shifted form
/// `sin²(π(n + ½)/N)`, which is strictly positive and sums to one at 50% hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Rectangular,
    Hann,
    /// Square-root Hann, applied at both analysis and synthesis (WOLA).
    SqrtHann,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        (0..len)
            .map(|n| match self {
                Window::Rectangular => 1.0,
                Window::Hann => {
                    let s = (PI * (n as f64 + 0.5) / len as f64).sin();
                    s * s
                }
                Window::SqrtHann => (PI * (n as f64 + 0.5) / len as f64).sin(),
            })
            .collect()
    }

    /// Window applied again when frames are overlap-added.
    fn synthesis(self, len: usize) -> Vec<f64> {
        match self {
            Window::SqrtHann => self.coefficients(len),
            _ => vec![1.0; len],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Vec<f64>>,
    pub frame_len: usize,
    pub hop_len: usize,
    pub window: Window,
    pub sample_rate_hz: u32,
    /// Length of the framed signal, used to trim the overlap-add output.
    pub signal_len: usize,
}

fn ms_to_samples(ms: f64, rate: u32) -> usize {
    (ms * rate as f64 / 1000.0).round() as usize
}

/// Splits `buffer` into `ceil(len / hop)` windowed frames starting at sample 0,
/// zero-padding the tail.
pub fn frame_signal(buffer: &AudioBuffer, frame_ms: f64, hop_ms: f64, window: Window) -> Result<FrameSequence> {
    if !(hop_ms > 0.0) || frame_ms < hop_ms {
        return Err(Error::Precondition(format!(
            "need frame_ms >= hop_ms > 0 (got frame {frame_ms} ms, hop {hop_ms} ms)"
        )));
    }
    let frame_len = ms_to_samples(frame_ms, buffer.sample_rate_hz);
    let hop_len = ms_to_samples(hop_ms, buffer.sample_rate_hz);
    frame_samples(&buffer.samples, buffer.sample_rate_hz, frame_len, hop_len, window)
}

pub fn frame_samples(
    samples: &[f64],
    sample_rate_hz: u32,
    frame_len: usize,
    hop_len: usize,
    window: Window,
) -> Result<FrameSequence> {
    if hop_len == 0 || frame_len < hop_len {
        return Err(Error::Precondition(format!(
            "need frame_len >= hop_len > 0 (got {frame_len}, {hop_len})"
        )));
    }
    if samples.is_empty() {
        return Err(Error::Precondition("cannot frame an empty signal".into()));
    }
    let w = window.coefficients(frame_len);
    let count = samples.len().div_ceil(hop_len);
    let frames = (0..count)
        .map(|i| {
            let start = i * hop_len;
            (0..frame_len)
                .map(|j| samples.get(start + j).copied().unwrap_or(0.0) * w[j])
                .collect()
        })
        .collect();
    Ok(FrameSequence {
        frames,
        frame_len,
        hop_len,
        window,
        sample_rate_hz,
        signal_len: samples.len(),
    })
}

/// Effective analysis*synthesis weight summed over one steady-state hop period.
fn cola_profile(window: Window, frame_len: usize, hop_len: usize) -> Vec<f64> {
    let a = window.coefficients(frame_len);
    let s = window.synthesis(frame_len);
    (0..hop_len)
        .map(|n| {
            let mut acc = 0.0;
            let mut j = n;
            while j < frame_len {
                acc += a[j] * s[j];
                j += hop_len;
            }
            acc
        })
        .collect()
}

/// Overlap-adds frames back into a signal, normalizing by the summed window so
/// unmodified frames reconstruct their source exactly.
pub fn overlap_add(frames: &FrameSequence) -> Result<AudioBuffer> {
    let FrameSequence {
        frame_len, hop_len, window, ..
    } = *frames;
    let profile = cola_profile(window, frame_len, hop_len);
    let max = profile.iter().fold(0.0f64, |m, v| m.max(*v));
    let min = profile.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if max <= 0.0 || (max - min) > 1e-9 * max {
        return Err(Error::Configuration(format!(
            "{window:?} window with frame {frame_len} / hop {hop_len} is not constant-overlap-add"
        )));
    }

    let a = window.coefficients(frame_len);
    let s = window.synthesis(frame_len);
    let total = frames.signal_len;
    let span = frames.frames.len().saturating_sub(1) * hop_len + frame_len;
    let mut out = vec![0.0; span.max(total)];
    let mut norm = vec![0.0; span.max(total)];
    for (i, frame) in frames.frames.iter().enumerate() {
        if frame.len() != frame_len {
            return Err(Error::Validation(format!(
                "frame {i} has length {}, expected {frame_len}",
                frame.len()
            )));
        }
        let start = i * hop_len;
        for j in 0..frame_len {
            out[start + j] += frame[j] * s[j];
            norm[start + j] += a[j] * s[j];
        }
    }
    for (o, n) in out.iter_mut().zip(&norm) {
        *o = if *n > 1e-12 { *o / n } else { 0.0 };
    }
    out.truncate(total);
    AudioBuffer::new(out, frames.sample_rate_hz)
}
