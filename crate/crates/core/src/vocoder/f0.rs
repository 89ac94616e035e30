//! YIN-style f0 estimation (cumulative-mean normalized difference).

use crate::audio::AudioBuffer;
use crate::error::Result;

pub const MIN_F0_HZ: f64 = 60.0;
pub const MAX_F0_HZ: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F0Frame {
    pub f0_hz: f64,
    pub voiced: bool,
}

impl F0Frame {
    pub const UNVOICED: F0Frame = F0Frame {
        f0_hz: 0.0,
        voiced: false,
    };
}

/// Per-hop f0 estimates. Voiced frames lie in `[60, 500]` Hz; unvoiced ones are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    pub hop_ms: f64,
    pub values: Vec<F0Frame>,
}

impl F0Track {
    pub fn voiced_count(&self) -> usize {
        self.values.iter().filter(|v| v.voiced).count()
    }

    pub fn median_voiced_f0(&self) -> Option<f64> {
        let mut v: Vec<f64> = self.values.iter().filter(|f| f.voiced).map(|f| f.f0_hz).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
    }
}

#[derive(Debug, Clone)]
pub struct F0Config {
    pub min_hz: f64,
    pub max_hz: f64,
    pub window_ms: f64,
    pub hop_ms: f64,
    /// A lag is voiced when its normalized difference falls below this value.
    pub threshold: f64,
    pub median_len: usize,
    /// Frames with RMS below this are unvoiced without analysis.
    pub silence_rms: f64,
}

impl Default for F0Config {
    fn default() -> Self {
        Self {
            min_hz: MIN_F0_HZ,
            max_hz: MAX_F0_HZ,
            window_ms: 40.0,
            hop_ms: 5.0,
            threshold: 0.3,
            median_len: 5,
            silence_rms: 1e-5,
        }
    }
}

/// Estimates one f0 value per 5 ms hop. Frame `i` is centred on
/// `i * hop + hop / 2`, so the track aligns with the vocoder frames.
pub fn estimate_f0(buffer: &AudioBuffer) -> Result<F0Track> {
    estimate_f0_with(buffer, &F0Config::default())
}

pub fn estimate_f0_with(buffer: &AudioBuffer, cfg: &F0Config) -> Result<F0Track> {
    let fs = buffer.sample_rate_hz as f64;
    let hop = (cfg.hop_ms * fs / 1000.0).round() as usize;
    let win = (cfg.window_ms * fs / 1000.0).round() as usize;
    let tau_min = (fs / cfg.max_hz).floor().max(2.0) as usize;
    let tau_max = (fs / cfg.min_hz).ceil() as usize;
    let integ = win.saturating_sub(tau_max + 1).max(tau_max);
    let span = integ + tau_max + 1;

    let x = &buffer.samples;
    let n_frames = x.len().div_ceil(hop.max(1));
    let mut frame = vec![0.0; span];
    let mut diff = vec![0.0; tau_max + 2];
    let mut values = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let centre = (i * hop + hop / 2) as i64;
        let start = centre - (span / 2) as i64;
        for (j, v) in frame.iter_mut().enumerate() {
            let idx = start + j as i64;
            *v = if idx >= 0 && (idx as usize) < x.len() { x[idx as usize] } else { 0.0 };
        }
        values.push(analyze_frame(&frame, integ, tau_min, tau_max, fs, cfg, &mut diff));
    }
    median_smooth(&mut values, cfg.median_len);
    Ok(F0Track {
        hop_ms: cfg.hop_ms,
        values,
    })
}

fn analyze_frame(
    frame: &[f64],
    integ: usize,
    tau_min: usize,
    tau_max: usize,
    fs: f64,
    cfg: &F0Config,
    d: &mut [f64],
) -> F0Frame {
    let energy: f64 = frame.iter().map(|v| v * v).sum();
    if (energy / frame.len() as f64).sqrt() < cfg.silence_rms {
        return F0Frame::UNVOICED;
    }

    // difference function d(τ) = Σ (x[j] - x[j+τ])² over the integration window
    let head: f64 = frame[..integ].iter().map(|v| v * v).sum();
    let mut shifted: f64 = head;
    d[0] = 0.0;
    for tau in 1..=tau_max + 1 {
        // slide Σ x[j+τ]² by one sample
        shifted += frame[integ + tau - 1].powi(2) - frame[tau - 1].powi(2);
        let cross: f64 = frame[..integ].iter().zip(&frame[tau..tau + integ]).map(|(a, b)| a * b).sum();
        d[tau] = (head + shifted - 2.0 * cross).max(0.0);
    }

    // cumulative mean normalization, in place
    let mut running = 0.0;
    let mut cmnd = vec![1.0; tau_max + 2];
    for tau in 1..=tau_max + 1 {
        running += d[tau];
        cmnd[tau] = if running > 0.0 { d[tau] * tau as f64 / running } else { 1.0 };
    }

    let mut tau = tau_min;
    while tau <= tau_max && cmnd[tau] >= cfg.threshold {
        tau += 1;
    }
    if tau > tau_max {
        return F0Frame::UNVOICED;
    }
    while tau < tau_max && cmnd[tau + 1] < cmnd[tau] {
        tau += 1;
    }

    let (a, b, c) = (cmnd[tau - 1], cmnd[tau], cmnd[tau + 1]);
    let curvature = a - 2.0 * b + c;
    let refined = if curvature > 0.0 {
        tau as f64 + 0.5 * (a - c) / curvature
    } else {
        tau as f64
    };
    let f0 = fs / refined;
    if !(cfg.min_hz..=cfg.max_hz).contains(&f0) {
        return F0Frame::UNVOICED;
    }
    F0Frame { f0_hz: f0, voiced: true }
}

/// Median over voiced neighbours; voicing decisions are left untouched.
fn median_smooth(values: &mut [F0Frame], len: usize) {
    if len <= 1 {
        return;
    }
    let half = len / 2;
    let orig = values.to_vec();
    let mut buf = Vec::with_capacity(len);
    for i in 0..values.len() {
        if !orig[i].voiced {
            continue;
        }
        buf.clear();
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(orig.len() - 1);
        buf.extend(orig[lo..=hi].iter().filter(|f| f.voiced).map(|f| f.f0_hz));
        buf.sort_by(f64::total_cmp);
        let m = buf.len() / 2;
        values[i].f0_hz = if buf.len() % 2 == 1 { buf[m] } else { 0.5 * (buf[m - 1] + buf[m]) };
    }
}

/// Result of [`shift_f0`]: the shifted track and how many frames hit the range clamp.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedTrack {
    pub track: F0Track,
    pub clamped: usize,
}

/// Scales voiced f0 by `2^(semitones/12)`, clamping into `[60, 500]` Hz.
pub fn shift_f0(track: &F0Track, semitones: f64) -> ShiftedTrack {
    let ratio = (semitones / 12.0).exp2();
    let mut clamped = 0;
    let values = track
        .values
        .iter()
        .map(|f| {
            if !f.voiced {
                return *f;
            }
            let shifted = f.f0_hz * ratio;
            let bounded = shifted.clamp(MIN_F0_HZ, MAX_F0_HZ);
            if bounded != shifted {
                clamped += 1;
            }
            F0Frame {
                f0_hz: bounded,
                voiced: true,
            }
        })
        .collect();
    ShiftedTrack {
        track: F0Track {
            hop_ms: track.hop_ms,
            values,
        },
        clamped,
    }
}
