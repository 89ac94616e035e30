use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::f0::{estimate_f0, F0Track};
use crate::audio::AudioBuffer;
use crate::dsp::{LatticeSynthesizer, LpcAnalyzer, LpcModel, Window};
use crate::error::{Error, Result};

pub const ENVELOPE_ORDER: usize = 24;
const FRAME_MS: f64 = 25.0;
const HOP_MS: f64 = 5.0;
const LAG_WINDOW_HZ: f64 = 60.0;
/// Half-width in samples of the band-limited pulse kernel.
const PULSE_HALF_WIDTH: i64 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct VocoderParams {
    pub f0: F0Track,
    pub envelopes: Vec<LpcModel>,
    /// Silent frames whose envelope is a zero-gain placeholder.
    pub degenerate: Vec<bool>,
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub sample_rate_hz: u32,
}

impl VocoderParams {
    pub fn frame_count(&self) -> usize {
        self.envelopes.len()
    }

    fn hop_len(&self) -> usize {
        (self.hop_ms * self.sample_rate_hz as f64 / 1000.0).round() as usize
    }

    fn frame_len(&self) -> usize {
        (self.frame_ms * self.sample_rate_hz as f64 / 1000.0).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if self.envelopes.len() != self.f0.values.len() || self.degenerate.len() != self.envelopes.len() {
            return Err(Error::Validation(format!(
                "vocoder params mismatch: {} envelopes, {} f0 frames, {} flags",
                self.envelopes.len(),
                self.f0.values.len(),
                self.degenerate.len()
            )));
        }
        if self.hop_len() == 0 {
            return Err(Error::Validation("vocoder hop must be at least one sample".into()));
        }
        Ok(())
    }
}

/// f0 track plus order-24 envelopes on 25 ms Hann frames every 5 ms.
pub fn analyze(buffer: &AudioBuffer) -> Result<VocoderParams> {
    buffer.ensure_working_rate()?;
    let f0 = estimate_f0(buffer)?;
    let fs = buffer.sample_rate_hz as f64;
    let hop = (HOP_MS * fs / 1000.0).round() as usize;
    let frame_len = (FRAME_MS * fs / 1000.0).round() as usize;
    let window = Window::Hann.coefficients(frame_len);
    let analyzer = LpcAnalyzer::new(ENVELOPE_ORDER, fs, LAG_WINDOW_HZ);

    let x = &buffer.samples;
    let mut envelopes = Vec::with_capacity(f0.values.len());
    let mut degenerate = Vec::with_capacity(f0.values.len());
    let mut frame = vec![0.0; frame_len];
    for i in 0..f0.values.len() {
        let start = (i * hop + hop / 2) as i64 - (frame_len / 2) as i64;
        for (j, v) in frame.iter_mut().enumerate() {
            let idx = start + j as i64;
            let s = if idx >= 0 && (idx as usize) < x.len() { x[idx as usize] } else { 0.0 };
            *v = s * window[j];
        }
        match analyzer.analyze(&frame) {
            Ok(m) => {
                envelopes.push(m);
                degenerate.push(false);
            }
            Err(Error::DegenerateFrame) | Err(Error::Numerical(_)) => {
                envelopes.push(LpcModel::identity());
                degenerate.push(true);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(VocoderParams {
        f0,
        envelopes,
        degenerate,
        frame_ms: FRAME_MS,
        hop_ms: HOP_MS,
        sample_rate_hz: buffer.sample_rate_hz,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub buffer: AudioBuffer,
    /// Frames skipped because their envelope was unstable.
    pub bypassed: usize,
}

pub fn synthesize(params: &VocoderParams) -> Result<Synthesis> {
    synthesize_seeded(params, 0)
}

fn pulse_kernel(d: f64) -> f64 {
    let half = PULSE_HALF_WIDTH as f64 + 1.0;
    if d.abs() >= half {
        return 0.0;
    }
    let sinc = if d.abs() < 1e-12 { 1.0 } else { (PI * d).sin() / (PI * d) };
    let w = (PI * d / (2.0 * half)).cos();
    sinc * w * w
}

/// Scale for a unit-power pulse train at `f0` so the filtered output carries
/// the same power as filtered unit-variance noise. Without it, a harmonic that
/// lands on a sharp envelope peak would be amplified far beyond the analyzed
/// frame energy.
fn voiced_power_correction(model: &LpcModel, f0: f64, fs: f64) -> f64 {
    let Some(ks) = model.reflection_coefficients() else {
        return 1.0;
    };
    // zero-lag autocorrelation of the unit-innovation AR process
    let noise_power = 1.0 / ks.iter().map(|k| 1.0 - k * k).product::<f64>();
    let inv_response = |w: f64| {
        let (mut re, mut im) = (1.0, 0.0);
        for (k, a) in model.coefficients.iter().enumerate() {
            let ang = w * (k + 1) as f64;
            re -= a * ang.cos();
            im += a * ang.sin();
        }
        1.0 / (re * re + im * im)
    };
    let harmonics = (0.5 * fs / f0).floor() as usize;
    let w0 = 2.0 * PI * f0 / fs;
    let mut sum = inv_response(0.0);
    for h in 1..=harmonics {
        sum += 2.0 * inv_response(w0 * h as f64);
    }
    let pulse_power = sum * f0 / fs;
    if pulse_power > 0.0 && pulse_power.is_finite() {
        (noise_power / pulse_power).sqrt()
    } else {
        1.0
    }
}

/// Longest rendered impulse response per pulse, in samples.
const MAX_RESPONSE_LEN: usize = 4096;

/// Adds the response of `model` to a band-limited pulse at time `t` into `out`.
fn render_pulse(out: &mut [f64], model: &LpcModel, t: f64, scale: f64, response: &mut Vec<f64>) {
    let centre = t.round() as i64;
    let start = centre - PULSE_HALF_WIDTH;
    let kernel_len = (2 * PULSE_HALF_WIDTH + 1) as usize;
    let a = &model.coefficients;
    let p = a.len();
    response.clear();
    let mut energy = 0.0;
    let mut tail = 0.0;
    for n in 0..MAX_RESPONSE_LEN {
        let idx = start + n as i64;
        if idx >= out.len() as i64 {
            break;
        }
        let e = if n < kernel_len {
            scale * pulse_kernel(idx as f64 - t)
        } else {
            0.0
        };
        let mut y = e;
        for k in 0..p.min(n) {
            y += a[k] * response[n - k - 1];
        }
        response.push(y);
        if idx >= 0 {
            out[idx as usize] += y;
        }
        energy += y * y;
        tail += y * y;
        if n >= kernel_len && n % 64 == 63 {
            if tail <= 1e-10 * energy {
                break;
            }
            tail = 0.0;
        }
    }
}

/// Renders the waveform: each voiced pulse contributes the impulse response of
/// the envelope active at its onset (pitch-synchronous overlap-add), while
/// unvoiced frames drive a lattice filter with unit-variance noise. Both are
/// scaled to the frame's residual level. Output length is `frame_count * hop`.
pub fn synthesize_seeded(params: &VocoderParams, noise_seed: u64) -> Result<Synthesis> {
    params.validate()?;
    let n_frames = params.frame_count();
    let hop = params.hop_len();
    let fs = params.sample_rate_hz as f64;
    let total = n_frames * hop;
    if total == 0 {
        return Ok(Synthesis {
            buffer: AudioBuffer::new(Vec::new(), params.sample_rate_hz)?,
            bypassed: 0,
        });
    }

    let window_energy: f64 = Window::Hann
        .coefficients(params.frame_len())
        .iter()
        .map(|w| w * w)
        .sum();
    let voiced: Vec<bool> = params.f0.values.iter().map(|f| f.voiced).collect();
    let stable: Vec<bool> = params
        .envelopes
        .iter()
        .map(|m| m.is_minimum_phase())
        .collect();
    let bypassed = stable.iter().filter(|s| !**s).count();

    let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
    let mut out = vec![0.0; total];
    let mut lattice = LatticeSynthesizer::new(ENVELOPE_ORDER);
    let mut excitation = vec![0.0; hop];
    let mut response = Vec::with_capacity(MAX_RESPONSE_LEN);
    let mut phase = 0.0f64;

    for i in 0..n_frames {
        let model = &params.envelopes[i];
        let usable = stable[i] && !params.degenerate[i];
        let level = if usable { model.gain / window_energy.sqrt() } else { 0.0 };
        let was = if i > 0 { voiced[i - 1] } else { voiced[i] };
        let now = voiced[i];
        let mix = |j: usize| match (was, now) {
            (true, true) => 1.0,
            (false, false) => 0.0,
            (false, true) => (j + 1) as f64 / hop as f64,
            (true, false) => 1.0 - (j + 1) as f64 / hop as f64,
        };

        // noise part
        for (j, e) in excitation.iter_mut().enumerate() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *e = level * (1.0 - mix(j)) * g;
        }
        if usable {
            let y = lattice.process(&excitation, model)?;
            for (o, v) in out[i * hop..(i + 1) * hop].iter_mut().zip(y) {
                *o += v;
            }
        } else {
            lattice.reset();
        }

        // pulse part, continuing one frame past the end of a voiced run
        let f0 = if now {
            params.f0.values[i].f0_hz
        } else if was && i > 0 {
            params.f0.values[i - 1].f0_hz
        } else {
            continue;
        };
        let onset = i == 0 || !(voiced[i - 1] || (i > 1 && voiced[i - 2]));
        if onset {
            phase = 1.0 - f0 / fs;
        }
        let step = f0 / fs;
        let scale = if usable {
            level * voiced_power_correction(model, f0, fs) * (fs / f0).sqrt()
        } else {
            0.0
        };
        for j in 0..hop {
            phase += step;
            if phase >= 1.0 {
                phase -= 1.0;
                let t = (i * hop + j) as f64 - phase / step;
                let weight = mix(j);
                if scale > 0.0 && weight > 0.0 {
                    render_pulse(&mut out, model, t, scale * weight, &mut response);
                }
            }
        }
    }

    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("vocoder produced a non-finite sample".into()));
    }
    Ok(Synthesis {
        buffer: AudioBuffer::new(out, params.sample_rate_hz)?,
        bypassed,
    })
}
