//! Mel-cepstral statistics plus log-f0 statistics: a small, model-free
//! speaker embedding. It discriminates far less well than a trained x-vector.

use rustfft::{num_complex::Complex64, FftPlanner};

use super::SpeakerEmbedding;
use crate::audio::{AudioBuffer, WORKING_RATE_HZ};
use crate::dsp::Window;
use crate::error::{Error, Result};
use crate::vocoder::estimate_f0;

const N_CEPS: usize = 20;
const N_MELS: usize = 40;
const FFT_LEN: usize = 512;
const FRAME_MS: f64 = 25.0;
const HOP_MS: f64 = 10.0;
/// Frames more than 40 dB below the loudest frame are ignored.
const ACTIVE_FLOOR: f64 = 1e-4;

pub const BASELINE_DIM: usize = 2 * N_CEPS + 2;
pub const MIN_DURATION_SECS: f64 = 0.5;

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters on the mel scale between 0 Hz and Nyquist, as
/// `(first_bin, weights)` pairs.
fn mel_filterbank(fs: f64) -> Vec<(usize, Vec<f64>)> {
    let n_bins = FFT_LEN / 2 + 1;
    let top = hz_to_mel(fs / 2.0);
    let edges: Vec<f64> = (0..N_MELS + 2)
        .map(|i| mel_to_hz(top * i as f64 / (N_MELS + 1) as f64) * FFT_LEN as f64 / fs)
        .collect();
    (0..N_MELS)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let first = lo.ceil() as usize;
            let last = (hi.floor() as usize).min(n_bins - 1);
            let w = (first..=last)
                .map(|b| {
                    let b = b as f64;
                    if b <= mid {
                        (b - lo) / (mid - lo)
                    } else {
                        (hi - b) / (hi - mid)
                    }
                })
                .collect();
            (first, w)
        })
        .collect()
}

/// Returns a 42-dimensional embedding: means of mel-cepstral coefficients
/// 1..=20, their standard deviations, then the mean and standard deviation of
/// natural-log f0 over voiced frames (both 0 when nothing is voiced).
pub fn extract_baseline_embedding(buffer: &AudioBuffer) -> Result<SpeakerEmbedding> {
    buffer.ensure_working_rate()?;
    if buffer.duration_secs() < MIN_DURATION_SECS {
        return Err(Error::Validation(format!(
            "baseline embedding needs at least {MIN_DURATION_SECS} s of audio, got {:.3} s",
            buffer.duration_secs()
        )));
    }
    let fs = WORKING_RATE_HZ as f64;
    let frame_len = (FRAME_MS * fs / 1000.0).round() as usize;
    let hop = (HOP_MS * fs / 1000.0).round() as usize;
    let x = &buffer.samples;
    let n_frames = 1 + (x.len() - frame_len) / hop;

    let window = Window::Hann.coefficients(frame_len);
    let bank = mel_filterbank(fs);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(FFT_LEN);
    let mut spec = vec![Complex64::new(0.0, 0.0); FFT_LEN];

    let mut energies = Vec::with_capacity(n_frames);
    let mut log_mels = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let seg = &x[i * hop..i * hop + frame_len];
        spec.fill(Complex64::new(0.0, 0.0));
        for (s, (&v, &w)) in spec.iter_mut().zip(seg.iter().zip(&window)) {
            s.re = v * w;
        }
        fft.process(&mut spec);
        let power: Vec<f64> = spec[..FFT_LEN / 2 + 1].iter().map(|c| c.norm_sqr()).collect();
        energies.push(power.iter().sum::<f64>());
        log_mels.push(
            bank.iter()
                .map(|(first, w)| {
                    let e: f64 = w.iter().zip(&power[*first..]).map(|(a, p)| a * p).sum();
                    e.max(1e-12).ln()
                })
                .collect::<Vec<f64>>(),
        );
    }

    let peak = energies.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::Validation("baseline embedding of a silent buffer".into()));
    }
    let active: Vec<usize> = (0..n_frames).filter(|&i| energies[i] >= ACTIVE_FLOOR * peak).collect();

    let mut sum = [0.0; N_CEPS];
    let mut sum_sq = [0.0; N_CEPS];
    for &i in &active {
        for (k, (s, q)) in sum.iter_mut().zip(sum_sq.iter_mut()).enumerate() {
            let c = dct_coefficient(&log_mels[i], k + 1);
            *s += c;
            *q += c * c;
        }
    }
    let n = active.len() as f64;
    let mut out = Vec::with_capacity(BASELINE_DIM);
    out.extend(sum.iter().map(|s| s / n));
    out.extend(sum.iter().zip(&sum_sq).map(|(s, q)| (q / n - (s / n).powi(2)).max(0.0).sqrt()));

    let track = estimate_f0(buffer)?;
    let logs: Vec<f64> = track.values.iter().filter(|f| f.voiced).map(|f| f.f0_hz.ln()).collect();
    if logs.is_empty() {
        out.extend([0.0, 0.0]);
    } else {
        let m = logs.iter().sum::<f64>() / logs.len() as f64;
        let v = logs.iter().map(|l| (l - m).powi(2)).sum::<f64>() / logs.len() as f64;
        out.extend([m, v.sqrt()]);
    }
    SpeakerEmbedding::from_f64(&out)
}

/// Orthonormal DCT-II coefficient `k` of the log mel energies.
fn dct_coefficient(log_mel: &[f64], k: usize) -> f64 {
    let m = log_mel.len() as f64;
    let scale = (2.0 / m).sqrt();
    scale
        * log_mel
            .iter()
            .enumerate()
            .map(|(j, &v)| v * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / m).cos())
            .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn voice(f0: f64, seed: u64) -> AudioBuffer {
        let fs = 16000.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut y = vec![0.0; 12000];
        let (mut y1, mut y2) = (0.0, 0.0);
        for (n, out) in y.iter_mut().enumerate() {
            let t = n as f64 / fs;
            let g: f64 = StandardNormal.sample(&mut rng);
            let e = (2.0 * std::f64::consts::PI * f0 * t).sin().powi(15) + 0.01 * g;
            let v = e + 1.6 * y1 - 0.8 * y2;
            y2 = y1;
            y1 = v;
            *out = 0.05 * v;
        }
        AudioBuffer::new(y, 16000).unwrap()
    }

    #[test]
    fn deterministic_and_sized() {
        let b = voice(150.0, 1);
        let a = extract_baseline_embedding(&b).unwrap();
        assert_eq!(a.dim(), BASELINE_DIM);
        assert_eq!(a, extract_baseline_embedding(&b).unwrap());
        let f0 = a.as_slice()[2 * N_CEPS] as f64;
        assert!((f0.exp() - 150.0).abs() < 5.0, "{}", f0.exp());
    }

    #[test]
    fn short_and_silent_inputs() {
        let short = AudioBuffer::new(vec![0.1; 1600], 16000).unwrap();
        assert!(matches!(extract_baseline_embedding(&short), Err(Error::Validation(_))));
        let silent = AudioBuffer::new(vec![0.0; 16000], 16000).unwrap();
        assert!(matches!(extract_baseline_embedding(&silent), Err(Error::Validation(_))));
    }

    #[test]
    fn filterbank_covers_spectrum() {
        let bank = mel_filterbank(16000.0);
        assert_eq!(bank.len(), N_MELS);
        for (_, w) in &bank {
            assert!(!w.is_empty());
            assert!(w.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
