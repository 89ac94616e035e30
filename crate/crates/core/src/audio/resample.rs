use super::AudioBuffer;
use crate::error::{Error, Result};

const TAPS_PER_PHASE: usize = 64;
const KAISER_BETA: f64 = 8.0;
/// Fraction of the narrower Nyquist band left untouched by the anti-alias filter.
const ROLLOFF: f64 = 0.94;
const MAX_TABLE_PHASES: usize = 1024;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        term *= (half / k as f64).powi(2);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

struct Kernel {
    up: usize,
    half: usize,
    cutoff: f64,
    i0_beta: f64,
    table: Option<Vec<Vec<f64>>>,
}

impl Kernel {
    fn new(up: usize, down: usize) -> Self {
        let cutoff = ROLLOFF * (up as f64 / down as f64).min(1.0);
        let half = ((TAPS_PER_PHASE / 2) as f64 / (cutoff / ROLLOFF)).ceil() as usize;
        let mut k = Self {
            up,
            half,
            cutoff,
            i0_beta: bessel_i0(KAISER_BETA),
            table: None,
        };
        if up <= MAX_TABLE_PHASES {
            k.table = Some((0..up).map(|p| k.weights(p)).collect());
        }
        k
    }

    /// Normalized weights for input taps `i - half + 1 ..= i + half` at phase `p / up`.
    fn weights(&self, phase: usize) -> Vec<f64> {
        let frac = phase as f64 / self.up as f64;
        let half = self.half as f64;
        let mut w: Vec<f64> = (0..2 * self.half)
            .map(|tap| {
                let offset = tap as f64 - half + 1.0;
                let d = frac - offset;
                let x = d / (half + 1.0);
                if x.abs() >= 1.0 {
                    return 0.0;
                }
                let win = bessel_i0(KAISER_BETA * (1.0 - x * x).sqrt()) / self.i0_beta;
                self.cutoff * sinc(self.cutoff * d) * win
            })
            .collect();
        let sum: f64 = w.iter().sum();
        if sum.abs() > 0.0 {
            w.iter_mut().for_each(|v| *v /= sum);
        }
        w
    }
}

/// Band-limited rate conversion with a Kaiser-windowed sinc polyphase filter.
///
/// Resampling to the current rate returns the buffer unchanged.
pub fn resample(buffer: &AudioBuffer, target_rate_hz: u32) -> Result<AudioBuffer> {
    let source = buffer.sample_rate_hz;
    if source < 8000 || target_rate_hz < 8000 {
        return Err(Error::Precondition(format!(
            "resample rates must be >= 8000 Hz (got {source} -> {target_rate_hz})"
        )));
    }
    if source == target_rate_hz {
        return Ok(buffer.clone());
    }
    let g = gcd(source as u64, target_rate_hz as u64);
    let up = (target_rate_hz as u64 / g) as usize;
    let down = (source as u64 / g) as usize;
    let kernel = Kernel::new(up, down);

    let input = &buffer.samples;
    let n_in = input.len() as u64;
    let n_out = ((n_in * up as u64) as f64 / down as f64).round() as usize;
    let half = kernel.half as i64;

    let mut out = Vec::with_capacity(n_out);
    let mut scratch;
    for n in 0..n_out as u64 {
        let pos = n * down as u64;
        let base = (pos / up as u64) as i64;
        let phase = (pos % up as u64) as usize;
        let w: &[f64] = match &kernel.table {
            Some(t) => &t[phase],
            None => {
                scratch = kernel.weights(phase);
                &scratch
            }
        };
        let start = base - half + 1;
        let mut acc = 0.0;
        for (tap, &wt) in w.iter().enumerate() {
            let j = start + tap as i64;
            if j >= 0 && (j as usize) < input.len() {
                acc += wt * input[j as usize];
            }
        }
        out.push(acc);
    }
    AudioBuffer::new(out, target_rate_hz)
}
