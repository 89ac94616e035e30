//! Waveform-domain anonymizers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AnonymizationResult, AnonymizerConfig, Diagnostics, DrawnParams, Method, UtteranceKey};
use crate::audio::AudioBuffer;
use crate::dsp::{
    frame_signal, inverse_filter, lpc_to_poles, overlap_add, poles_to_lpc, synthesis_filter, FilterState, LpcAnalyzer,
    LpcModel, PoleSet, Window, IMAG_EPS,
};
use crate::error::{Error, Result};
use crate::vocoder::{analyze, shift_f0, synthesize_seeded};

pub const MCADAMS_ORDER: usize = 20;
pub const MCADAMS_FRAME_MS: f64 = 20.0;
pub const MCADAMS_HOP_MS: f64 = 10.0;
const LAG_WINDOW_HZ: f64 = 60.0;
/// Peak that rescaled outputs are brought down to.
const RESCALE_PEAK: f64 = 0.99;

fn rng_for(cfg: &AnonymizerConfig, key: UtteranceKey<'_>) -> (u64, ChaCha8Rng) {
    let seed = cfg.derived_seed(key.speaker_id, key.utt_id);
    (seed, ChaCha8Rng::seed_from_u64(seed))
}

fn limit_peak(buffer: &mut AudioBuffer) -> bool {
    let peak = buffer.peak();
    if peak > 1.0 {
        let g = RESCALE_PEAK / peak;
        buffer.samples.iter_mut().for_each(|v| *v *= g);
        true
    } else {
        false
    }
}

/// Shifts f0 by `sign * U[lo, hi]` semitones and resynthesizes.
pub fn anonymize_pitch_shift(
    buffer: &AudioBuffer,
    cfg: &AnonymizerConfig,
    key: UtteranceKey<'_>,
) -> Result<AnonymizationResult<AudioBuffer>> {
    cfg.validate()?;
    let (seed, mut rng) = rng_for(&AnonymizerConfig { method: Method::PitchShift, ..cfg.clone() }, key);
    let [lo, hi] = cfg.semitone_range;
    let up = rng.random_bool(0.5);
    let magnitude = rng.random_range(lo..=hi);
    let semitones = cfg.semitones.unwrap_or(if up { magnitude } else { -magnitude });
    let (output, diagnostics) = apply_pitch_shift(buffer, semitones, seed)?;
    Ok(AnonymizationResult {
        output,
        drawn_params: DrawnParams::PitchShift { semitones, seed },
        diagnostics,
    })
}

/// Deterministic pitch shift; `noise_seed` drives the unvoiced excitation.
pub fn apply_pitch_shift(buffer: &AudioBuffer, semitones: f64, noise_seed: u64) -> Result<(AudioBuffer, Diagnostics)> {
    buffer.ensure_working_rate()?;
    let mut params = analyze(buffer)?;
    let shifted = shift_f0(&params.f0, semitones);
    params.f0 = shifted.track;
    let synth = synthesize_seeded(&params, noise_seed)?;
    let mut samples = synth.buffer.samples;
    samples.resize(buffer.len(), 0.0);
    let mut output = AudioBuffer::new(samples, buffer.sample_rate_hz)?;
    let rescaled = limit_peak(&mut output);
    Ok((
        output,
        Diagnostics {
            bypassed_frames: synth.bypassed,
            clamped_f0_frames: shifted.clamped,
            rescaled,
        },
    ))
}

/// Moves every complex pole to phase `sign(φ) |φ|^α`, keeping its magnitude.
pub fn warp_poles(poles: &PoleSet, alpha: f64) -> PoleSet {
    let warp = |z: Complex64| {
        if z.im.abs() <= IMAG_EPS {
            return z;
        }
        // warp the upper-half representative so conjugates stay exact mirrors
        let upper = if z.im > 0.0 { z } else { z.conj() };
        let w = Complex64::from_polar(upper.norm(), upper.arg().powf(alpha));
        if z.im > 0.0 {
            w
        } else {
            w.conj()
        }
    };
    PoleSet {
        poles: poles.poles.iter().map(|&z| warp(z)).collect(),
        gain: poles.gain,
    }
}

/// Draws α ~ U[lo, hi] (unless fixed in the config) and applies McAdams warping.
pub fn anonymize_mcadams(
    buffer: &AudioBuffer,
    cfg: &AnonymizerConfig,
    key: UtteranceKey<'_>,
) -> Result<AnonymizationResult<AudioBuffer>> {
    cfg.validate()?;
    let (_, mut rng) = rng_for(&AnonymizerConfig { method: Method::Mcadams, ..cfg.clone() }, key);
    let [lo, hi] = cfg.mcadams_alpha_range;
    let drawn = rng.random_range(lo..=hi);
    let alpha = cfg.mcadams_alpha.unwrap_or(drawn);
    let (output, diagnostics) = apply_mcadams(buffer, alpha)?;
    Ok(AnonymizationResult {
        output,
        drawn_params: DrawnParams::Mcadams { alpha },
        diagnostics,
    })
}

/// Poles of one analysis frame before and after warping; `None` for frames
/// that were passed through.
#[derive(Debug, Clone)]
pub struct FramePoles {
    pub original: Option<PoleSet>,
    pub warped: Option<PoleSet>,
}

pub fn apply_mcadams(buffer: &AudioBuffer, alpha: f64) -> Result<(AudioBuffer, Diagnostics)> {
    mcadams_inner(buffer, alpha, None)
}

pub fn apply_mcadams_traced(buffer: &AudioBuffer, alpha: f64) -> Result<(AudioBuffer, Diagnostics, Vec<FramePoles>)> {
    let mut trace = Vec::new();
    let (out, diag) = mcadams_inner(buffer, alpha, Some(&mut trace))?;
    Ok((out, diag, trace))
}

enum FrameOutcome {
    Modified(Vec<f64>),
    Silent,
    Bypassed,
}

fn mcadams_frame(frame: &[f64], analyzer: &LpcAnalyzer, alpha: f64, trace: Option<&mut Vec<FramePoles>>) -> FrameOutcome {
    let mut record = FramePoles {
        original: None,
        warped: None,
    };
    let outcome = (|| {
        let model = match analyzer.analyze(frame) {
            Ok(m) => m,
            Err(Error::DegenerateFrame) => return FrameOutcome::Silent,
            Err(_) => return FrameOutcome::Bypassed,
        };
        let Ok(poles) = lpc_to_poles(&model) else {
            return FrameOutcome::Bypassed;
        };
        let warped = warp_poles(&poles, alpha);
        record.original = Some(poles);
        let Ok(new_model) = poles_to_lpc(&warped) else {
            return FrameOutcome::Bypassed;
        };
        record.warped = Some(warped);
        let residual = inverse_filter(frame, &model, &mut FilterState::new(model.order()));
        let new_model = LpcModel { gain: model.gain, ..new_model };
        match synthesis_filter(&residual, &new_model, &mut FilterState::new(new_model.order())) {
            Ok(y) if y.iter().all(|v| v.is_finite()) => FrameOutcome::Modified(y),
            _ => FrameOutcome::Bypassed,
        }
    })();
    if let Some(t) = trace {
        t.push(record);
    }
    outcome
}

fn mcadams_inner(
    buffer: &AudioBuffer,
    alpha: f64,
    mut trace: Option<&mut Vec<FramePoles>>,
) -> Result<(AudioBuffer, Diagnostics)> {
    buffer.ensure_working_rate()?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("McAdams coefficient must lie in (0, 1], got {alpha}")));
    }
    if buffer.is_empty() {
        return Ok((buffer.clone(), Diagnostics::default()));
    }
    let mut frames = frame_signal(buffer, MCADAMS_FRAME_MS, MCADAMS_HOP_MS, Window::SqrtHann)?;
    let analyzer = LpcAnalyzer::new(MCADAMS_ORDER, buffer.sample_rate_hz as f64, LAG_WINDOW_HZ);
    let mut diagnostics = Diagnostics::default();
    for frame in frames.frames.iter_mut() {
        match mcadams_frame(frame, &analyzer, alpha, trace.as_deref_mut()) {
            FrameOutcome::Modified(y) => *frame = y,
            FrameOutcome::Silent => {}
            FrameOutcome::Bypassed => diagnostics.bypassed_frames += 1,
        }
    }
    let mut output = overlap_add(&frames)?;
    diagnostics.rescaled = limit_peak(&mut output);
    Ok((output, diagnostics))
}

/// Re-applies a waveform transform from its recorded parameters.
pub fn replay_waveform(buffer: &AudioBuffer, drawn: &DrawnParams) -> Result<(AudioBuffer, Diagnostics)> {
    match *drawn {
        DrawnParams::PitchShift { semitones, seed } => apply_pitch_shift(buffer, semitones, seed),
        DrawnParams::Mcadams { alpha } => apply_mcadams(buffer, alpha),
        _ => Err(Error::Precondition("not a waveform transform".into())),
    }
}
