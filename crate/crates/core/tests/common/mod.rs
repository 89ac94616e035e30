//! Synthetic speakers: a glottal pulse train with per-speaker f0 through a
//! per-speaker cascade of formant resonators.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use voxveil::audio::{write_manifest, write_wav, AudioBuffer, DatasetManifest, UtteranceRecord};

pub const FS: f64 = 16000.0;

#[derive(Debug, Clone)]
pub struct SpeakerProfile {
    pub id: String,
    pub f0_hz: f64,
    /// (centre Hz, bandwidth Hz)
    pub formants: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Utterance {
    pub utt_id: String,
    pub speaker_id: String,
    pub audio: AudioBuffer,
}

pub fn speakers(n: usize, seed: u64) -> Vec<SpeakerProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            // spread f0 evenly over 95..240 Hz, with a little jitter
            let f0 = 95.0 + 145.0 * i as f64 / (n.max(2) - 1) as f64 + rng.random_range(-4.0..4.0);
            SpeakerProfile {
                id: format!("spk{i:02}"),
                f0_hz: f0,
                formants: vec![
                    (rng.random_range(350.0..850.0), rng.random_range(60.0..110.0)),
                    (rng.random_range(1000.0..2100.0), rng.random_range(80.0..140.0)),
                    (rng.random_range(2300.0..3200.0), rng.random_range(100.0..180.0)),
                    (rng.random_range(3400.0..4200.0), rng.random_range(150.0..250.0)),
                ],
            }
        })
        .collect()
}

fn resonate(x: &mut [f64], freq: f64, bw: f64) {
    let r = (-PI * bw / FS).exp();
    let theta = 2.0 * PI * freq / FS;
    let (a1, a2) = (2.0 * r * theta.cos(), -r * r);
    let g = 1.0 - r;
    let (mut y1, mut y2) = (0.0, 0.0);
    for v in x.iter_mut() {
        let y = g * *v + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        *v = y;
    }
}

/// One utterance of `secs` seconds with per-utterance jitter in f0 and formants.
pub fn utterance(profile: &SpeakerProfile, secs: f64, rng: &mut ChaCha8Rng) -> AudioBuffer {
    let n = (secs * FS) as usize;
    let f0_base = profile.f0_hz * (1.0 + rng.random_range(-0.03..0.03));
    let vib_rate = rng.random_range(2.0..5.0);
    let vib_phase = rng.random_range(0.0..2.0 * PI);
    let syl_rate = rng.random_range(3.0..5.0);
    let mut x = vec![0.0; n];
    let mut phase = 0.0;
    let mut glottal = 0.0;
    for (i, v) in x.iter_mut().enumerate() {
        let t = i as f64 / FS;
        let f0 = f0_base * (1.0 + 0.04 * (2.0 * PI * vib_rate * t + vib_phase).sin() - 0.05 * t / secs);
        phase += f0 / FS;
        let pulse = if phase >= 1.0 {
            phase -= 1.0;
            1.0
        } else {
            0.0
        };
        // one-pole smoothing gives the pulses a falling spectral tilt
        glottal = 0.9 * glottal + pulse;
        let noise: f64 = StandardNormal.sample(rng);
        let envelope = 0.55 + 0.45 * (2.0 * PI * syl_rate * t).sin().abs();
        *v = envelope * (glottal - 1.0 / (1.0 - 0.9) * f0 / FS + 0.02 * noise);
    }
    for &(f, b) in &profile.formants {
        let jitter = 1.0 + rng.random_range(-0.03..0.03);
        resonate(&mut x, f * jitter, b);
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    x.iter_mut().for_each(|v| *v *= 0.5 / peak);
    AudioBuffer::new(x, FS as u32).unwrap()
}

/// `n_speakers` x `per_speaker` utterances, ids `spkNN_uMM`.
pub fn corpus(n_speakers: usize, per_speaker: usize, secs: f64, seed: u64) -> Vec<Utterance> {
    let profiles = speakers(n_speakers, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut out = Vec::new();
    for p in &profiles {
        for u in 0..per_speaker {
            out.push(Utterance {
                utt_id: format!("{}_u{u:02}", p.id),
                speaker_id: p.id.clone(),
                audio: utterance(p, secs, &mut rng),
            });
        }
    }
    out
}

/// Writes the corpus as `<spk>/<utt>.wav` under `root` plus `manifest.csv`.
pub fn write_corpus(corpus: &[Utterance], root: &Path) -> DatasetManifest {
    let records = corpus
        .iter()
        .map(|u| {
            let rel = format!("{}/{}.wav", u.speaker_id, u.utt_id);
            let path = root.join(&rel);
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            write_wav(&u.audio, &path).unwrap();
            UtteranceRecord {
                utt_id: u.utt_id.clone(),
                speaker_id: u.speaker_id.clone(),
                audio_path: rel,
            }
        })
        .collect();
    let manifest = DatasetManifest::new(records, root).unwrap();
    write_manifest(&manifest, root.join("manifest.csv")).unwrap();
    manifest
}

/// Harmonic tone with decaying partials.
pub fn tone(f0: f64, secs: f64) -> AudioBuffer {
    let n = (secs * FS) as usize;
    let x = (0..n)
        .map(|i| {
            let t = i as f64 / FS;
            (1..=10)
                .map(|h| 0.25 / h as f64 * (2.0 * PI * f0 * h as f64 * t).sin())
                .sum()
        })
        .collect();
    AudioBuffer::new(x, FS as u32).unwrap()
}

pub fn snr_db(reference: &[f64], test: &[f64]) -> f64 {
    let sig: f64 = reference.iter().map(|v| v * v).sum();
    let err: f64 = reference.iter().zip(test).map(|(a, b)| (a - b).powi(2)).sum();
    10.0 * (sig / err).log10()
}
