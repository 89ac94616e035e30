//! The four anonymization functions: pitch shift and McAdams warping on
//! waveforms, farthest-pool averaging and cosine-constrained sampling on
//! embeddings.

mod config;
mod embedding;
mod seed;
mod waveform;

pub use config::{AnonymizerConfig, Method, Scope};
pub use embedding::{
    anonymize_embedding_pool, anonymize_embedding_sampled, pool_average_of, rank_farthest, replay_sampled,
    DiagonalGaussian, EmbeddingSampler, MAX_SAMPLING_ATTEMPTS,
};
pub use seed::{derive_seed, fnv1a64, splitmix64};
pub use waveform::{
    anonymize_mcadams, anonymize_pitch_shift, apply_mcadams, apply_mcadams_traced, apply_pitch_shift, replay_waveform,
    warp_poles, FramePoles, MCADAMS_FRAME_MS, MCADAMS_HOP_MS, MCADAMS_ORDER,
};

use serde::{Deserialize, Serialize};

/// Identifies the utterance being anonymized; selects the derived seed.
#[derive(Debug, Clone, Copy)]
pub struct UtteranceKey<'a> {
    pub speaker_id: &'a str,
    pub utt_id: &'a str,
}

impl<'a> UtteranceKey<'a> {
    pub fn new(speaker_id: &'a str, utt_id: &'a str) -> Self {
        Self { speaker_id, utt_id }
    }
}

/// Everything that was drawn at random, sufficient to replay the transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum DrawnParams {
    PitchShift { semitones: f64, seed: u64 },
    Mcadams { alpha: f64 },
    PoolAverage { chosen_ids: Vec<String> },
    ConstrainedSample { attempts: usize, seed: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Frames passed through unmodified after a numerical failure.
    pub bypassed_frames: usize,
    /// Frames whose shifted f0 left the supported range.
    pub clamped_f0_frames: usize,
    /// Set when the output peak exceeded full scale and was scaled down.
    pub rescaled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnonymizationResult<T> {
    pub output: T,
    pub drawn_params: DrawnParams,
    pub diagnostics: Diagnostics,
}
