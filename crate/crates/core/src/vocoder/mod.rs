//! Pulse-plus-noise LPC vocoder: f0 analysis, per-frame spectral envelopes,
//! and resynthesis with an independently modifiable f0 track.
//!
//! This is a simplified source-filter model. It has no aperiodicity or band
//! mixing: voiced frames are purely pulse-excited, unvoiced frames purely
//! noise-excited, with a one-hop crossfade at voicing transitions.

mod f0;
mod synth;

pub use f0::{
    estimate_f0, estimate_f0_with, shift_f0, F0Config, F0Frame, F0Track, ShiftedTrack, MAX_F0_HZ,
    MIN_F0_HZ,
};
pub use synth::{analyze, synthesize, synthesize_seeded, Synthesis, VocoderParams, ENVELOPE_ORDER};
