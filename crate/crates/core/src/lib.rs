//! Speaker anonymization toolkit and evaluation harness.
//!
//! Waveform anonymizers (pitch shift through a source-filter vocoder, McAdams
//! pole-phase warping) and embedding-domain anonymizers (farthest-pool
//! averaging, cosine-constrained sampling), plus the privacy (EER),
//! distinctiveness (GVD) and correlation metrics used to judge them.

pub mod anonymizers;
pub mod audio;
pub mod dsp;
pub mod embeddings;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod vocoder;

pub use error::{Error, Result};
