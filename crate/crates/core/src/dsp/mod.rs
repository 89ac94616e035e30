//! Frame-based linear prediction: windowing, Levinson-Durbin, root finding,
//! pole/coefficient conversion, inverse/synthesis filtering and overlap-add.

mod filter;
mod frames;
mod lpc;
mod poles;
pub mod roots;

pub use filter::{inverse_filter, synthesis_filter, FilterState, LatticeSynthesizer};
pub use frames::{frame_signal, frame_samples, overlap_add, FrameSequence, Window};
pub use lpc::{
    autocorrelation, gaussian_lag_window, levinson_durbin, lpc_from_autocorr, LpcAnalyzer, LpcModel,
};
pub use poles::{lpc_to_poles, poles_to_lpc, PoleSet, IMAG_EPS};
