use super::lpc::LpcModel;
use crate::error::{Error, Result};

/// Past samples carried between consecutive blocks, oldest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterState {
    past: Vec<f64>,
}

impl FilterState {
    pub fn new(order: usize) -> Self {
        Self {
            past: vec![0.0; order],
        }
    }

    /// History aligned to `order` samples (zero-extended on the old side).
    fn history(&self, order: usize) -> Vec<f64> {
        let have = self.past.len();
        if have >= order {
            self.past[have - order..].to_vec()
        } else {
            let mut h = vec![0.0; order - have];
            h.extend_from_slice(&self.past);
            h
        }
    }

    fn update(&mut self, tail: &[f64], order: usize) {
        self.past = tail[tail.len() - order..].to_vec();
    }
}

/// Prediction residual `e[n] = x[n] - Σ a[k] x[n-k]`; `state` holds past inputs.
pub fn inverse_filter(frame: &[f64], model: &LpcModel, state: &mut FilterState) -> Vec<f64> {
    let p = model.order();
    let mut ext = state.history(p);
    ext.extend_from_slice(frame);
    let out = (0..frame.len())
        .map(|n| {
            let i = n + p;
            let pred: f64 = model
                .coefficients
                .iter()
                .enumerate()
                .map(|(k, a)| a * ext[i - k - 1])
                .sum();
            ext[i] - pred
        })
        .collect();
    state.update(&ext, p);
    out
}

/// All-pole filtering `1/A(z)`; `state` holds past outputs.
pub fn synthesis_filter(excitation: &[f64], model: &LpcModel, state: &mut FilterState) -> Result<Vec<f64>> {
    if !model.is_minimum_phase() {
        return Err(Error::Stability(
            "synthesis model has a pole on or outside the unit circle".into(),
        ));
    }
    let p = model.order();
    let mut ext = state.history(p);
    ext.reserve(excitation.len());
    for &e in excitation {
        let i = ext.len();
        let fb: f64 = model
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, a)| a * ext[i - k - 1])
            .sum();
        ext.push(e + fb);
    }
    let out = ext[p..].to_vec();
    state.update(&ext, p);
    Ok(out)
}

/// All-pole lattice synthesis driven by reflection coefficients.
///
/// Unlike the direct form, the lattice keeps its state bounded when the
/// coefficients change from block to block, which matters for high-Q
/// envelopes that switch every few milliseconds.
#[derive(Debug, Clone, Default)]
pub struct LatticeSynthesizer {
    /// Backward prediction errors `b_0 .. b_{p-1}` from the previous sample.
    backward: Vec<f64>,
}

impl LatticeSynthesizer {
    pub fn new(order: usize) -> Self {
        Self {
            backward: vec![0.0; order],
        }
    }

    pub fn reset(&mut self) {
        self.backward.iter_mut().for_each(|b| *b = 0.0);
    }

    pub fn process(&mut self, excitation: &[f64], model: &LpcModel) -> Result<Vec<f64>> {
        let ks = model.reflection_coefficients().ok_or_else(|| {
            Error::Stability("synthesis model has a pole on or outside the unit circle".into())
        })?;
        let p = ks.len();
        if self.backward.len() < p {
            self.backward.resize(p, 0.0);
        }
        let b = &mut self.backward;
        let mut out = Vec::with_capacity(excitation.len());
        for &e in excitation {
            let mut f = e;
            for m in (0..p).rev() {
                f += ks[m] * b[m];
                if m + 1 < b.len() {
                    b[m + 1] = b[m] - ks[m] * f;
                }
            }
            if !b.is_empty() {
                b[0] = f;
            }
            out.push(f);
        }
        Ok(out)
    }
}
