use std::f64::consts::PI;

use crate::error::{Error, Result};

/// All-pole model `A(z) = 1 - Σ a[k] z^-k`; `coefficients[k-1]` holds `a[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcModel {
    pub coefficients: Vec<f64>,
    /// Square root of the prediction-error energy.
    pub gain: f64,
}

impl LpcModel {
    pub fn new(coefficients: Vec<f64>, gain: f64) -> Result<Self> {
        if !(gain >= 0.0) || !gain.is_finite() {
            return Err(Error::Validation(format!("LPC gain must be finite and >= 0, got {gain}")));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("non-finite LPC coefficient".into()));
        }
        Ok(Self { coefficients, gain })
    }

    /// Order-0 model: `A(z) = 1`.
    pub fn identity() -> Self {
        Self {
            coefficients: Vec::new(),
            gain: 0.0,
        }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// Reflection coefficients by step-down recursion, or `None` when some
    /// `|k| >= 1` (the model is not minimum-phase).
    pub fn reflection_coefficients(&self) -> Option<Vec<f64>> {
        let p = self.order();
        let mut a = self.coefficients.clone();
        let mut ks = vec![0.0; p];
        for i in (0..p).rev() {
            let k = a[i];
            if !(k.abs() < 1.0) {
                return None;
            }
            ks[i] = k;
            let denom = 1.0 - k * k;
            let prev: Vec<f64> = (0..i).map(|j| (a[j] + k * a[i - 1 - j]) / denom).collect();
            a[..i].copy_from_slice(&prev);
        }
        Some(ks)
    }

    /// True when every root of `A(z)` lies strictly inside the unit circle.
    pub fn is_minimum_phase(&self) -> bool {
        self.reflection_coefficients().is_some()
    }

    /// Power response `gain² / |A(e^{jω})|²` at `freq_hz`.
    pub fn power_response(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / sample_rate_hz;
        let (mut re, mut im) = (1.0, 0.0);
        for (k, a) in self.coefficients.iter().enumerate() {
            let ang = w * (k + 1) as f64;
            re -= a * ang.cos();
            im += a * ang.sin();
        }
        self.gain * self.gain / (re * re + im * im)
    }
}

/// Biased autocorrelation `r[k] = Σ x[n] x[n+k]` for `k = 0..=max_lag`.
pub fn autocorrelation(frame: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|k| {
            if k >= frame.len() {
                0.0
            } else {
                frame[k..].iter().zip(frame).map(|(a, b)| a * b).sum()
            }
        })
        .collect()
}

/// Gaussian lag window `exp(-½ (2π·bw·k / fs)²)` for lags `0..=order`.
pub fn gaussian_lag_window(order: usize, sample_rate_hz: f64, bandwidth_hz: f64) -> Vec<f64> {
    (0..=order)
        .map(|k| {
            let x = 2.0 * PI * bandwidth_hz * k as f64 / sample_rate_hz;
            (-0.5 * x * x).exp()
        })
        .collect()
}

/// Solves the normal equations for `order` predictor coefficients.
pub fn levinson_durbin(r: &[f64], order: usize) -> Result<LpcModel> {
    if r.len() <= order {
        return Err(Error::Precondition(format!(
            "need {} autocorrelation lags, got {}",
            order + 1,
            r.len()
        )));
    }
    if !(r[0] > 0.0) {
        return Err(Error::DegenerateFrame);
    }
    let mut a = vec![0.0; order];
    let mut tmp = vec![0.0; order];
    let mut err = r[0];
    for i in 0..order {
        let acc = r[i + 1] - (0..i).map(|j| a[j] * r[i - j]).sum::<f64>();
        let k = acc / err;
        if !(k.abs() < 1.0) {
            return Err(Error::Numerical(format!(
                "reflection coefficient {k} at stage {} (autocorrelation not positive definite)",
                i + 1
            )));
        }
        tmp[..i].copy_from_slice(&a[..i]);
        for j in 0..i {
            a[j] = tmp[j] - k * tmp[i - 1 - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
    }
    LpcModel::new(a, err.max(0.0).sqrt())
}

/// Plain autocorrelation-method LPC of a (pre-windowed) frame.
pub fn lpc_from_autocorr(frame: &[f64], order: usize) -> Result<LpcModel> {
    if order >= frame.len() {
        return Err(Error::Precondition(format!(
            "LPC order {order} must be below frame length {}",
            frame.len()
        )));
    }
    levinson_durbin(&autocorrelation(frame, order), order)
}

/// LPC analysis with lag windowing and a white-noise floor on `r[0]`.
#[derive(Debug, Clone)]
pub struct LpcAnalyzer {
    order: usize,
    lag_window: Vec<f64>,
    noise_floor: f64,
}

impl LpcAnalyzer {
    pub fn new(order: usize, sample_rate_hz: f64, lag_bandwidth_hz: f64) -> Self {
        Self {
            order,
            lag_window: gaussian_lag_window(order, sample_rate_hz, lag_bandwidth_hz),
            noise_floor: 1e-9,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn analyze(&self, frame: &[f64]) -> Result<LpcModel> {
        if self.order >= frame.len() {
            return Err(Error::Precondition(format!(
                "LPC order {} must be below frame length {}",
                self.order,
                frame.len()
            )));
        }
        let mut r = autocorrelation(frame, self.order);
        if !(r[0] > 0.0) {
            return Err(Error::DegenerateFrame);
        }
        for (v, w) in r.iter_mut().zip(&self.lag_window) {
            *v *= w;
        }
        r[0] *= 1.0 + self.noise_floor;
        levinson_durbin(&r, self.order)
    }
}
