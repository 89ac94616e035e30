use num_complex::Complex64;

use super::lpc::LpcModel;
use super::roots::aberth_roots;
use crate::error::{Error, Result};

/// Imaginary-part threshold separating complex poles from real ones.
pub const IMAG_EPS: f64 = 1e-8;
/// Largest gap between a pole and its partner's conjugate.
const CONJUGATE_TOL: f64 = 1e-9;
const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// Roots of `z^p A(z)`, ordered as real poles followed by `(p, conj p)` pairs
/// with positive imaginary part first.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    pub poles: Vec<Complex64>,
    pub gain: f64,
}

impl PoleSet {
    pub fn max_magnitude(&self) -> f64 {
        self.poles.iter().fold(0.0f64, |m, p| m.max(p.norm()))
    }

    pub fn is_conjugate_closed(&self) -> bool {
        conjugate_pairing(&self.poles).is_ok()
    }
}

/// Matches every non-real pole to a distinct conjugate partner.
fn conjugate_pairing(poles: &[Complex64]) -> Result<()> {
    let mut used = vec![false; poles.len()];
    for i in 0..poles.len() {
        if used[i] || poles[i].im.abs() <= CONJUGATE_TOL {
            continue;
        }
        used[i] = true;
        let target = poles[i].conj();
        let partner = (0..poles.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (poles[a] - target).norm().total_cmp(&(poles[b] - target).norm()));
        match partner {
            Some(j) if (poles[j] - target).norm() <= CONJUGATE_TOL => used[j] = true,
            _ => {
                return Err(Error::Validation(format!(
                    "pole {} has no conjugate partner",
                    poles[i]
                )))
            }
        }
    }
    Ok(())
}

/// Snaps near-conjugate root estimates into an exactly conjugate-closed set.
fn symmetrize(roots: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let tau = |z: &Complex64| IMAG_EPS * z.norm().max(1.0) * 1e-2;
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for z in roots {
        if z.im.abs() <= tau(&z) {
            reals.push(Complex64::new(z.re, 0.0));
        } else if z.im > 0.0 {
            upper.push(z);
        } else {
            lower.push(z);
        }
    }
    if upper.len() != lower.len() {
        return Err(Error::Numerical(format!(
            "root estimates are not conjugate-symmetric ({} upper vs {} lower)",
            upper.len(),
            lower.len()
        )));
    }
    reals.sort_by(|a, b| a.re.total_cmp(&b.re));
    upper.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.norm().total_cmp(&b.norm())));
    let mut out = reals;
    for u in upper {
        let (idx, _) = lower
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.conj() - u).norm().total_cmp(&(b.1.conj() - u).norm()))
            .expect("counts checked above");
        let l = lower.swap_remove(idx);
        let merged = (u + l.conj()) * 0.5;
        out.push(merged);
        out.push(merged.conj());
    }
    Ok(out)
}

/// Poles of the all-pole model, i.e. roots of `z^p - a1 z^(p-1) - ... - ap`.
pub fn lpc_to_poles(model: &LpcModel) -> Result<PoleSet> {
    if model.order() == 0 {
        return Ok(PoleSet {
            poles: Vec::new(),
            gain: model.gain,
        });
    }
    let mut coeffs = Vec::with_capacity(model.order() + 1);
    coeffs.push(1.0);
    coeffs.extend(model.coefficients.iter().map(|a| -a));
    let roots = aberth_roots(&coeffs)?;
    Ok(PoleSet {
        poles: symmetrize(roots)?,
        gain: model.gain,
    })
}

/// Expands a conjugate-closed pole set back into predictor coefficients.
pub fn poles_to_lpc(poles: &PoleSet) -> Result<LpcModel> {
    conjugate_pairing(&poles.poles)?;
    // c[0] z^p + c[1] z^(p-1) + ... with c[0] = 1
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &p in &poles.poles {
        c.push(Complex64::new(0.0, 0.0));
        for k in (1..c.len()).rev() {
            let prev = c[k - 1];
            c[k] -= p * prev;
        }
    }
    let residue = c.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    if residue >= IMAG_RESIDUE_TOL {
        return Err(Error::Numerical(format!(
            "imaginary residue {residue:.3e} after pole expansion"
        )));
    }
    LpcModel::new(c[1..].iter().map(|v| -v.re).collect(), poles.gain)
}
