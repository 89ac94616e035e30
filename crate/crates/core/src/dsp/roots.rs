//! Aberth–Ehrlich simultaneous root finding for real polynomials.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;
pub const TOLERANCE: f64 = 1e-12;
/// Largest accepted backward error `|p(z)| / Σ|c_k||z|^k` at a returned root.
const BACKWARD_TOLERANCE: f64 = 1e-10;

/// Evaluates `p(z)` and `p'(z)` for descending coefficients by Horner's rule.
fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(coeffs[0], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in &coeffs[1..] {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn backward_error(coeffs: &[f64], z: Complex64) -> f64 {
    let (p, _) = eval_with_derivative(coeffs, z);
    let r = z.norm();
    let scale = coeffs.iter().fold(0.0, |acc, c| acc * r + c.abs());
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// Roots of `coeffs[0] z^n + coeffs[1] z^(n-1) + ... + coeffs[n]`.
///
/// Trailing zero coefficients contribute exact roots at the origin. Initial
/// guesses sit on a circle of radius `|c_n / c_0|^(1/n)`.
pub fn aberth_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let lead = coeffs.iter().position(|c| *c != 0.0).ok_or_else(|| {
        Error::Validation("zero polynomial has no well-defined roots".into())
    })?;
    let coeffs = &coeffs[lead..];
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("non-finite polynomial coefficient".into()));
    }
    let mut zeros = 0;
    let mut end = coeffs.len();
    while end > 1 && coeffs[end - 1] == 0.0 {
        zeros += 1;
        end -= 1;
    }
    let monic: Vec<f64> = coeffs[..end].iter().map(|c| c / coeffs[0]).collect();
    let n = monic.len() - 1;

    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        roots.push(Complex64::new(-monic[1], 0.0));
        return Ok(roots);
    }

    let radius = monic[n].abs().powf(1.0 / n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; n];

    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = eval_with_derivative(&monic, z[i]);
            if p.norm() == 0.0 {
                done[i] = true;
                continue;
            }
            let ratio = if dp.norm() == 0.0 {
                // nudge off a critical point
                Complex64::new(1e-3 * radius.max(1e-3), 1e-3 * radius.max(1e-3))
            } else {
                p / dp
            };
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            z[i] -= step;
            if !z[i].re.is_finite() || !z[i].im.is_finite() {
                return Err(Error::Numerical("root iteration diverged".into()));
            }
            if step.norm() <= TOLERANCE * z[i].norm().max(1.0) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }

    // Near multiple roots the step size stalls at rounding level; accept any
    // root whose backward error is small.
    for r in &z {
        let be = backward_error(&monic, *r);
        if be > BACKWARD_TOLERANCE {
            return Err(Error::Numerical(format!(
                "root finder did not converge within {MAX_ITERATIONS} iterations (backward error {be:.3e})"
            )));
        }
    }
    roots.extend(z);
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn quadratic_distinct() {
        // (z - 1)(z - 2)
        let r = sorted(aberth_roots(&[1.0, -3.0, 2.0]).unwrap());
        assert!((r[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn double_root() {
        let r = aberth_roots(&[1.0, -1.0, 0.25]).unwrap();
        for z in r {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-6, "{z}");
        }
    }

    #[test]
    fn trailing_zeros_are_origin_roots() {
        let r = aberth_roots(&[1.0, -0.5, 0.0, 0.0]).unwrap();
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(r.iter().any(|z| (z - Complex64::new(0.5, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn unit_roots_of_degree_20() {
        // z^20 - 0.5^20: roots 0.5·e^{2πik/20}
        let mut c = vec![0.0; 21];
        c[0] = 1.0;
        c[20] = -(0.5f64.powi(20));
        let r = aberth_roots(&c).unwrap();
        assert_eq!(r.len(), 20);
        for z in r {
            assert!((z.norm() - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(aberth_roots(&[0.0, 0.0]).is_err());
    }
}
