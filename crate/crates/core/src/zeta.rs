//! Sums of the form `Σ_{n≥n0} (ln n)^κ n^{-s}` by Euler–Maclaurin summation.
//!
//! `ζ(s)` is the case `κ = 0, n0 = 1` and `ζ″(s)` the case `κ = 2`.

use num_complex::Complex64;
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};

/// Explicit terms summed before the Euler–Maclaurin correction starts.
pub const EXPLICIT_TERMS: u64 = 10_000;
/// Number of Bernoulli correction terms.
pub const CORRECTION_TERMS: usize = 6;

// B_{2k}/(2k)! for k = 1..=6
const BERNOULLI_OVER_FACTORIAL: [f64; CORRECTION_TERMS] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
];

/// `x^{-s-j} Q(ln x)` with `Q` a finite sum of powers `u^e`.
#[derive(Debug, Clone)]
struct LogPoly {
    terms: Vec<(f64, Complex64)>,
}

impl LogPoly {
    fn eval(&self, u: f64) -> Complex64 {
        self.terms.iter().map(|(e, c)| c * u.powf(*e)).sum()
    }

    // Q_{j+1} = -(s+j) Q_j + Q_j'
    fn next(&self, s: Complex64, j: usize) -> LogPoly {
        let mut out: Vec<(f64, Complex64)> = Vec::with_capacity(self.terms.len() + 1);
        let mut push = |e: f64, c: Complex64| {
            if let Some(t) = out.iter_mut().find(|t| t.0 == e) {
                t.1 += c;
            } else {
                out.push((e, c));
            }
        };
        for &(e, c) in &self.terms {
            push(e, -(s + j as f64) * c);
            if e != 0.0 {
                push(e - 1.0, c * e);
            }
        }
        LogPoly { terms: out }
    }
}

/// `∫_L^∞ u^κ e^{-z u} du` for `Re z > 0`.
fn log_power_integral(kappa: f64, z: Complex64, l: f64) -> Result<Complex64> {
    if kappa.fract() == 0.0 && kappa <= 64.0 {
        // Γ(m+1, zL)/z^{m+1} = e^{-zL} Σ_k m!/k! L^k / z^{m+1-k}
        let m = kappa as i32;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut ratio = 1.0; // m!/k!
        for k in (0..=m).rev() {
            sum += ratio * l.powi(k) / z.powi(m + 1 - k);
            ratio *= k as f64;
        }
        return Ok((-z * l).exp() * sum);
    }
    if z.im != 0.0 {
        return Err(Error::Unsupported(format!(
            "non-integer log power {kappa} with complex exponent"
        )));
    }
    let x = z.re;
    Ok(Complex64::new(
        gamma(kappa + 1.0) * gamma_ur(kappa + 1.0, x * l) / x.powf(kappa + 1.0),
        0.0,
    ))
}

/// Result of an Euler–Maclaurin summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSum {
    pub value: Complex64,
    /// Magnitude of the last correction term, a proxy for the remainder.
    pub error_estimate: f64,
}

/// `Σ_{n≥n0} (ln n)^κ n^{-s}`, requiring `Re s > 1` and `κ ≥ 0`.
pub fn log_power_sum(kappa: f64, s: Complex64, n0: u64) -> Result<TailSum> {
    if !(s.re > 1.0) {
        return Err(Error::Domain(format!("log-power sum diverges for Re s = {}", s.re)));
    }
    if !(kappa >= 0.0) {
        return Err(Error::Domain(format!("log power must be nonnegative, got {kappa}")));
    }
    let n0 = n0.max(1);
    let a = n0.max(EXPLICIT_TERMS);
    let mut explicit = Complex64::new(0.0, 0.0);
    for n in n0..a {
        let u = (n as f64).ln();
        if kappa == 0.0 || u > 0.0 {
            explicit += u.powf(kappa) * (-s * u).exp();
        }
    }
    let l = (a as f64).ln();
    let x_s = (-s * l).exp();
    let mut q = LogPoly { terms: vec![(kappa, Complex64::new(1.0, 0.0))] };
    let f_a = x_s * q.eval(l);
    let mut corr = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    let a_f = a as f64;
    let mut order = 0usize;
    for (k, b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let j = 2 * k + 1;
        while order < j {
            q = q.next(s, order);
            order += 1;
        }
        let t = *b * x_s * a_f.powi(-(j as i32)) * q.eval(l);
        corr += t;
        last = t.norm();
    }
    let integral = log_power_integral(kappa, s - 1.0, l)?;
    Ok(TailSum {
        value: explicit + integral + 0.5 * f_a - corr,
        error_estimate: last,
    })
}

/// Riemann zeta for real `s > 1`.
pub fn zeta(s: f64) -> Result<f64> {
    Ok(log_power_sum(0.0, Complex64::new(s, 0.0), 1)?.value.re)
}

/// `ζ″(s) = Σ (ln n)² n^{-s}` for real `s > 1`.
pub fn zeta_second_derivative(s: f64) -> Result<f64> {
    Ok(log_power_sum(2.0, Complex64::new(s, 0.0), 1)?.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn classical_values() {
        assert!((zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-13);
        assert!((zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-13);
        // ζ'(2)
        let d1 = log_power_sum(1.0, Complex64::new(2.0, 0.0), 1).unwrap().value.re;
        assert!((d1 - 0.937_548_254_315_843_8).abs() < 1e-12);
        assert!((zeta_second_derivative(2.0).unwrap() - 1.989_280_234_298_9).abs() < 1e-12);
    }

    #[test]
    fn near_the_pole() {
        // ζ(s) = 1/(s-1) + γ_E + O(s-1)
        let eps = 1e-4;
        let z = zeta(1.0 + eps).unwrap();
        assert!((z - 1.0 / eps - 0.577_215_664_901_532_9).abs() < 1e-3);
        // ζ″(s) ≈ 2/(s-1)^3
        let z2 = zeta_second_derivative(1.0 + eps).unwrap();
        assert!((z2 * eps.powi(3) / 2.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn tail_matches_brute_force() {
        let s = Complex64::new(2.5, 0.7);
        let brute: Complex64 = (20..200_000u64)
            .map(|n| {
                let u = (n as f64).ln();
                u * u * (-s * u).exp()
            })
            .sum();
        let rest = log_power_sum(2.0, s, 200_000).unwrap().value;
        let full = log_power_sum(2.0, s, 20).unwrap().value;
        assert!((brute + rest - full).norm() < 1e-12);
    }

    #[test]
    fn fractional_log_power() {
        let s = Complex64::new(3.0, 0.0);
        let brute: f64 = (2..10_000u64).map(|n| (n as f64).ln().sqrt() * (n as f64).powf(-3.0)).sum();
        let rest = log_power_sum(0.5, s, 10_000).unwrap().value.re;
        let full = log_power_sum(0.5, s, 2).unwrap().value.re;
        assert!((brute + rest - full).abs() < 1e-13);
        assert!(log_power_sum(0.5, Complex64::new(3.0, 1.0), 2).is_err());
    }

    #[test]
    fn domain_errors() {
        assert!(zeta(1.0).is_err());
        assert!(zeta(0.5).is_err());
        assert!(log_power_sum(-1.0, Complex64::new(2.0, 0.0), 1).is_err());
    }
}
