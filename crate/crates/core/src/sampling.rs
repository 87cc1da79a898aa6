//! Integration over the torus `T^d = [0,1)^d` with a seeded generator.
//!
//! Two rules are available: plain Monte Carlo with ChaCha8 and a randomly
//! shifted rank-1 lattice (Korobov generating vector). Both report a
//! standard error; for the lattice it comes from the spread over shifts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum TorusRule {
    MonteCarlo,
    Lattice { shifts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Seeded generator used throughout the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Korobov parameter: the integer nearest `m/φ` that is coprime to `m`.
fn korobov_parameter(m: usize) -> usize {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let mut a = ((m as f64 / phi).round() as usize).max(1);
    while gcd(a, m) != 1 {
        a += 1;
    }
    a
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Mean of `f` over `T^d`. The sample order is fixed by `seed`, so results are
/// bit-reproducible.
pub fn torus_mean<F>(d: usize, n_samples: usize, seed: u64, rule: TorusRule, mut f: F) -> TorusEstimate
where
    F: FnMut(&[f64]) -> f64,
{
    let n_samples = n_samples.max(1);
    let mut r = rng(seed);
    let mut theta = vec![0.0; d];
    match rule {
        TorusRule::MonteCarlo => {
            let vals: Vec<f64> = (0..n_samples)
                .map(|_| {
                    theta.iter_mut().for_each(|t| *t = r.gen::<f64>());
                    f(&theta)
                })
                .collect();
            let (mean, std_error) = mean_and_se(&vals);
            TorusEstimate { mean, std_error, samples: n_samples }
        }
        TorusRule::Lattice { shifts } => {
            let shifts = shifts.max(2);
            let m = (n_samples / shifts).max(1);
            let a = korobov_parameter(m);
            let mut z = vec![1usize; d];
            for j in 1..d {
                z[j] = z[j - 1] * a % m;
            }
            let mut means = Vec::with_capacity(shifts);
            for _ in 0..shifts {
                let shift: Vec<f64> = (0..d).map(|_| r.gen::<f64>()).collect();
                let mut acc = 0.0;
                for k in 0..m {
                    for j in 0..d {
                        theta[j] = ((k * z[j] % m) as f64 / m as f64 + shift[j]).fract();
                    }
                    acc += f(&theta);
                }
                means.push(acc / m as f64);
            }
            let (mean, std_error) = mean_and_se(&means);
            TorusEstimate { mean, std_error, samples: m * shifts }
        }
    }
}
