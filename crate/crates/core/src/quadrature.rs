//! Adaptive composite Gauss–Legendre quadrature.
//!
//! Every panel is integrated with a 15-point Gauss–Legendre rule; the error
//! of a panel is estimated by comparing the one-panel value with the sum over
//! its two halves. Panels are kept in a max-heap keyed by that estimate and
//! the worst one is bisected until the accumulated error meets the requested
//! tolerance. The integrand may be vector valued, which lets a whole batch of
//! related integrals (e.g. a table of Bergman weights) share one partition.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GL_POINTS: usize = 15;

/// Nodes and weights of the 15-point Gauss–Legendre rule on [-1, 1].
fn gauss_legendre_15() -> &'static ([f64; GL_POINTS], [f64; GL_POINTS]) {
    static RULE: OnceLock<([f64; GL_POINTS], [f64; GL_POINTS])> = OnceLock::new();
    RULE.get_or_init(gauss_legendre_rule::<GL_POINTS>)
}

/// Newton iteration on the Legendre polynomial P_n, starting from the
/// Chebyshev-like initial guesses cos(pi (i + 3/4) / (n + 1/2)).
fn gauss_legendre_rule<const N: usize>() -> ([f64; N], [f64; N]) {
    let n = N;
    let mut nodes = [0.0; N];
    let mut weights = [0.0; N];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tolerances and limits for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation point for improper integrals. `None` lets each integrand
    /// pick the point where its analytic tail bound drops below `abs_tol`.
    pub upper_cutoff: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 20_000,
            upper_cutoff: None,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::Domain(format!(
                "tolerances must be positive (abs_tol={}, rel_tol={})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be at least 1".into()));
        }
        if let Some(c) = self.upper_cutoff {
            if !(c > 0.0) {
                return Err(Error::Domain(format!("upper_cutoff must be positive, got {c}")));
            }
        }
        Ok(())
    }

    /// Requested absolute accuracy for an integral of magnitude `value`.
    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Result of a (possibly vector valued) adaptive integration.
#[derive(Debug, Clone)]
pub struct Integral {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub subdivisions: usize,
    /// Final partition, sorted by left endpoint.
    pub panels: Vec<(f64, f64)>,
}

struct Panel {
    a: f64,
    b: f64,
    /// GL value on each half.
    left: Vec<f64>,
    right: Vec<f64>,
    err: Vec<f64>,
    key: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .partial_cmp(&other.key)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

fn gl_panel<F>(f: &mut F, a: f64, b: f64, dim: usize, out: &mut [f64], buf: &mut [f64])
where
    F: FnMut(f64, &mut [f64]),
{
    let (nodes, weights) = gauss_legendre_15();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    out[..dim].iter_mut().for_each(|v| *v = 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        f(mid + half * x, buf);
        for k in 0..dim {
            out[k] += w * buf[k];
        }
    }
    out[..dim].iter_mut().for_each(|v| *v *= half);
}

/// Integrates a vector valued function over the finite interval `[a, b]`.
///
/// `f(x, out)` must write `dim` components into `out`. The loop stops when
/// every component's accumulated error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_vec<F>(f: F, dim: usize, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral>
where
    F: FnMut(f64, &mut [f64]),
{
    integrate_vec_with_breaks(f, dim, &[a, b], cfg)
}

/// As [`integrate_vec`], starting from the partition given by the sorted
/// `breaks` (which include both end points). Useful when the integrand has
/// features far smaller than the interval that a single panel would miss.
pub fn integrate_vec_with_breaks<F>(mut f: F, dim: usize, breaks: &[f64], cfg: &QuadratureConfig) -> Result<Integral>
where
    F: FnMut(f64, &mut [f64]),
{
    cfg.validate()?;
    if breaks.len() < 2 {
        return Err(Error::Domain("need at least two break points".into()));
    }
    let a = breaks[0];
    let b = breaks[breaks.len() - 1];
    if breaks.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("integration bounds must be finite: [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral {
            values: vec![0.0; dim],
            errors: vec![0.0; dim],
            subdivisions: 0,
            panels: vec![],
        });
    }
    if a > b {
        let rev: Vec<f64> = breaks.iter().rev().copied().collect();
        let mut r = integrate_vec_with_breaks(f, dim, &rev, cfg)?;
        r.values.iter_mut().for_each(|v| *v = -*v);
        return Ok(r);
    }
    if breaks.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("break points must be sorted".into()));
    }

    let mut buf = vec![0.0; dim];
    let mut coarse = vec![0.0; dim];

    let make_panel = |f: &mut F, a: f64, b: f64, coarse: &[f64], buf: &mut [f64], scale: &[f64]| {
        let m = 0.5 * (a + b);
        let mut left = vec![0.0; dim];
        let mut right = vec![0.0; dim];
        gl_panel(f, a, m, dim, &mut left, buf);
        gl_panel(f, m, b, dim, &mut right, buf);
        let err: Vec<f64> = (0..dim).map(|k| (coarse[k] - left[k] - right[k]).abs()).collect();
        let key = err
            .iter()
            .zip(scale)
            .map(|(e, s)| e / s)
            .fold(0.0, f64::max);
        Panel { a, b, left, right, err, key }
    };

    let mut heap = BinaryHeap::new();
    let mut total = vec![0.0; dim];
    let mut total_err = vec![0.0; dim];
    let unit_scale = vec![cfg.abs_tol; dim];
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        gl_panel(&mut f, w[0], w[1], dim, &mut coarse, &mut buf);
        let p = make_panel(&mut f, w[0], w[1], &coarse, &mut buf, &unit_scale);
        for k in 0..dim {
            total[k] += p.left[k] + p.right[k];
            total_err[k] += p.err[k];
        }
        heap.push(p);
    }
    let mut subdivisions = 0usize;

    let converged = |total: &[f64], total_err: &[f64]| {
        total
            .iter()
            .zip(total_err)
            .all(|(v, e)| *e <= cfg.target(*v))
    };

    while !converged(&total, &total_err) {
        if subdivisions >= cfg.max_subdivisions {
            let worst = (0..dim)
                .max_by(|&i, &j| {
                    (total_err[i] / cfg.target(total[i]))
                        .partial_cmp(&(total_err[j] / cfg.target(total[j])))
                        .unwrap_or(Ordering::Equal)
                })
                .unwrap_or(0);
            return Err(Error::Quadrature {
                subdivisions,
                estimate: total.get(worst).copied().unwrap_or(0.0),
                error: total_err.get(worst).copied().unwrap_or(0.0),
                requested: cfg.target(total.get(worst).copied().unwrap_or(0.0)),
            });
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            // Panel collapsed to machine precision; nothing left to refine.
            heap.push(Panel { key: 0.0, ..p });
            break;
        }
        let scale: Vec<f64> = total.iter().map(|v| cfg.target(*v)).collect();
        let l = make_panel(&mut f, p.a, m, &p.left, &mut buf, &scale);
        let r = make_panel(&mut f, m, p.b, &p.right, &mut buf, &scale);
        for k in 0..dim {
            total[k] += l.left[k] + l.right[k] + r.left[k] + r.right[k] - p.left[k] - p.right[k];
            total_err[k] += l.err[k] + r.err[k] - p.err[k];
        }
        heap.push(l);
        heap.push(r);
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            total.iter_mut().for_each(|v| *v = 0.0);
            total_err.iter_mut().for_each(|v| *v = 0.0);
            for p in heap.iter() {
                for k in 0..dim {
                    total[k] += p.left[k] + p.right[k];
                    total_err[k] += p.err[k];
                }
            }
        }
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal));
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for p in &panels {
        for k in 0..dim {
            values[k] += p.left[k] + p.right[k];
            errors[k] += p.err[k];
        }
    }
    Ok(Integral {
        values,
        errors,
        subdivisions,
        panels: panels.iter().map(|p| (p.a, p.b)).collect(),
    })
}

/// Scalar adaptive integral over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(|x, out| out[0] = f(x), 1, a, b, cfg).map(|r| r.values[0])
}

/// Complex valued adaptive integral over `[a, b]`.
pub fn integrate_complex<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    integrate_vec(
        |x, out| {
            let v = f(x);
            out[0] = v.re;
            out[1] = v.im;
        },
        2,
        a,
        b,
        cfg,
    )
    .map(|r| Complex64::new(r.values[0], r.values[1]))
}

/// A fixed composite rule: `sum_i weights[i] * g(nodes[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    /// Two 15-point panels per element of `panels` (each panel is split at
    /// its midpoint, matching the refined values used by the adaptive loop).
    pub fn from_panels(panels: &[(f64, f64)]) -> Self {
        let (gn, gw) = gauss_legendre_15();
        let mut nodes = Vec::with_capacity(panels.len() * 2 * GL_POINTS);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for &(a, b) in panels {
            let m = 0.5 * (a + b);
            for (lo, hi) in [(a, m), (m, b)] {
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                for (x, w) in gn.iter().zip(gw) {
                    nodes.push(mid + half * x);
                    weights.push(half * w);
                }
            }
        }
        Self { nodes, weights }
    }

    pub fn apply<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * g(*x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
