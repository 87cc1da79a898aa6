//! The Volterra operator `T_g f = -∫_s^∞ f(w) g′(w) dw` on Dirichlet series.
//!
//! On coefficients `(T_g f)′ = f g′` gives
//! `c_k = (1/ln k) Σ_{mn=k, n≥2} a_m b_n ln n` and `c_1 = 0`. The finite
//! section in the orthonormal basis `ẽ_n = n^{-s}/√w_n` of `𝒜²_μ` is stored
//! sparsely by columns; there are about `N ln N` nonzeros.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cache;
use crate::dirichlet::DirichletSeries;
use crate::error::{Error, Result};
use crate::measures::{AdmissibleMeasure, MeasureSpec};
use crate::quadrature::{integrate_complex, CompositeRule, QuadratureConfig};
use crate::sampling::rng;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Coefficients of `T_g f` up to `n_out`.
pub fn volterra_apply(g: &DirichletSeries, f: &DirichletSeries, n_out: u64) -> DirichletSeries {
    let fg = f.multiply(&g.derivative(), n_out);
    fg.map_terms(|k, h| if k == 1 { ZERO } else { -h / (k as f64).ln() })
}

/// `-∫_s^∞ f(w) g′(w) dw` along the ray `w = s + x`, `x ≥ 0`.
pub fn volterra_apply_quadrature(
    g: &DirichletSeries,
    f: &DirichletSeries,
    s: Complex64,
    q: &QuadratureConfig,
) -> Result<Complex64> {
    if !(s.re >= 1.0) {
        return Err(Error::Domain(format!("quadrature route needs Re s >= 1, got {}", s.re)));
    }
    let dg = g.derivative();
    if dg.nnz() == 0 {
        return Ok(ZERO);
    }
    // |f g′(s + x)| ≤ 2^{-x} M since g′ has no constant term
    let m = f.abs_sum(s.re) * dg.abs_sum(s.re);
    let ln2 = 2f64.ln();
    let x_max = ((m / (ln2 * 1e-2 * q.abs_tol)).log2()).max(1.0);
    let v = integrate_complex(
        |x| {
            let w = s + x;
            f.evaluate(w).value * dg.evaluate(w).value
        },
        0.0,
        x_max,
        q,
    )?;
    Ok(-v)
}

/// `N×N` section of `T_g` on `𝒜²_μ` in the basis `ẽ_n`.
#[derive(Debug, Clone)]
pub struct FiniteSectionMatrix {
    n: usize,
    /// `cols[j-1]` lists `(k, M[k][j])` with `j | k`, `k > j`.
    cols: Vec<Vec<(usize, Complex64)>>,
    symbol: DirichletSeries,
    measure: Option<MeasureSpec>,
}

impl FiniteSectionMatrix {
    /// Assembles the section from `weights[n-1] = w_n`, `n ≤ N`.
    pub fn from_weights(g: &DirichletSeries, weights: &[f64], n: usize) -> Result<Self> {
        if weights.len() < n {
            return Err(Error::Range(format!("need {n} weights, got {}", weights.len())));
        }
        let g = g.truncate(n as u64);
        let b: Vec<(usize, Complex64, f64)> = g
            .terms()
            .into_iter()
            .filter(|(m, _)| *m >= 2)
            .map(|(m, c)| (m as usize, c, (m as f64).ln()))
            .collect();
        let mut cols = vec![Vec::new(); n];
        for j in 1..=n {
            let wj = weights[j - 1];
            for &(m, c, lm) in &b {
                let k = j * m;
                if k > n {
                    break;
                }
                let v = c * (lm / (k as f64).ln()) * (weights[k - 1] / wj).sqrt();
                cols[j - 1].push((k, v));
            }
        }
        Ok(Self { n, cols, symbol: g, measure: None })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn symbol(&self) -> &DirichletSeries {
        &self.symbol
    }

    pub fn measure(&self) -> Option<&MeasureSpec> {
        self.measure.as_ref()
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// `M[k][j]` (1-based).
    pub fn entry(&self, k: usize, j: usize) -> Complex64 {
        self.cols
            .get(j.wrapping_sub(1))
            .and_then(|c| c.iter().find(|e| e.0 == k))
            .map(|e| e.1)
            .unwrap_or(ZERO)
    }

    /// Nonzero entries `(k, j, value)`, column-major.
    pub fn entries(&self) -> Vec<(usize, usize, Complex64)> {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(k, v)| (*k, j + 1, *v)))
            .collect()
    }

    /// `y = M x` restricted to columns `j > cut`.
    fn apply_tail(&self, x: &[Complex64], cut: usize, y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        for (j, col) in self.cols.iter().enumerate().skip(cut) {
            let xj = x[j];
            if xj == ZERO {
                continue;
            }
            for &(k, v) in col {
                y[k - 1] += v * xj;
            }
        }
    }

    /// `x = Mᴴ y` restricted to columns `j > cut`.
    fn apply_adjoint_tail(&self, y: &[Complex64], cut: usize, x: &mut [Complex64]) {
        for (j, col) in self.cols.iter().enumerate() {
            x[j] = if j < cut {
                ZERO
            } else {
                col.iter().map(|&(k, v)| v.conj() * y[k - 1]).sum()
            };
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.n];
        self.apply_tail(x, 0, &mut y);
        y
    }

    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut x = vec![ZERO; self.n];
        self.apply_adjoint_tail(y, 0, &mut x);
        x
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.cols.iter().flatten().map(|(_, v)| v.norm_sqr()).sum()
    }

    /// `Σ_k |M[k][j]|²`.
    pub fn column_norm_sq(&self, j: usize) -> f64 {
        self.cols[j - 1].iter().map(|(_, v)| v.norm_sqr()).sum()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.n, self.n, ZERO);
        for (k, j, v) in self.entries() {
            m[(k - 1, j - 1)] = v;
        }
        m
    }

    /// Coordinate CSV `k,j,re,im`, column-major.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        use crate::dirichlet::fmt_f64;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "j", "re", "im"])?;
        for (k, j, v) in self.entries() {
            wr.write_record([k.to_string(), j.to_string(), fmt_f64(v.re), fmt_f64(v.im)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Section of `T_g` on `𝒜²_μ` with weights from the cached table.
pub fn finite_section_matrix(g: &DirichletSeries, mu: &AdmissibleMeasure, n: usize) -> Result<FiniteSectionMatrix> {
    let w = cache::weight_table(mu, n, &QuadratureConfig::default())?;
    let mut m = FiniteSectionMatrix::from_weights(g, &w, n)?;
    m.measure = Some(mu.spec().clone());
    Ok(m)
}

/// Largest singular value from power iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn start_vector(n: usize) -> Vec<Complex64> {
    // all ones plus a deterministic perturbation
    let v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * ((i + 1) as f64).sin(), 0.05 * ((i + 1) as f64 * 0.7).cos()))
        .collect();
    normalize(v).0
}

fn normalize(mut v: Vec<Complex64>) -> (Vec<Complex64>, f64) {
    let nrm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|c| *c /= nrm);
    }
    (v, nrm)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Largest eigenvalue of the Lanczos tridiagonal and the last component of its eigenvector.
fn top_ritz(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (i, theta) = eig.eigenvalues.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc });
    (theta, eig.eigenvectors[(k - 1, i)].abs())
}

/// Power iteration on `MᴴM` restricted to columns `≥ cut`, accelerated by
/// Lanczos with full reorthogonalization. Stops when successive Ritz values
/// differ by less than `tol` relative and the residual bound is below `√tol`.
fn power_iteration(m: &FiniteSectionMatrix, cut: usize, iters: usize, tol: f64) -> NormEstimate {
    let n = m.n;
    if cut >= n {
        return NormEstimate { value: 0.0, iterations: 0, converged: true };
    }
    let steps = iters.max(1).min(n - cut);
    let mut q = start_vector(n);
    q.iter_mut().take(cut).for_each(|c| *c = ZERO);
    q = normalize(q).0;
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut y = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    let mut prev = f64::NAN;
    for it in 1..=steps {
        m.apply_tail(&q, cut, &mut y);
        m.apply_adjoint_tail(&y, cut, &mut w);
        alpha.push(dot(&q, &w).re);
        basis.push(q);
        // two passes of Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let (next, b) = normalize(w.clone());
        let (theta, last) = top_ritz(&alpha, &beta);
        if theta <= 0.0 {
            return NormEstimate { value: 0.0, iterations: it, converged: true };
        }
        // a full Krylov space is invariant too
        let invariant = b <= 1e-14 * theta.sqrt() || it == n - cut;
        let settled = (theta - prev).abs() < tol * theta && b * last <= tol.sqrt() * theta;
        if invariant || settled || it == steps {
            return NormEstimate { value: theta.sqrt(), iterations: it, converged: invariant || settled };
        }
        prev = theta;
        beta.push(b);
        q = next;
    }
    unreachable!("loop returns on its last step")
}

/// `‖M‖₂` by Lanczos-accelerated power iteration on `MᴴM`; stops when
/// successive Rayleigh–Ritz values differ by less than `tol` relative.
pub fn operator_norm_estimate(m: &FiniteSectionMatrix, iters: usize, tol: f64) -> Result<NormEstimate> {
    if iters == 0 || !(tol > 0.0) {
        return Err(Error::Precondition(format!("need iters >= 1 and tol > 0, got {iters}, {tol}")));
    }
    Ok(power_iteration(m, 0, iters, tol))
}

fn dense_singular_values(m: &FiniteSectionMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.to_dense().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Top `k` singular values, descending. Small problems use a dense SVD;
/// larger ones use subspace iteration on `MᴴM` with Rayleigh–Ritz.
pub fn singular_values(m: &FiniteSectionMatrix, k: usize) -> Result<Vec<f64>> {
    let n = m.n;
    if k > n {
        return Err(Error::Precondition(format!("asked for {k} singular values of a {n}×{n} matrix")));
    }
    if k == 0 {
        return Ok(vec![]);
    }
    let b = (k + 8).min(n);
    if n <= 256 || 2 * b >= n {
        let mut s = dense_singular_values(m);
        s.truncate(k);
        return Ok(s);
    }
    use rand::Rng;
    let mut r = rng(0x5eed);
    let mut v = DMatrix::from_fn(n, b, |_, _| Complex64::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5));
    v = v.qr().q();
    let mut prev = vec![f64::INFINITY; k];
    let mut x = vec![ZERO; n];
    let mut y = vec![ZERO; n];
    for _ in 0..2000 {
        let mut w = DMatrix::from_element(n, b, ZERO);
        for c in 0..b {
            for i in 0..n {
                x[i] = v[(i, c)];
            }
            m.apply_tail(&x, 0, &mut y);
            let mut z = vec![ZERO; n];
            m.apply_adjoint_tail(&y, 0, &mut z);
            for i in 0..n {
                w[(i, c)] = z[i];
            }
        }
        let h = v.adjoint() * &w;
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let mut ev: Vec<f64> = eig.eigenvalues.iter().map(|e| e.max(0.0)).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        let cur: Vec<f64> = ev[..k].iter().map(|e| e.sqrt()).collect();
        let done = cur
            .iter()
            .zip(&prev)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * cur[0].max(f64::MIN_POSITIVE));
        prev = cur;
        if done {
            break;
        }
        v = w.qr().q();
    }
    Ok(prev)
}

/// Terms and partial sums of `Σ_{n≥n0} ‖T_g ẽ_n‖^p_{𝒜²_μ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenReport {
    pub n0: u64,
    pub p: f64,
    /// `(n, ‖T_g ẽ_n‖^p, lower bound, partial sum, comparison sum Σ (ln m)^{-p})`.
    pub rows: Vec<(u64, f64, f64, f64, f64)>,
}

impl SchattenReport {
    pub fn violations(&self) -> Vec<u64> {
        self.rows
            .iter()
            .filter(|r| r.1 < r.2 * (1.0 - 1e-12))
            .map(|r| r.0)
            .collect()
    }

    pub fn partial_sum(&self) -> f64 {
        self.rows.last().map(|r| r.3).unwrap_or(0.0)
    }
}

/// Columns of the full (untruncated) operator: for `n0 ≤ n ≤ N`,
/// `‖T_g ẽ_n‖² = Σ_m |ln m/(ln n + ln m)|² |b_m|² w_{nm}/w_n`, compared
/// with `((ln n0)²/(4 (ln n)²) |b_{n0}|² w_{n0})^{p/2}`.
pub fn schatten_partial_sum(g: &DirichletSeries, mu: &AdmissibleMeasure, p: f64, n: u64) -> Result<SchattenReport> {
    if !(p >= 2.0) {
        return Err(Error::Precondition(format!("Schatten sums need p >= 2, got {p}")));
    }
    let b: Vec<(u64, Complex64)> = g.terms().into_iter().filter(|t| t.0 >= 2).collect();
    let Some(&(n0, b0)) = b.first() else {
        return Err(Error::DegenerateSymbol("constant symbol has no n0".into()));
    };
    let m_max = b.last().map(|t| t.0).unwrap_or(n0);
    let w = cache::weight_table(mu, (n * m_max) as usize, &QuadratureConfig::default())?;
    let l0 = (n0 as f64).ln();
    let mut rows = Vec::with_capacity(n as usize);
    let (mut s, mut cmp) = (0.0, 0.0);
    for k in n0..=n {
        let lk = (k as f64).ln();
        let col: f64 = b
            .iter()
            .map(|&(m, c)| {
                let lm = (m as f64).ln();
                (lm / (lk + lm)).powi(2) * c.norm_sqr() * w[(k * m) as usize - 1] / w[k as usize - 1]
            })
            .sum();
        let term = col.powf(p / 2.0);
        let bound = (l0 * l0 / (4.0 * lk * lk) * b0.norm_sqr() * w[n0 as usize - 1]).powf(p / 2.0);
        s += term;
        cmp += lk.powf(-p);
        rows.push((k, term, bound, s, cmp));
    }
    Ok(SchattenReport { n0, p, rows })
}

/// Monte Carlo estimate of the `p = 2` Carleson-type quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub estimate: f64,
    pub std_error: f64,
    /// `‖T_g f‖²_{𝒜²_μ} − |(T_g f)(+∞)|²` from coefficients.
    pub exact: f64,
    pub ratio: f64,
    pub ratio_std_error: f64,
    pub t_cut: f64,
    /// Cauchy mass of `|t| > t_cut`, excluded from the estimate.
    pub t_tail_mass: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Vertical truncation of the Cauchy measure.
pub const CARLESON_T_CUT: f64 = 100.0;

/// `∫_{T^d} ∫_{|t|≤100} ∫_0^∞ |f_χ|² |g′_χ|² (σ+it) β_μ(σ) dσ dt/(π(1+t²)) dm(χ)`.
/// `(χ, t)` are sampled jointly; the σ-integral uses a fixed composite
/// Gauss–Legendre rule on dyadic panels of `(0, 64]`.
#[allow(clippy::too_many_arguments)]
pub fn carleson_quantity_p2(
    f: &DirichletSeries,
    g: &DirichletSeries,
    mu: &AdmissibleMeasure,
    d: usize,
    n_samples: usize,
    seed: u64,
    q: &QuadratureConfig,
) -> Result<CarlesonReport> {
    let dg = g.derivative();
    // smoothness check; the lifts themselves are rebuilt below with node tables
    f.bohr_lift(d)?;
    dg.bohr_lift(d)?;
    let tf = volterra_apply(g, f, f.truncation().saturating_mul(g.truncation()));
    let exact = crate::norms::a2mu_norm_sq(&tf, mu)? - tf.constant_term().norm_sqr();
    let t_cut = CARLESON_T_CUT;
    let inner_mass = 2.0 * t_cut.atan() / std::f64::consts::PI;
    if dg.nnz() == 0 || f.nnz() == 0 {
        return Ok(CarlesonReport {
            estimate: 0.0,
            std_error: 0.0,
            exact,
            ratio: f64::NAN,
            ratio_std_error: f64::NAN,
            t_cut,
            t_tail_mass: 1.0 - inner_mass,
            samples: 0,
            seed,
        });
    }

    let mut panels = vec![(0.0, 2f64.powi(-20))];
    let mut a = 2f64.powi(-20);
    while a < 64.0 {
        panels.push((a, 2.0 * a));
        a *= 2.0;
    }
    let rule = CompositeRule::from_panels(&panels);
    let betas: Vec<f64> = rule.nodes.iter().map(|&s| mu.beta(s, q)).collect::<Result<_>>()?;

    struct Lifted {
        ln_n: Vec<f64>,
        alpha: Vec<Vec<u32>>,
        coef: Vec<Complex64>,
        pows: Vec<Vec<f64>>, // pows[node][term] = n^{-σ}
    }
    let primes = crate::arith::first_primes(d);
    let lift = |series: &DirichletSeries| -> Lifted {
        let terms = series.terms();
        let ln_n: Vec<f64> = terms.iter().map(|t| (t.0 as f64).ln()).collect();
        let alpha = terms
            .iter()
            .map(|t| crate::arith::smooth_exponents(t.0, &primes).expect("smooth"))
            .collect();
        let coef = terms.iter().map(|t| t.1).collect();
        let pows = rule
            .nodes
            .iter()
            .map(|s| ln_n.iter().map(|l| (-s * l).exp()).collect())
            .collect();
        Lifted { ln_n, alpha, coef, pows }
    };
    let fl = lift(f);
    let gl = lift(&dg);

    use rand::Rng;
    let mut r = rng(seed);
    let v_lo = 0.5 - inner_mass / 2.0;
    let mut theta = vec![0.0; d];
    let mut phased_f = vec![ZERO; fl.coef.len()];
    let mut phased_g = vec![ZERO; gl.coef.len()];
    let mut vals = Vec::with_capacity(n_samples);
    let phase = |l: &Lifted, theta: &[f64], t: f64, out: &mut [Complex64]| {
        for (i, o) in out.iter_mut().enumerate() {
            let ang: f64 = l.alpha[i].iter().zip(theta).map(|(&e, th)| e as f64 * th).sum::<f64>().fract();
            *o = l.coef[i] * Complex64::from_polar(1.0, std::f64::consts::TAU * ang - t * l.ln_n[i]);
        }
    };
    for _ in 0..n_samples.max(2) {
        theta.iter_mut().for_each(|x| *x = r.gen::<f64>());
        let v = v_lo + inner_mass * r.gen::<f64>();
        let t = (std::f64::consts::PI * (v - 0.5)).tan();
        phase(&fl, &theta, t, &mut phased_f);
        phase(&gl, &theta, t, &mut phased_g);
        let mut acc = 0.0;
        for (node, (w, beta)) in rule.weights.iter().zip(&betas).enumerate() {
            let fv: Complex64 = phased_f.iter().zip(&fl.pows[node]).map(|(c, p)| c * p).sum();
            let gv: Complex64 = phased_g.iter().zip(&gl.pows[node]).map(|(c, p)| c * p).sum();
            acc += w * beta * fv.norm_sqr() * gv.norm_sqr();
        }
        vals.push(inner_mass * acc);
    }
    let nn = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / nn;
    let var = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nn - 1.0);
    let se = (var / nn).sqrt();
    Ok(CarlesonReport {
        estimate: mean,
        std_error: se,
        exact,
        ratio: mean / exact,
        ratio_std_error: se / exact,
        t_cut,
        t_tail_mass: 1.0 - inner_mass,
        samples: vals.len(),
        seed,
    })
}

/// `(cut, ‖M restricted to columns > cut‖₂)` for each cut.
pub fn compactness_profile(m: &FiniteSectionMatrix, cuts: &[usize], iters: usize, tol: f64) -> Result<Vec<(usize, f64)>> {
    cuts.iter()
        .map(|&c| {
            if c > m.n {
                return Err(Error::Range(format!("cut {c} exceeds dimension {}", m.n)));
            }
            Ok((c, power_iteration(m, c, iters, tol).value))
        })
        .collect()
}
