//! Polynomials on the polydisc `𝔻^d`: Bergman `A²` norms, the Bloch
//! seminorm, composition with disc automorphisms, the Garsia-type norm and
//! the radicality inequality.
//!
//! Composed norms are computed exactly. For `φ(u) = ε(a − u)/(1 − āu)` the
//! Gram matrix `G_{kl} = ⟨φ^k, φ^l⟩_{A²(𝔻)}` has the series
//! `(1−|a|²)² Σ_m (m+1)(n+1) b^m b̄^n / (k+m+1)`, `n = k+m−l`, `b = āε̄`,
//! obtained by the substitution `v = φ(u)`. Since each coordinate of `Φ`
//! depends on one variable, `‖F∘Φ‖²` is the tensor contraction of the
//! coefficient array with one Gram matrix per coordinate. The truncated
//! Taylor composition [`mobius_compose`] is kept as an independent route.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirichlet::PolydiscPolynomial;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

impl PolydiscPolynomial {
    /// Product truncated to per-variable degree `cap` (no truncation for `None`).
    pub fn mul(&self, other: &Self, cap: Option<u32>) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Precondition(format!("dimension mismatch {} vs {}", self.dim, other.dim)));
        }
        let mut terms: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (a, ca) in &self.terms {
            'outer: for (b, cb) in &other.terms {
                let mut g = Vec::with_capacity(self.dim);
                for (x, y) in a.iter().zip(b) {
                    let e = x + y;
                    if cap.is_some_and(|c| e > c) {
                        continue 'outer;
                    }
                    g.push(e);
                }
                *terms.entry(g).or_insert(ZERO) += ca * cb;
            }
        }
        terms.retain(|_, c| *c != ZERO);
        Ok(Self { dim: self.dim, terms })
    }

    /// `F^k` by repeated multiplication.
    pub fn pow(&self, k: u32, cap: Option<u32>) -> Result<Self> {
        let mut out = Self::constant(self.dim, ONE);
        for _ in 0..k {
            out = out.mul(self, cap)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), -c);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        for (a, v) in &self.terms {
            out.add_term(a.clone(), v * c);
        }
        out
    }

    /// `∂F/∂z_j` (0-based `j`).
    pub fn partial_derivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (a, c) in &self.terms {
            if a[j] > 0 {
                let mut b = a.clone();
                b[j] -= 1;
                out.add_term(b, c * a[j] as f64);
            }
        }
        out
    }

    /// `F(0)`.
    pub fn constant_term(&self) -> Complex64 {
        self.coefficient(&vec![0; self.dim])
    }
}

/// `sqrt(Σ |c_α|² Π 1/(α_j+1))`.
pub fn bergman_norm_polydisc(f: &PolydiscPolynomial) -> f64 {
    bergman_norm_sq(f).sqrt()
}

fn bergman_norm_sq(f: &PolydiscPolynomial) -> f64 {
    f.terms()
        .iter()
        .map(|(a, c)| c.norm_sqr() / a.iter().map(|&e| e as f64 + 1.0).product::<f64>())
        .sum()
}

/// `Φ(z)_j = ε_j (a_j − z_{σ(j)})/(1 − ā_j z_{σ(j)})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobiusTuple {
    pub center: Vec<Complex64>,
    pub signs: Vec<Complex64>,
    pub permutation: Vec<usize>,
}

impl MobiusTuple {
    pub fn new(center: Vec<Complex64>, signs: Vec<Complex64>, permutation: Vec<usize>) -> Result<Self> {
        let d = center.len();
        if signs.len() != d || permutation.len() != d {
            return Err(Error::Precondition("center, signs and permutation must have equal length".into()));
        }
        if let Some(a) = center.iter().find(|a| !(a.norm() < 1.0)) {
            return Err(Error::Precondition(format!("center {a} is not in the open disc")));
        }
        if let Some(e) = signs.iter().find(|e| (e.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::Precondition(format!("sign {e} is not unimodular")));
        }
        let mut seen = vec![false; d];
        for &p in &permutation {
            if p >= d || seen[p] {
                return Err(Error::Precondition(format!("{permutation:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(Self { center, signs, permutation })
    }

    /// `ε = 1`, `σ = id`.
    pub fn at(center: Vec<Complex64>) -> Result<Self> {
        let d = center.len();
        Self::new(center, vec![ONE; d], (0..d).collect())
    }

    pub fn identity_like(d: usize) -> Self {
        Self { center: vec![ZERO; d], signs: vec![-ONE; d], permutation: (0..d).collect() }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `Φ_j` as a function of one variable.
    pub fn coordinate(&self, j: usize, u: Complex64) -> Complex64 {
        let a = self.center[j];
        self.signs[j] * (a - u) / (ONE - a.conj() * u)
    }

    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim()).map(|j| self.coordinate(j, z[self.permutation[j]])).collect()
    }

    /// `Φ(0)`.
    pub fn image_of_origin(&self) -> Vec<Complex64> {
        self.center.iter().zip(&self.signs).map(|(a, e)| e * a).collect()
    }
}

/// `G_{kl} = ⟨φ^k, φ^l⟩_{A²(𝔻)}` for `k, l < size`.
pub fn automorphism_gram(a: Complex64, eps: Complex64, size: usize) -> Vec<Vec<Complex64>> {
    let b = a.conj() * eps.conj();
    let r2 = b.norm_sqr();
    let pref = (1.0 - a.norm_sqr()).powi(2);
    let mut g = vec![vec![ZERO; size]; size];
    for k in 0..size {
        for l in k..size {
            // m starts at l − k, so n = k + m − l starts at 0
            let m0 = l - k;
            let lead = b.powu(m0 as u32);
            let mut geo = 1.0;
            let mut acc = 0.0;
            let mut m = m0;
            loop {
                let n = k + m - l;
                let term = geo * ((m + 1) * (n + 1)) as f64 / (k + m + 1) as f64;
                acc += term;
                if r2 == 0.0 || (m > m0 + 4 && term < 1e-18 * acc) || m > m0 + 100_000 {
                    break;
                }
                geo *= r2;
                m += 1;
            }
            g[k][l] = pref * lead * acc;
            g[l][k] = g[k][l].conj();
        }
    }
    g
}

/// Dense coefficient array of `F` with per-variable extents `max α_j + 1`.
struct Tensor {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl Tensor {
    fn from_poly(f: &PolydiscPolynomial) -> Self {
        let d = f.dim();
        let mut dims = vec![1usize; d];
        for a in f.terms().keys() {
            for j in 0..d {
                dims[j] = dims[j].max(a[j] as usize + 1);
            }
        }
        let len = dims.iter().product();
        let mut data = vec![ZERO; len];
        for (a, c) in f.terms() {
            data[Self::offset(&dims, a)] = *c;
        }
        Self { dims, data }
    }

    fn offset(dims: &[usize], a: &[u32]) -> usize {
        a.iter().zip(dims).fold(0, |acc, (&e, &n)| acc * n + e as usize)
    }

    /// `T[.., k, ..] ← Σ_l m[k][l] T[.., l, ..]` along `mode`.
    fn mode_product(&mut self, mode: usize, m: &[Vec<Complex64>]) {
        let n = self.dims[mode];
        let inner: usize = self.dims[mode + 1..].iter().product();
        let outer: usize = self.dims[..mode].iter().product();
        let mut buf = vec![ZERO; n];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * n * inner + i;
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = (0..n).map(|l| m[k][l] * self.data[base + l * inner]).sum();
                }
                for (k, b) in buf.iter().enumerate() {
                    self.data[base + k * inner] = *b;
                }
            }
        }
    }
}

/// Gram matrices of one automorphism tuple, reusable for every polynomial
/// whose per-variable degree is below `size`.
#[derive(Debug, Clone)]
pub struct CenterGram {
    pub phi: MobiusTuple,
    grams: Vec<Vec<Vec<Complex64>>>,
}

impl CenterGram {
    pub fn new(phi: &MobiusTuple, size: usize) -> Self {
        let grams = (0..phi.dim()).map(|j| automorphism_gram(phi.center[j], phi.signs[j], size)).collect();
        Self { phi: phi.clone(), grams }
    }

    pub fn size(&self) -> usize {
        self.grams.first().map_or(0, Vec::len)
    }

    /// `‖F∘Φ‖²_{A²(𝔻^d)}` without truncation.
    pub fn composed_norm_sq(&self, f: &PolydiscPolynomial) -> Result<f64> {
        if f.dim() != self.phi.dim() {
            return Err(Error::Precondition(format!("dimension mismatch {} vs {}", f.dim(), self.phi.dim())));
        }
        if f.is_zero() {
            return Ok(0.0);
        }
        if f.max_degree() as usize >= self.size() {
            return Err(Error::Truncation(format!("degree {} needs Gram size above {}", f.max_degree(), self.size())));
        }
        let t = Tensor::from_poly(f);
        let mut u = Tensor { dims: t.dims.clone(), data: t.data.iter().map(|c| c.conj()).collect() };
        for (j, g) in self.grams.iter().enumerate() {
            u.mode_product(j, g);
        }
        Ok(t.data.iter().zip(&u.data).map(|(c, v)| c * v).sum::<Complex64>().re.max(0.0))
    }

    /// `‖F∘Φ − F(Φ(0))‖_{A²}`.
    pub fn centered_norm(&self, f: &PolydiscPolynomial) -> Result<f64> {
        // (F − F(Φ(0)))∘Φ has zero constant term, so no large constant is cancelled
        let mut g = f.clone();
        g.add_term(vec![0; f.dim()], -f.evaluate(&self.phi.image_of_origin()));
        Ok(self.composed_norm_sq(&g)?.max(0.0).sqrt())
    }
}

/// `‖F∘Φ‖²_{A²(𝔻^d)}` without truncation.
pub fn composed_norm_sq(f: &PolydiscPolynomial, phi: &MobiusTuple) -> Result<f64> {
    CenterGram::new(phi, f.max_degree() as usize + 1).composed_norm_sq(f)
}

/// `‖F∘Φ − F(Φ(0))‖_{A²}`, which equals `sqrt(‖F∘Φ‖² − |F(Φ(0))|²)`.
pub fn centered_composed_norm(f: &PolydiscPolynomial, phi: &MobiusTuple) -> Result<f64> {
    CenterGram::new(phi, f.max_degree() as usize + 1).centered_norm(f)
}

/// Truncated Taylor expansion of `F∘Φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    pub poly: PolydiscPolynomial,
    pub degree_cap: u32,
    /// `A²` norm of the discarded part, `sqrt(‖F∘Φ‖² − ‖poly‖²)`.
    pub truncation_norm: f64,
}

fn univariate_mul(a: &[Complex64], b: &[Complex64], cap: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; cap + 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate().take(cap + 1 - i.min(cap + 1)) {
            if i + j <= cap {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// `F∘Φ` expanded with `(a − u)/(1 − āu) = (a − u) Σ (āu)^k` and truncated
/// at per-variable degree `degree_cap`.
pub fn mobius_compose(f: &PolydiscPolynomial, phi: &MobiusTuple, degree_cap: u32) -> Result<Composition> {
    if f.dim() != phi.dim() {
        return Err(Error::Precondition(format!("dimension mismatch {} vs {}", f.dim(), phi.dim())));
    }
    if degree_cap < f.max_degree() {
        return Err(Error::Truncation(format!(
            "degree cap {degree_cap} below the degree {} of F",
            f.max_degree()
        )));
    }
    let d = f.dim();
    let cap = degree_cap as usize;
    // powers[j][p] = φ_j(u)^p truncated
    let mut powers: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(d);
    for j in 0..d {
        let a = phi.center[j];
        let e = phi.signs[j];
        let mut series = vec![ZERO; cap + 1];
        series[0] = e * a;
        let w = 1.0 - a.norm_sqr();
        for (k, s) in series.iter_mut().enumerate().skip(1) {
            *s = -e * w * a.conj().powu(k as u32 - 1);
        }
        let maxp = f.terms().keys().map(|al| al[j]).max().unwrap_or(0) as usize;
        let mut pw = vec![{
            let mut one = vec![ZERO; cap + 1];
            one[0] = ONE;
            one
        }];
        for p in 1..=maxp {
            let next = univariate_mul(&pw[p - 1], &series, cap);
            pw.push(next);
        }
        powers.push(pw);
    }
    // Coordinate j of Φ is a function of w_{σ(j)}.
    let mut inv = vec![0; d];
    for (j, &s) in phi.permutation.iter().enumerate() {
        inv[s] = j;
    }
    let len = (cap + 1).pow(d as u32);
    let mut data = vec![ZERO; len];
    let mut idx = vec![0usize; d];
    for (alpha, c) in f.terms() {
        for (pos, slot) in data.iter_mut().enumerate() {
            let mut r = pos;
            for i in (0..d).rev() {
                idx[i] = r % (cap + 1);
                r /= cap + 1;
            }
            let mut v = *c;
            for i in 0..d {
                let j = inv[i];
                v *= powers[j][alpha[j] as usize][idx[i]];
                if v == ZERO {
                    break;
                }
            }
            *slot += v;
        }
    }
    let mut poly = PolydiscPolynomial::zero(d);
    for (pos, v) in data.iter().enumerate() {
        if *v != ZERO {
            let mut r = pos;
            let mut beta = vec![0u32; d];
            for i in (0..d).rev() {
                beta[i] = (r % (cap + 1)) as u32;
                r /= cap + 1;
            }
            poly.add_term(beta, *v);
        }
    }
    let exact = composed_norm_sq(f, phi)?;
    let truncation_norm = (exact - bergman_norm_sq(&poly)).max(0.0).sqrt();
    Ok(Composition { poly, degree_cap, truncation_norm })
}

/// Product grid on `𝔻^d`: each coordinate takes `r e^{2πik/n_angles}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolydiscGrid {
    pub radii: Vec<f64>,
    pub n_angles: usize,
}

impl Default for PolydiscGrid {
    fn default() -> Self {
        let mut radii = vec![0.0];
        radii.extend((1..=40).map(|k| 1.0 - 2f64.powf(-k as f64 / 4.0)));
        Self { radii, n_angles: 16 }
    }
}

impl PolydiscGrid {
    pub fn points_per_coordinate(&self) -> Vec<Complex64> {
        let mut pts = Vec::new();
        for &r in &self.radii {
            if r == 0.0 {
                pts.push(ZERO);
                continue;
            }
            for k in 0..self.n_angles.max(1) {
                pts.push(Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / self.n_angles.max(1) as f64));
            }
        }
        pts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolydiscSeminorm {
    pub value: f64,
    pub argmax: Vec<Complex64>,
    pub points: usize,
}

/// `max_grid max_j |∂_j F(z)|(1 − |z_j|²)`, a lower bound for the supremum.
pub fn polydisc_bloch_seminorm(f: &PolydiscPolynomial, grid: &PolydiscGrid) -> PolydiscSeminorm {
    let d = f.dim();
    let pts = grid.points_per_coordinate();
    let derivs: Vec<PolydiscPolynomial> = (0..d).map(|j| f.partial_derivative(j)).collect();
    let mut best = PolydiscSeminorm { value: 0.0, argmax: vec![ZERO; d], points: 0 };
    let total = pts.len().pow(d as u32);
    let mut z = vec![ZERO; d];
    for pos in 0..total {
        let mut r = pos;
        for zi in z.iter_mut().rev() {
            *zi = pts[r % pts.len()];
            r /= pts.len();
        }
        for (j, dj) in derivs.iter().enumerate() {
            if dj.is_zero() {
                continue;
            }
            let v = dj.evaluate(&z).norm() * (1.0 - z[j].norm_sqr());
            if v > best.value {
                best.value = v;
                best.argmax = z.clone();
            }
        }
    }
    best.points = total;
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarsiaReport {
    /// Maximum over centers of the exact centered composed norm.
    pub value: f64,
    pub per_center: Vec<f64>,
    pub argmax: usize,
    /// Same maximum from the Taylor composition truncated at `degree_cap`.
    pub truncated_value: f64,
    /// Largest `A²` norm of a discarded Taylor tail.
    pub truncation_tail: f64,
    pub degree_cap: u32,
}

/// `max_a ‖F∘Φ_a − F(Φ_a(0))‖_{A²}` over the given automorphisms.
pub fn garsia_norm(f: &PolydiscPolynomial, centers: &[MobiusTuple], degree_cap: u32) -> Result<GarsiaReport> {
    if centers.is_empty() {
        return Err(Error::Precondition("garsia_norm needs at least one center".into()));
    }
    let mut per_center = Vec::with_capacity(centers.len());
    let mut truncated_value = 0.0f64;
    let mut truncation_tail = 0.0f64;
    for phi in centers {
        per_center.push(centered_composed_norm(f, phi)?);
        let comp = mobius_compose(f, phi, degree_cap)?;
        let mut centered = comp.poly.clone();
        centered.add_term(vec![0; f.dim()], -f.evaluate(&phi.image_of_origin()));
        truncated_value = truncated_value.max(bergman_norm_polydisc(&centered));
        truncation_tail = truncation_tail.max(comp.truncation_norm);
    }
    let (argmax, value) = per_center
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    Ok(GarsiaReport { value, per_center, argmax, truncated_value, truncation_tail, degree_cap })
}

/// Halton points in `(𝔻_radius)^d`, area-uniform in each coordinate. The
/// first point is the origin.
pub fn halton_centers(d: usize, count: usize, radius: f64) -> Vec<MobiusTuple> {
    let bases = crate::arith::first_primes(2 * d);
    (0..count)
        .map(|i| {
            let center = (0..d)
                .map(|j| {
                    let u = radical_inverse(i as u64, bases[2 * j]);
                    let v = radical_inverse(i as u64, bases[2 * j + 1]);
                    Complex64::from_polar(radius * u.sqrt(), std::f64::consts::TAU * v)
                })
                .collect();
            MobiusTuple::at(center).expect("radius < 1")
        })
        .collect()
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadicalityRow {
    pub center: usize,
    /// `‖F^m∘Φ − F^m(Φ(0))‖^{1/m}`.
    pub lhs: f64,
    /// `‖F^n∘Φ − F^n(Φ(0))‖^{1/n}`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadicalityReport {
    pub m: u32,
    pub n: u32,
    pub rows: Vec<RadicalityRow>,
    pub violations: Vec<usize>,
    /// Relative slack allowed for rounding.
    pub slack: f64,
}

/// Relative slack of the radicality comparison.
pub const RADICALITY_SLACK: f64 = 1e-9;

/// Both sides of `‖F^m∘Φ_a − F^m(a)‖^{1/m} ≤ ‖F^n∘Φ_a − F^n(a)‖^{1/n}` for
/// each center. `degree_cap` must admit `F^n`.
pub fn radicality_check(
    f: &PolydiscPolynomial,
    n: u32,
    m: u32,
    centers: &[MobiusTuple],
    degree_cap: u32,
) -> Result<RadicalityReport> {
    if !(1 <= m && m <= n) {
        return Err(Error::Precondition(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    check_cap(f, n, degree_cap)?;
    let fm = f.pow(m, None)?;
    let fnn = f.pow(n, None)?;
    let size = (n * f.max_degree()) as usize + 1;
    let mut rows = Vec::with_capacity(centers.len());
    for (i, phi) in centers.iter().enumerate() {
        let cg = CenterGram::new(phi, size);
        let lhs = cg.centered_norm(&fm)?.powf(1.0 / m as f64);
        let rhs = cg.centered_norm(&fnn)?.powf(1.0 / n as f64);
        rows.push(RadicalityRow { center: i, lhs, rhs });
    }
    Ok(finish(m, n, rows))
}

fn check_cap(f: &PolydiscPolynomial, n: u32, degree_cap: u32) -> Result<()> {
    if degree_cap < n * f.max_degree() {
        return Err(Error::Truncation(format!(
            "degree cap {degree_cap} below deg F^n = {}",
            n * f.max_degree()
        )));
    }
    Ok(())
}

fn finish(m: u32, n: u32, rows: Vec<RadicalityRow>) -> RadicalityReport {
    let violations = rows
        .iter()
        .filter(|r| r.lhs > r.rhs * (1.0 + RADICALITY_SLACK) + 1e-300)
        .map(|r| r.center)
        .collect();
    RadicalityReport { m, n, rows, violations, slack: RADICALITY_SLACK }
}

/// [`radicality_check`] for every pair `1 ≤ m < n ≤ n_max`, sharing the
/// powers of `F` and the Gram matrices of each center.
pub fn radicality_sweep(
    f: &PolydiscPolynomial,
    n_max: u32,
    centers: &[MobiusTuple],
    degree_cap: u32,
) -> Result<Vec<RadicalityReport>> {
    if n_max < 2 {
        return Err(Error::Precondition(format!("need n_max >= 2, got {n_max}")));
    }
    check_cap(f, n_max, degree_cap)?;
    let mut powers = vec![f.clone()];
    for _ in 1..n_max {
        let next = powers.last().expect("nonempty").mul(f, None)?;
        powers.push(next);
    }
    let size = (n_max * f.max_degree()) as usize + 1;
    // roots[c][k-1] = ‖F^k∘Φ_c − F^k(Φ_c(0))‖^{1/k}
    let roots = centers
        .iter()
        .map(|phi| {
            let cg = CenterGram::new(phi, size);
            powers
                .iter()
                .enumerate()
                .map(|(k, p)| Ok(cg.centered_norm(p)?.powf(1.0 / (k + 1) as f64)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for n in 2..=n_max {
        for m in 1..n {
            let rows = roots
                .iter()
                .enumerate()
                .map(|(i, r)| RadicalityRow { center: i, lhs: r[m as usize - 1], rhs: r[n as usize - 1] })
                .collect();
            out.push(finish(m, n, rows));
        }
    }
    Ok(out)
}
