//! Truncated Dirichlet series `Σ_{n≤N} a_n n^{-s}`, characters and the Bohr lift.
//!
//! Coefficients are stored densely unless fewer than 1% of the indices up to
//! the truncation carry a nonzero value, in which case an ordered sparse map
//! is used. Both layouts behave identically through the public API.
//!
//! A series may carry a [`LogPowerTail`] describing the coefficients beyond
//! the truncation in closed form. Only [`DirichletSeries::evaluate`],
//! [`DirichletSeries::translate`], [`DirichletSeries::derivative`] and scaling
//! keep it; every other operation truncates silently, by contract.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::arith::{first_primes, smooth_exponents, Sieve};
use crate::error::{Error, Result};
use crate::zeta::log_power_sum;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Closed-form coefficients `c (ln n)^κ n^{-τ}` for every `n` past the truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPowerTail {
    pub coefficient: Complex64,
    pub log_power: f64,
    pub decay: f64,
}

impl LogPowerTail {
    pub fn coefficient_at(&self, n: u64) -> Complex64 {
        let u = (n as f64).ln();
        self.coefficient * u.powf(self.log_power) * (-self.decay * u).exp()
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<Complex64>),
    Sparse(BTreeMap<u64, Complex64>),
}

#[derive(Debug, Clone)]
pub struct DirichletSeries {
    truncation: u64,
    storage: Storage,
    tail: Option<LogPowerTail>,
}

impl PartialEq for DirichletSeries {
    fn eq(&self, other: &Self) -> bool {
        self.truncation == other.truncation && self.tail == other.tail && self.terms() == other.terms()
    }
}

/// Partial sum together with an estimate of the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Fraction of nonzero indices below which the sparse layout is chosen.
pub const SPARSE_DENSITY: f64 = 0.01;

impl DirichletSeries {
    fn from_storage(truncation: u64, storage: Storage) -> Self {
        let mut s = Self { truncation: truncation.max(1), storage, tail: None };
        s.relayout();
        s
    }

    fn relayout(&mut self) {
        let nnz = self.nnz() as f64;
        let want_sparse = nnz < SPARSE_DENSITY * self.truncation as f64;
        match (&self.storage, want_sparse) {
            (Storage::Dense(v), true) => {
                let map = v
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != ZERO)
                    .map(|(i, c)| (i as u64 + 1, *c))
                    .collect();
                self.storage = Storage::Sparse(map);
            }
            (Storage::Sparse(m), false) => {
                let mut v = vec![ZERO; self.truncation as usize];
                for (&n, &c) in m {
                    v[n as usize - 1] = c;
                }
                self.storage = Storage::Dense(v);
            }
            _ => {}
        }
    }

    /// Series with coefficients `a_1..a_N` taken from `coeffs[0..N]`.
    pub fn from_coefficients(coeffs: Vec<Complex64>) -> Self {
        let n = coeffs.len().max(1) as u64;
        let mut coeffs = coeffs;
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self::from_storage(n, Storage::Dense(coeffs))
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::from_coefficients(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Series of truncation `truncation` with the given `(n, a_n)` pairs.
    /// Repeated indices are summed.
    pub fn from_terms<I>(truncation: u64, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (n, c) in terms {
            if n == 0 || n > truncation {
                return Err(Error::Range(format!("index {n} outside 1..={truncation}")));
            }
            *map.entry(n).or_insert(ZERO) += c;
        }
        map.retain(|_, c| *c != ZERO);
        Ok(Self::from_storage(truncation, Storage::Sparse(map)))
    }

    pub fn zero(truncation: u64) -> Self {
        Self::from_storage(truncation, Storage::Sparse(BTreeMap::new()))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_coefficients(vec![c])
    }

    /// `e_k = k^{-s}` truncated at `k`.
    pub fn monomial(k: u64) -> Self {
        Self::from_storage(k, Storage::Sparse(BTreeMap::from([(k, ONE)])))
    }

    /// `Σ_{n≤N} n^{-s}`.
    pub fn zeta_truncation(truncation: u64) -> Self {
        Self::from_coefficients(vec![ONE; truncation as usize])
    }

    pub fn with_tail(mut self, tail: LogPowerTail) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn without_tail(mut self) -> Self {
        self.tail = None;
        self
    }

    pub fn tail(&self) -> Option<&LogPowerTail> {
        self.tail.as_ref()
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.iter().filter(|c| **c != ZERO).count(),
            Storage::Sparse(m) => m.len(),
        }
    }

    /// `a_n`; zero beyond the truncation (the tail is not consulted).
    pub fn coefficient(&self, n: u64) -> Complex64 {
        if n == 0 || n > self.truncation {
            return ZERO;
        }
        match &self.storage {
            Storage::Dense(v) => v[n as usize - 1],
            Storage::Sparse(m) => m.get(&n).copied().unwrap_or(ZERO),
        }
    }

    /// Nonzero `(n, a_n)` pairs in increasing `n`.
    pub fn terms(&self) -> Vec<(u64, Complex64)> {
        let mut out = Vec::new();
        self.for_each_term(|n, c| out.push((n, c)));
        out
    }

    /// Calls `f(n, a_n)` for every nonzero coefficient in increasing `n`.
    pub fn for_each_term<F: FnMut(u64, Complex64)>(&self, mut f: F) {
        match &self.storage {
            Storage::Dense(v) => {
                for (i, c) in v.iter().enumerate() {
                    if *c != ZERO {
                        f(i as u64 + 1, *c);
                    }
                }
            }
            Storage::Sparse(m) => {
                for (&n, &c) in m {
                    f(n, c);
                }
            }
        }
    }

    /// Calls `f(n, a_n)` for nonzero coefficients with `lo <= n <= hi`.
    pub fn for_each_term_in<F: FnMut(u64, Complex64)>(&self, lo: u64, hi: u64, mut f: F) {
        let lo = lo.max(1);
        let hi = hi.min(self.truncation);
        if lo > hi {
            return;
        }
        match &self.storage {
            Storage::Dense(v) => {
                for n in lo..=hi {
                    let c = v[n as usize - 1];
                    if c != ZERO {
                        f(n, c);
                    }
                }
            }
            Storage::Sparse(m) => {
                for (&n, &c) in m.range(lo..=hi) {
                    f(n, c);
                }
            }
        }
    }

    /// Dense coefficient vector `a_1..a_N`.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.truncation as usize];
        self.for_each_term(|n, c| v[n as usize - 1] = c);
        v
    }

    /// `a_1 = f(+∞)`.
    pub fn constant_term(&self) -> Complex64 {
        self.coefficient(1)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        let mut m = 0.0f64;
        self.for_each_term(|_, c| m = m.max(c.norm()));
        m
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0 && self.tail.is_none()
    }

    /// Coefficient-wise map; `f(n, a_n)` sees nonzero coefficients only.
    pub fn map_terms<F: FnMut(u64, Complex64) -> Complex64>(&self, mut f: F) -> Self {
        let storage = match &self.storage {
            Storage::Dense(v) => Storage::Dense(
                v.iter()
                    .enumerate()
                    .map(|(i, c)| if *c == ZERO { ZERO } else { f(i as u64 + 1, *c) })
                    .collect(),
            ),
            Storage::Sparse(m) => Storage::Sparse(
                m.iter()
                    .map(|(&n, &c)| (n, f(n, c)))
                    .filter(|(_, c)| *c != ZERO)
                    .collect(),
            ),
        };
        Self::from_storage(self.truncation, storage)
    }

    /// Same coefficients with truncation `n`; the tail is dropped.
    pub fn truncate(&self, n: u64) -> Self {
        let n = n.max(1);
        match &self.storage {
            Storage::Dense(v) => {
                let mut w: Vec<Complex64> = v.iter().take(n as usize).copied().collect();
                w.resize(n as usize, ZERO);
                Self::from_storage(n, Storage::Dense(w))
            }
            Storage::Sparse(m) => {
                Self::from_storage(n, Storage::Sparse(m.range(..=n).map(|(&k, &c)| (k, c)).collect()))
            }
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.map_terms(|_, a| a * c);
        out.tail = self.tail.map(|t| LogPowerTail { coefficient: t.coefficient * c, ..t });
        out
    }

    /// `self + c·other` with truncation the larger of the two; tails dropped.
    pub fn add_scaled(&self, other: &Self, c: Complex64) -> Self {
        let n = self.truncation.max(other.truncation);
        if !self.is_sparse() || !other.is_sparse() {
            let mut v = vec![ZERO; n as usize];
            self.for_each_term(|k, a| v[k as usize - 1] += a);
            other.for_each_term(|k, b| v[k as usize - 1] += c * b);
            return Self::from_storage(n, Storage::Dense(v));
        }
        let mut map = BTreeMap::new();
        self.for_each_term(|k, a| {
            map.insert(k, a);
        });
        other.for_each_term(|k, b| *map.entry(k).or_insert(ZERO) += c * b);
        map.retain(|_, a| *a != ZERO);
        Self::from_storage(n, Storage::Sparse(map))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, ONE)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, -ONE)
    }

    /// Dirichlet convolution `c_k = Σ_{mn=k} a_m b_n` for `k ≤ n_out`.
    pub fn multiply(&self, other: &Self, n_out: u64) -> Self {
        let n_out = n_out.max(1);
        let a = self.terms();
        let b = other.terms();
        let dense_out = (a.len() as f64) * (b.len() as f64) >= SPARSE_DENSITY * n_out as f64;
        if dense_out {
            let mut v = vec![ZERO; n_out as usize];
            for &(m, am) in &a {
                if m > n_out {
                    break;
                }
                let lim = n_out / m;
                for &(n, bn) in &b {
                    if n > lim {
                        break;
                    }
                    v[(m * n) as usize - 1] += am * bn;
                }
            }
            Self::from_storage(n_out, Storage::Dense(v))
        } else {
            let mut map = BTreeMap::new();
            for &(m, am) in &a {
                if m > n_out {
                    break;
                }
                let lim = n_out / m;
                for &(n, bn) in &b {
                    if n > lim {
                        break;
                    }
                    *map.entry(m * n).or_insert(ZERO) += am * bn;
                }
            }
            map.retain(|_, c| *c != ZERO);
            Self::from_storage(n_out, Storage::Sparse(map))
        }
    }

    /// Coefficient-wise convolution through divisor enumeration on a
    /// smallest-prime-factor sieve. Same result as [`Self::multiply`] on dense
    /// inputs; kept as an independent route for testing.
    pub fn multiply_by_divisors(&self, other: &Self, n_out: u64) -> Self {
        let sieve = Sieve::shared(n_out as usize);
        let mut v = vec![ZERO; n_out as usize];
        for k in 1..=n_out {
            let mut acc = ZERO;
            for d in sieve.divisors(k as usize) {
                acc += self.coefficient(d as u64) * other.coefficient(k / d as u64);
            }
            v[k as usize - 1] = acc;
        }
        Self::from_storage(n_out, Storage::Dense(v))
    }

    /// `f_σ(s) = f(σ + s)`: `a_n ↦ a_n n^{-σ}`.
    pub fn translate(&self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::Domain(format!("translation by σ = {sigma} < 0")));
        }
        let mut out = self.map_terms(|n, a| a * (n as f64).powf(-sigma));
        out.tail = self.tail.map(|t| LogPowerTail { decay: t.decay + sigma, ..t });
        Ok(out)
    }

    /// `f′`: `a_n ↦ -a_n ln n`.
    pub fn derivative(&self) -> Self {
        let mut out = self.map_terms(|n, a| -a * (n as f64).ln());
        out.tail = self.tail.map(|t| LogPowerTail {
            coefficient: -t.coefficient,
            log_power: t.log_power + 1.0,
            ..t
        });
        out
    }

    /// `Σ_{n≤N} a_n n^{-s}`; see [`Self::evaluate_with_growth`] for the tail.
    pub fn evaluate(&self, s: Complex64) -> Evaluation {
        self.evaluate_with_growth(s, self.max_abs_coefficient(), 0.0)
    }

    /// Partial sum plus tail handling. With a closed-form tail the tail value
    /// is added by Euler–Maclaurin summation and `tail_bound` is its
    /// remainder estimate. Otherwise `|a_n| ≤ C n^δ` is assumed past the
    /// truncation and `tail_bound ≥ Σ_{n>N} C n^{δ-Re s}` (infinite when the
    /// bound diverges).
    pub fn evaluate_with_growth(&self, s: Complex64, c: f64, delta: f64) -> Evaluation {
        let mut value = ZERO;
        self.for_each_term(|n, a| {
            let l = (n as f64).ln();
            value += a * (-s * l).exp();
        });
        if let Some(t) = &self.tail {
            return match log_power_sum(t.log_power, s + t.decay, self.truncation + 1) {
                Ok(ts) => Evaluation {
                    value: value + t.coefficient * ts.value,
                    tail_bound: t.coefficient.norm() * ts.error_estimate,
                },
                Err(_) => Evaluation { value, tail_bound: f64::INFINITY },
            };
        }
        let excess = s.re - 1.0 - delta;
        let tail_bound = if c == 0.0 {
            0.0
        } else if excess > 0.0 {
            c * (self.truncation as f64).powf(-excess) / excess
        } else {
            f64::INFINITY
        };
        Evaluation { value, tail_bound }
    }

    /// `Σ |a_n| n^{-σ}`, the triangle-inequality majorant of `|f(σ + it)|`.
    pub fn abs_sum(&self, sigma: f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_term(|n, a| acc += a.norm() * (n as f64).powf(-sigma));
        acc
    }

    /// `f_χ`: `a_n ↦ a_n χ(n)`.
    pub fn twist(&self, chi: &Character) -> Result<Self> {
        let mut err = None;
        let out = self.map_terms(|n, a| match chi.value_at(n) {
            Ok(v) => a * v,
            Err(e) => {
                err.get_or_insert(e);
                ZERO
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// Power series in `z_j = p_j^{-s}` over the first `d` primes.
    pub fn bohr_lift(&self, d: usize) -> Result<PolydiscPolynomial> {
        let primes = first_primes(d);
        let mut terms = BTreeMap::new();
        let mut offending = Vec::new();
        self.for_each_term(|n, a| match smooth_exponents(n, &primes) {
            Some(alpha) => {
                terms.insert(alpha, a);
            }
            None => offending.push(n),
        });
        if !offending.is_empty() {
            return Err(Error::NotSmooth { d, offending });
        }
        Ok(PolydiscPolynomial { dim: d, terms })
    }

    /// Whether every nonzero coefficient sits at a `d`-smooth index.
    pub fn is_smooth(&self, d: usize) -> bool {
        let primes = first_primes(d);
        let mut ok = true;
        self.for_each_term(|n, _| ok &= smooth_exponents(n, &primes).is_some());
        ok
    }

    /// CSV with header `n,re,im`, one row per nonzero coefficient, plus a
    /// row for the truncation index so that it round-trips.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "re", "im"])?;
        let mut last_written = 0;
        for (n, c) in self.terms() {
            wr.write_record([n.to_string(), fmt_f64(c.re), fmt_f64(c.im)])?;
            last_written = n;
        }
        if last_written != self.truncation {
            wr.write_record([self.truncation.to_string(), fmt_f64(0.0), fmt_f64(0.0)])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["n", "re", "im"] {
            return Err(Error::Parse(format!("expected header n,re,im, got {headers:?}")));
        }
        let mut terms = Vec::new();
        let mut truncation = 1;
        for rec in rd.records() {
            let rec = rec?;
            let n: u64 = parse_field(&rec, 0)?;
            let re: f64 = parse_field(&rec, 1)?;
            let im: f64 = parse_field(&rec, 2)?;
            if n == 0 {
                return Err(Error::Parse("index 0 in series CSV".into()));
            }
            truncation = truncation.max(n);
            terms.push((n, Complex64::new(re, im)));
        }
        Self::from_terms(truncation, terms)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        crate::cache::atomic_write(path, &buf)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let s = rec.get(i).ok_or_else(|| Error::Parse(format!("missing column {i}")))?;
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse {s:?} in column {i}")))
}

/// A completely multiplicative unimodular function given by its values at the
/// first `P` primes.
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    primes: Vec<u64>,
    values: Vec<Complex64>,
}

impl Character {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        for (j, v) in values.iter().enumerate() {
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Precondition(format!("|χ(p_{})| = {} ≠ 1", j + 1, v.norm())));
            }
        }
        Ok(Self { primes: first_primes(values.len()), values })
    }

    /// `χ(p_j) = e^{2πi θ_j}`.
    pub fn from_angles(thetas: &[f64]) -> Self {
        let values = thetas
            .iter()
            .map(|t| Complex64::from_polar(1.0, std::f64::consts::TAU * t))
            .collect();
        Self { primes: first_primes(thetas.len()), values }
    }

    pub fn trivial(p: usize) -> Self {
        Self { primes: first_primes(p), values: vec![ONE; p] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn prime_values(&self) -> &[Complex64] {
        &self.values
    }

    /// `χ(n)`; errors when `n` has a prime factor beyond `p_P`.
    pub fn value_at(&self, n: u64) -> Result<Complex64> {
        let mut m = n;
        let mut v = ONE;
        for (p, chi) in self.primes.iter().zip(&self.values) {
            while m % p == 0 {
                m /= p;
                v *= chi;
            }
            if m == 1 {
                return Ok(v);
            }
        }
        if m == 1 {
            return Ok(v);
        }
        let mut q = 2;
        while q * q <= m && m % q != 0 {
            q += 1;
        }
        let prime = if q * q <= m { q } else { m };
        Err(Error::CharacterTooShort { needed: n, prime, available: self.values.len() })
    }
}

/// Finite power series `Σ c_α z^α` on the polydisc `𝔻^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolydiscPolynomial {
    pub(crate) dim: usize,
    pub(crate) terms: BTreeMap<Vec<u32>, Complex64>,
}

impl PolydiscPolynomial {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn monomial(alpha: Vec<u32>, c: Complex64) -> Self {
        let mut p = Self::zero(alpha.len());
        p.add_term(alpha, c);
        p
    }

    /// `z_j` (0-based `j`).
    pub fn coordinate(dim: usize, j: usize) -> Self {
        let mut alpha = vec![0; dim];
        alpha[j] = 1;
        Self::monomial(alpha, ONE)
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, Complex64)>>(dim: usize, terms: I) -> Result<Self> {
        let mut p = Self::zero(dim);
        for (alpha, c) in terms {
            if alpha.len() != dim {
                return Err(Error::Precondition(format!(
                    "multi-index of length {} in dimension {dim}",
                    alpha.len()
                )));
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    pub fn add_term(&mut self, alpha: Vec<u32>, c: Complex64) {
        debug_assert_eq!(alpha.len(), self.dim);
        let v = self.coefficient(&alpha) + c;
        if v == ZERO {
            self.terms.remove(&alpha);
        } else {
            self.terms.insert(alpha, v);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Complex64> {
        &self.terms
    }

    pub fn coefficient(&self, alpha: &[u32]) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest exponent of any single variable.
    pub fn max_degree(&self) -> u32 {
        self.terms.keys().flat_map(|a| a.iter().copied()).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|a| a.iter().sum()).max().unwrap_or(0)
    }

    /// `F(z)` for `z ∈ ℂ^d`.
    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(alpha, c)| {
                alpha
                    .iter()
                    .zip(z)
                    .fold(*c, |acc, (&e, zj)| acc * zj.powu(e))
            })
            .sum()
    }

    /// `F(e^{2πiθ_1}, ..., e^{2πiθ_d})`.
    pub fn evaluate_on_torus(&self, theta: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(alpha, c)| {
                let phase: f64 = alpha.iter().zip(theta).map(|(&e, t)| e as f64 * t).sum();
                c * Complex64::from_polar(1.0, std::f64::consts::TAU * phase.fract())
            })
            .sum()
    }

    /// Dirichlet series with `a_n = c_α` for `n = Π p_j^{α_j}`.
    pub fn inverse_bohr_lift(&self) -> Result<DirichletSeries> {
        let primes = first_primes(self.dim);
        let mut pairs = Vec::with_capacity(self.terms.len());
        let mut n_max = 1;
        for (alpha, &c) in &self.terms {
            let mut n: u64 = 1;
            for (p, &e) in primes.iter().zip(alpha) {
                n = p
                    .checked_pow(e)
                    .and_then(|q| n.checked_mul(q))
                    .ok_or_else(|| Error::Range(format!("index of {alpha:?} overflows u64")))?;
            }
            n_max = n_max.max(n);
            pairs.push((n, c));
        }
        DirichletSeries::from_terms(n_max, pairs)
    }

    /// CSV with header `a1..ad,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.dim).map(|j| format!("a{j}")).collect();
        header.push("re".into());
        header.push("im".into());
        wr.write_record(&header)?;
        for (alpha, c) in &self.terms {
            let mut row: Vec<String> = alpha.iter().map(|e| e.to_string()).collect();
            row.push(fmt_f64(c.re));
            row.push(fmt_f64(c.im));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers()?.clone();
        let cols = headers.len();
        if cols < 2 || &headers[cols - 2] != "re" || &headers[cols - 1] != "im" {
            return Err(Error::Parse(format!("expected header a1..ad,re,im, got {headers:?}")));
        }
        let dim = cols - 2;
        let mut p = Self::zero(dim);
        for rec in rd.records() {
            let rec = rec?;
            let alpha = (0..dim).map(|j| parse_field::<u32>(&rec, j)).collect::<Result<Vec<_>>>()?;
            let c = Complex64::new(parse_field(&rec, dim)?, parse_field(&rec, dim + 1)?);
            p.add_term(alpha, c);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn products_of_monomials() {
        let p = DirichletSeries::monomial(2).multiply(&DirichletSeries::monomial(3), 10);
        assert_eq!(p.terms(), vec![(6, c(1.0))]);
        let s4 = DirichletSeries::zeta_truncation(4);
        let sq = s4.multiply(&s4, 4);
        assert_eq!(sq.coefficient(4), c(3.0));
        let f = DirichletSeries::from_real(&[0.5, -1.0, 2.0]);
        assert_eq!(f.multiply(&DirichletSeries::constant(c(1.0)), 3), f);
    }

    #[test]
    fn two_convolution_routes_agree() {
        let f = DirichletSeries::from_coefficients((1..=60).map(|n| Complex64::new(n as f64, 1.0 / n as f64)).collect());
        let g = DirichletSeries::from_coefficients((1..=40).map(|n| Complex64::new(1.0, -(n as f64))).collect());
        let a = f.multiply(&g, 100).to_dense();
        let b = f.multiply_by_divisors(&g, 100).to_dense();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn translate_and_derivative() {
        let e2 = DirichletSeries::monomial(2);
        assert_eq!(e2.translate(1.0).unwrap().coefficient(2), c(0.5));
        assert!(e2.translate(-0.1).is_err());
        assert_eq!(e2.derivative().coefficient(2), c(-(2f64).ln()));
        assert!(DirichletSeries::constant(c(3.0)).derivative().is_zero());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = DirichletSeries::from_coefficients((1..=30).map(|n| Complex64::new((n as f64).sin(), (n as f64).cos())).collect());
        let s = Complex64::new(2.0, 0.3);
        let h = 1e-5;
        let fd = (f.evaluate(s + h).value - f.evaluate(s - h).value) / (2.0 * h);
        assert!((f.derivative().evaluate(s).value - fd).norm() < 1e-6);
    }

    #[test]
    fn basel_and_tail_bound() {
        let z = DirichletSeries::zeta_truncation(1_000_000);
        let e = z.evaluate(c(2.0));
        let exact = std::f64::consts::PI.powi(2) / 6.0;
        assert!((e.value.re - exact).abs() < 1e-6);
        assert!((e.tail_bound - 1e-6).abs() < 1e-12);
        assert!(exact - e.value.re <= e.tail_bound);
        assert_eq!(DirichletSeries::monomial(2).evaluate(c(1.0)).value, c(0.5));
    }

    #[test]
    fn closed_form_tail_recovers_zeta() {
        let tail = LogPowerTail { coefficient: c(1.0), log_power: 0.0, decay: 0.0 };
        let z = DirichletSeries::zeta_truncation(100).with_tail(tail);
        let v = z.evaluate(c(2.0)).value.re;
        assert!((v - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
        // derivative of the full series is -ζ'
        let d = z.derivative().evaluate(c(2.0)).value.re;
        assert!((d + 0.937_548_254_315_843_8).abs() < 1e-12);
        let t = z.translate(1.0).unwrap().evaluate(c(1.0)).value.re;
        assert!((t - v).abs() < 1e-14);
    }

    #[test]
    fn characters() {
        let chi = Character::new(vec![c(-1.0)]).unwrap();
        assert_eq!(DirichletSeries::monomial(2).twist(&chi).unwrap().coefficient(2), c(-1.0));
        let chi = Character::from_angles(&[0.1, 0.37, 0.8]);
        let v6 = chi.value_at(6).unwrap();
        assert!((v6 - chi.value_at(2).unwrap() * chi.value_at(3).unwrap()).norm() < 1e-15);
        match chi.value_at(14) {
            Err(Error::CharacterTooShort { needed: 14, prime: 7, available: 3 }) => {}
            other => panic!("{other:?}"),
        }
        assert!(Character::new(vec![c(2.0)]).is_err());
        let f = DirichletSeries::from_real(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.twist(&Character::trivial(2)).unwrap(), f);
    }

    #[test]
    fn bohr_lift_examples() {
        let p = DirichletSeries::monomial(6).bohr_lift(2).unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.coefficient(&[1, 1]), c(1.0));
        match DirichletSeries::monomial(5).bohr_lift(2) {
            Err(Error::NotSmooth { d: 2, offending }) => assert_eq!(offending, vec![5]),
            other => panic!("{other:?}"),
        }
        assert_eq!(p.inverse_bohr_lift().unwrap(), DirichletSeries::monomial(6));
    }

    #[test]
    fn sparse_layout_selected_automatically() {
        let s = DirichletSeries::from_terms(1 << 32, [(2, c(1.0)), (65537, c(1.0))]).unwrap();
        assert!(s.is_sparse());
        assert_eq!(s.truncation(), 1 << 32);
        let d = DirichletSeries::from_real(&[1.0, 1.0]);
        assert!(!d.is_sparse());
        let big = DirichletSeries::monomial(1000);
        assert!(big.is_sparse());
        assert_eq!(big.to_dense().len(), 1000);
    }

    #[test]
    fn csv_round_trip() {
        let f = DirichletSeries::from_terms(10, [(1, Complex64::new(0.1, -0.2)), (7, c(1.0 / 3.0))]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,re,im\n"));
        assert_eq!(DirichletSeries::read_csv(&buf[..]).unwrap(), f);

        let p = f.bohr_lift(4).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("a1,a2,a3,a4,re,im\n"));
        assert_eq!(PolydiscPolynomial::read_csv(&buf[..]).unwrap(), p);
        assert!(DirichletSeries::read_csv("k,x\n1,2\n".as_bytes()).is_err());
    }
}
