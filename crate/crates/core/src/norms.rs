//! Norms and seminorms of Dirichlet series: `ℋ²`, `𝒜²_μ`, sampled `ℋᵖ`,
//! Bloch-type strip seminorms, block-sum membership tests and the norms of
//! point-evaluation functionals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cache;
use crate::dirichlet::DirichletSeries;
use crate::error::{Error, Result};
use crate::measures::AdmissibleMeasure;
use crate::quadrature::QuadratureConfig;
use crate::sampling::{torus_mean, TorusEstimate, TorusRule};
use crate::zeta::{zeta, zeta_second_derivative};

/// Sample points of the strip `0 < σ ≤ 1, |t| ≤ T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripGrid {
    pub sigma_points: Vec<f64>,
    pub t_points: Vec<f64>,
}

impl Default for StripGrid {
    fn default() -> Self {
        Self::new(2f64.powi(-20), 200, 50.0, 401).expect("default grid is valid")
    }
}

impl StripGrid {
    /// `n_sigma` geometric points in `[sigma_min, 1]` and `n_t` uniform points in `[-t_max, t_max]`.
    pub fn new(sigma_min: f64, n_sigma: usize, t_max: f64, n_t: usize) -> Result<Self> {
        if !(sigma_min > 0.0 && sigma_min <= 1.0) || n_sigma == 0 || n_t == 0 || !(t_max >= 0.0) {
            return Err(Error::Precondition(format!(
                "invalid strip grid: sigma_min={sigma_min}, n_sigma={n_sigma}, t_max={t_max}, n_t={n_t}"
            )));
        }
        let sigma_points = if n_sigma == 1 {
            vec![1.0]
        } else {
            let r = sigma_min.ln();
            (0..n_sigma)
                .map(|i| (r * (1.0 - i as f64 / (n_sigma - 1) as f64)).exp())
                .collect()
        };
        let t_points = if n_t == 1 {
            vec![0.0]
        } else {
            (0..n_t)
                .map(|i| -t_max + 2.0 * t_max * i as f64 / (n_t - 1) as f64)
                .collect()
        };
        Ok(Self { sigma_points, t_points })
    }

    /// Explicit σ values with `t = 0` only.
    pub fn sigmas_only(mut sigma_points: Vec<f64>) -> Result<Self> {
        if sigma_points.is_empty() || sigma_points.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
            return Err(Error::Precondition("σ points must lie in (0, 1]".into()));
        }
        sigma_points.sort_by(f64::total_cmp);
        Ok(Self { sigma_points, t_points: vec![0.0] })
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_points[0]
    }

    pub fn t_max(&self) -> f64 {
        self.t_points.iter().fold(0.0f64, |m, t| m.max(t.abs()))
    }
}

/// Weight `ω(σ)` of a Bloch-type seminorm `sup ω(σ)|f′(σ+it)|`.
#[derive(Debug, Clone, PartialEq)]
pub enum BlochWeight {
    /// `ω(σ) = σ`.
    Classical,
    /// `ω = sqrt(β_μ/h)`.
    MuDerived(AdmissibleMeasure),
    /// `ω(σ) = σ(1 + ln(1/σ))`.
    LogCorrected,
    /// `ω(σ) = σ^δ`.
    PowerLaw(f64),
}

impl BlochWeight {
    pub fn name(&self) -> String {
        match self {
            Self::Classical => "classical".into(),
            Self::MuDerived(m) => format!("mu_derived:{}", m.spec().family_name()),
            Self::LogCorrected => "log_corrected".into(),
            Self::PowerLaw(d) => format!("power_law:{d}"),
        }
    }

    pub fn value(&self, sigma: f64, q: &QuadratureConfig) -> Result<f64> {
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::Domain(format!("Bloch weight needs 0 < σ <= 1, got {sigma}")));
        }
        match self {
            Self::Classical => Ok(sigma),
            Self::MuDerived(m) => m.omega(sigma, q),
            Self::LogCorrected => Ok(sigma * (1.0 - sigma.ln())),
            Self::PowerLaw(d) => {
                if !(*d > 0.0) {
                    return Err(Error::Precondition(format!("power-law exponent must be > 0, got {d}")));
                }
                Ok(sigma.powf(*d))
            }
        }
    }
}

/// Uniform JSON record for norm quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub quantity: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub metadata: serde_json::Value,
}

/// `sqrt(Σ |a_n|²)`.
pub fn h2_norm(f: &DirichletSeries) -> f64 {
    let mut acc = 0.0;
    f.for_each_term(|_, a| acc += a.norm_sqr());
    acc.sqrt()
}

/// `Σ |a_n|² w_n` with `weights[n-1] = w_n`.
pub fn a2mu_norm_sq_with_weights(f: &DirichletSeries, weights: &[f64]) -> Result<f64> {
    let n_max = f.terms().last().map(|t| t.0).unwrap_or(0);
    if n_max as usize > weights.len() {
        return Err(Error::Range(format!(
            "weight table of length {} too short for index {n_max}",
            weights.len()
        )));
    }
    let mut acc = 0.0;
    f.for_each_term(|n, a| acc += a.norm_sqr() * weights[n as usize - 1]);
    Ok(acc)
}

/// `Σ |a_n|² w_n(μ)`. Dense series use the cached weight table; sparse
/// series evaluate the weights of their nonzero indices only.
pub fn a2mu_norm_sq(f: &DirichletSeries, mu: &AdmissibleMeasure) -> Result<f64> {
    let q = QuadratureConfig::default();
    let n_max = f.terms().last().map(|t| t.0).unwrap_or(1);
    if n_max == 1 {
        return Ok(f.constant_term().norm_sqr());
    }
    if f.is_sparse() {
        let rule = mu.weight_rule(n_max, &q)?;
        let mut acc = 0.0;
        f.for_each_term(|n, a| acc += a.norm_sqr() * rule.weight(n));
        Ok(acc)
    } else {
        let w = cache::weight_table(mu, n_max as usize, &q)?;
        a2mu_norm_sq_with_weights(f, &w)
    }
}

/// `‖f‖_{𝒜²_μ} = sqrt(Σ |a_n|² w_n)`.
pub fn a2mu_norm(f: &DirichletSeries, mu: &AdmissibleMeasure) -> Result<f64> {
    a2mu_norm_sq(f, mu).map(f64::sqrt)
}

/// `sqrt(∫ ‖f_σ‖²_{ℋ²} dμ(σ))` by quadrature in σ.
pub fn a2mu_norm_integral(f: &DirichletSeries, mu: &AdmissibleMeasure, q: &QuadratureConfig) -> Result<f64> {
    let terms: Vec<(f64, f64)> = f.terms().iter().map(|(n, a)| (2.0 * (*n as f64).ln(), a.norm_sqr())).collect();
    let total: f64 = terms.iter().map(|t| t.1).sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let v = mu.integrate(
        |s| terms.iter().map(|(lam, c)| c * (-lam * s).exp()).sum(),
        0.0,
        f64::INFINITY,
        total,
        q,
    )?;
    Ok(v.max(0.0).sqrt())
}

/// Sampled `ℋᵖ` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// `(∫_{T^d} |ℬf|^p dm_d)^{1/p}` by seeded Monte Carlo.
pub fn hp_norm_mc(f: &DirichletSeries, p: f64, d: usize, n_samples: usize, seed: u64) -> Result<HpEstimate> {
    hp_norm_with_rule(f, p, d, n_samples, seed, TorusRule::MonteCarlo)
}

/// As [`hp_norm_mc`] with a chosen torus rule.
pub fn hp_norm_with_rule(
    f: &DirichletSeries,
    p: f64,
    d: usize,
    n_samples: usize,
    seed: u64,
    rule: TorusRule,
) -> Result<HpEstimate> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!("ℋᵖ needs p >= 1, got {p}")));
    }
    let lift = f.bohr_lift(d)?;
    let TorusEstimate { mean, std_error, samples } =
        torus_mean(d, n_samples, seed, rule, |theta| lift.evaluate_on_torus(theta).norm().powf(p));
    let estimate = mean.max(0.0).powf(1.0 / p);
    // delta method for m ↦ m^{1/p}
    let se = if mean > 0.0 { std_error * mean.powf(1.0 / p - 1.0) / p } else { 0.0 };
    Ok(HpEstimate { estimate, std_error: se, samples, seed })
}

/// Grid estimate of a Bloch-type seminorm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormEstimate {
    pub value: f64,
    pub argmax_sigma: f64,
    pub argmax_t: f64,
    /// Only `t = 0` was evaluated because all coefficients share one phase.
    pub fast_path: bool,
    pub sigma_min: f64,
    pub n_sigma: usize,
    pub t_max: f64,
    pub n_t: usize,
    /// σ points dropped because `ω` is undefined there (zero density).
    pub skipped_sigmas: Vec<f64>,
}

/// Whether all nonzero coefficients (and the tail) share one argument.
pub fn has_common_phase(f: &DirichletSeries) -> bool {
    let mut phase: Option<Complex64> = None;
    let mut ok = true;
    let mut check = |c: Complex64| {
        if c.norm() == 0.0 {
            return;
        }
        let u = c / c.norm();
        match phase {
            None => phase = Some(u),
            Some(p) => ok &= (u - p).norm() < 1e-12,
        }
    };
    f.for_each_term(|_, c| check(c));
    if let Some(t) = f.tail() {
        check(t.coefficient);
    }
    ok
}

/// `(σ, max_t ω(σ)|f′(σ+it)|)` for each σ of the grid.
pub fn bloch_profile(
    f: &DirichletSeries,
    omega: &BlochWeight,
    grid: &StripGrid,
    q: &QuadratureConfig,
) -> Result<(Vec<(f64, f64, f64)>, bool, Vec<f64>)> {
    let df = f.derivative();
    let fast = has_common_phase(&df);
    let ts: &[f64] = if fast { &[0.0] } else { &grid.t_points };
    let mut rows = Vec::with_capacity(grid.sigma_points.len());
    let mut skipped = Vec::new();
    for &s in &grid.sigma_points {
        let w = match omega.value(s, q) {
            Ok(w) => w,
            Err(Error::DegenerateDensity { .. }) => {
                skipped.push(s);
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut best = (0.0, 0.0);
        for &t in ts {
            let v = w * df.evaluate(Complex64::new(s, t)).value.norm();
            if v > best.0 {
                best = (v, t);
            }
        }
        rows.push((s, best.1, best.0));
    }
    Ok((rows, fast, skipped))
}

/// `max_{grid} ω(σ)|f′(σ+it)|`, a lower bound for the supremum over the strip.
pub fn bloch_seminorm(
    f: &DirichletSeries,
    omega: &BlochWeight,
    grid: &StripGrid,
    q: &QuadratureConfig,
) -> Result<SeminormEstimate> {
    let (rows, fast_path, skipped_sigmas) = bloch_profile(f, omega, grid, q)?;
    let mut best = (0.0, grid.sigma_points[grid.sigma_points.len() - 1], 0.0);
    for (s, t, v) in rows {
        if v > best.0 {
            best = (v, s, t);
        }
    }
    Ok(SeminormEstimate {
        value: best.0,
        argmax_sigma: best.1,
        argmax_t: best.2,
        fast_path,
        sigma_min: grid.sigma_min(),
        n_sigma: grid.sigma_points.len(),
        t_max: grid.t_max(),
        n_t: grid.t_points.len(),
        skipped_sigmas,
    })
}

/// `(x, (ln x)^{1-δ} Σ_{x≤n≤x²} a_n)` for each `x`.
pub fn block_sum_criterion(f: &DirichletSeries, delta: f64, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut bad = None;
    f.for_each_term(|n, a| {
        if a.im != 0.0 || a.re < 0.0 {
            bad.get_or_insert(n);
        }
    });
    if let Some(n) = bad {
        return Err(Error::Precondition(format!("coefficient a_{n} is not a nonnegative real")));
    }
    xs.iter()
        .map(|&x| {
            if !(x >= std::f64::consts::E) {
                return Err(Error::Precondition(format!("block sums need x >= e, got {x}")));
            }
            let hi = x * x;
            if hi > f.truncation() as f64 {
                return Err(Error::Range(format!("x² = {hi} exceeds truncation {}", f.truncation())));
            }
            let mut sum = 0.0;
            f.for_each_term_in(x.ceil() as u64, hi.floor() as u64, |_, a| sum += a.re);
            Ok((x, x.ln().powf(1.0 - delta) * sum))
        })
        .collect()
}

/// `(n, |a_n| ln n ω(1/ln n) / (e · norm))` for nonzero `a_n` with `n ≥ 3`;
/// all ratios are at most 1 when `norm` bounds the Bloch_μ seminorm.
pub fn coefficient_bound_check(
    f: &DirichletSeries,
    mu: &AdmissibleMeasure,
    bloch_norm_estimate: f64,
    q: &QuadratureConfig,
) -> Result<Vec<(u64, f64)>> {
    let mut out = Vec::new();
    for (n, a) in f.terms() {
        if n < 3 {
            continue;
        }
        let l = (n as f64).ln();
        let w = mu.omega(1.0 / l, q)?;
        out.push((n, a.norm() * l * w / (std::f64::consts::E * bloch_norm_estimate)));
    }
    Ok(out)
}

fn check_half_plane(sigma: f64) -> Result<()> {
    if !(sigma > 0.5) {
        return Err(Error::Domain(format!("point evaluation on ℋ² needs σ > 1/2, got {sigma}")));
    }
    Ok(())
}

/// `‖δ_s‖_{(ℋ²)*} = ζ(2σ)^{1/2}`.
pub fn eval_functional_h2(sigma: f64) -> Result<f64> {
    check_half_plane(sigma)?;
    Ok(zeta(2.0 * sigma)?.sqrt())
}

/// `‖Δ_s‖_{(ℋ²)*} = ζ″(2σ)^{1/2}` for the derivative functional `f ↦ f′(s)`.
pub fn eval_deriv_functional_h2(sigma: f64) -> Result<f64> {
    check_half_plane(sigma)?;
    Ok(zeta_second_derivative(2.0 * sigma)?.sqrt())
}

/// Bracket for the norm of point evaluation on the Bloch space of `ℂ₊`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaBounds {
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
    /// Partial sum `Σ_{2≤n≤N} n^{-σ}/(n ln n)` of the witness series.
    pub witness_value: f64,
    pub witness_terms: u64,
}

/// Default length of the witness partial sum.
pub const WITNESS_TERMS: u64 = 10_000_000;

/// `(ln(1/σ)/e, 1 + ln(1/σ))` together with the witness value at σ.
pub fn bloch_delta_functional_bounds(sigma: f64) -> Result<DeltaBounds> {
    Ok(bloch_delta_functional_bounds_many(&[sigma], WITNESS_TERMS)?[0])
}

/// Batched form; the witness sums share one pass over `n`.
pub fn bloch_delta_functional_bounds_many(sigmas: &[f64], terms: u64) -> Result<Vec<DeltaBounds>> {
    for &s in sigmas {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("δ_s bounds need 0 < σ < 1, got {s}")));
        }
    }
    let values = witness_values(sigmas, terms);
    Ok(sigmas
        .iter()
        .zip(values)
        .map(|(&s, v)| {
            let l = -s.ln();
            DeltaBounds {
                sigma: s,
                lower: l / std::f64::consts::E,
                upper: 1.0 + l,
                witness_value: v,
                witness_terms: terms,
            }
        })
        .collect())
}

/// `Σ_{2≤n≤N} n^{-1-σ}/ln n` for each σ, summed from the smallest terms up.
pub fn witness_values(sigmas: &[f64], terms: u64) -> Vec<f64> {
    let mut acc = vec![0.0; sigmas.len()];
    for n in (2..=terms).rev() {
        let l = (n as f64).ln();
        let base = 1.0 / l;
        for (a, s) in acc.iter_mut().zip(sigmas) {
            *a += base * (-(1.0 + s) * l).exp();
        }
    }
    acc
}

/// The witness series `a_n = 1/(n ln n)`, `2 ≤ n ≤ N`.
pub fn witness_series(terms: u64) -> DirichletSeries {
    let mut v = vec![Complex64::new(0.0, 0.0); terms as usize];
    for n in 2..=terms {
        v[n as usize - 1] = Complex64::new(1.0 / (n as f64 * (n as f64).ln()), 0.0);
    }
    DirichletSeries::from_coefficients(v)
}
