//! Admissible probability measures on (0, ∞) and the quantities derived from
//! them: densities, the distribution function, `β_μ`, the Bloch weight `ω`,
//! and the Bergman weights `w_n = ∫ n^{-2σ} dμ(σ)`.
//!
//! Integrals against a measure are computed after a family-specific change of
//! variables that removes the behaviour at σ = 0:
//!
//! * `MuAlpha`: `v = σ^{α+1}`, so `σ^α dσ = dv / (α+1)`;
//! * `NuGamma`: none needed, the density vanishes to all orders at 0;
//! * `LogSquare`: `x = 1 / (1 - ln σ)`, which maps μ to Lebesgue measure on (0, 1];
//! * `Tabulated`: `u = ln σ` across the sample range.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_vec_with_breaks, CompositeRule, QuadratureConfig};

/// Serializable description of a measure, as accepted on the command line and
/// in cache headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MeasureSpec {
    /// `2^{α+1}/Γ(α+1) σ^α e^{-2σ}`, α > -1.
    MuAlpha { alpha: f64 },
    /// `c_γ exp(-σ^{1-γ}) ((γ-1)σ^{-2γ} - σ^{-(γ+1)})` on (0, 1], zero beyond; γ > 1.
    NuGamma { gamma: f64 },
    /// `1 / (σ log²(e/σ))` on (0, 1].
    LogSquare,
    /// Samples `(σ, h(σ))`, interpolated monotonically in `ln σ` and renormalized.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl MeasureSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            MeasureSpec::MuAlpha { .. } => "mu_alpha",
            MeasureSpec::NuGamma { .. } => "nu_gamma",
            MeasureSpec::LogSquare => "log_square",
            MeasureSpec::Tabulated { .. } => "tabulated",
        }
    }
}

/// Fritsch–Carlson monotone cubic interpolant.
#[derive(Debug, Clone, PartialEq)]
struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = delta[0];
            m[1] = delta[0];
        } else {
            m[0] = delta[0];
            m[n - 1] = delta[n - 2];
            for i in 1..n - 1 {
                m[i] = if delta[i - 1] * delta[i] <= 0.0 {
                    0.0
                } else {
                    (delta[i - 1] + delta[i]) / 2.0
                };
            }
            for i in 0..n - 1 {
                if delta[i] == 0.0 {
                    m[i] = 0.0;
                    m[i + 1] = 0.0;
                    continue;
                }
                let a = m[i] / delta[i];
                let b = m[i + 1] / delta[i];
                let s = a * a + b * b;
                if s > 9.0 {
                    let t = 3.0 / s.sqrt();
                    m[i] = t * a * delta[i];
                    m[i + 1] = t * b * delta[i];
                }
            }
        }
        Self { x, y, slopes: m }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t < self.x[0] || t > self.x[n - 1] {
            return 0.0;
        }
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[i] + h10 * h * self.slopes[i] + h01 * self.y[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

/// A probability measure on (0, ∞) with 0 in its support.
#[derive(Debug, Clone)]
pub struct AdmissibleMeasure {
    spec: MeasureSpec,
    normalization: f64,
    table: Option<MonotoneCubic>,
}

impl PartialEq for AdmissibleMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn nu_gamma_normalization(gamma_param: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&gamma_param.to_bits()) {
        return Ok(*c);
    }
    let cfg = QuadratureConfig {
        abs_tol: 1e-300,
        rel_tol: 1e-14,
        ..Default::default()
    };
    let mass = crate::quadrature::integrate(|s| nu_gamma_raw(gamma_param, s), 0.0, 1.0, &cfg)?;
    if !(mass > 0.0) {
        return Err(Error::InvalidMeasure(format!("nu_gamma with gamma={gamma_param} has zero mass")));
    }
    let c = 1.0 / mass;
    cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(gamma_param.to_bits(), c);
    Ok(c)
}

/// Logarithm of the unnormalized ν_γ density; `-inf` where it vanishes.
fn nu_gamma_log_raw(g: f64, s: f64) -> f64 {
    if s <= 0.0 || s > 1.0 {
        return f64::NEG_INFINITY;
    }
    // (γ-1)σ^{-2γ} - σ^{-(γ+1)} = σ^{-2γ} (γ - 1 - σ^{γ-1})
    let bracket = g - 1.0 - s.powf(g - 1.0);
    if bracket <= 0.0 {
        return f64::NEG_INFINITY;
    }
    -s.powf(1.0 - g) - 2.0 * g * s.ln() + bracket.ln()
}

fn nu_gamma_raw(g: f64, s: f64) -> f64 {
    nu_gamma_log_raw(g, s).exp()
}

impl AdmissibleMeasure {
    pub fn new(spec: MeasureSpec) -> Result<Self> {
        let (normalization, table) = match &spec {
            MeasureSpec::MuAlpha { alpha } => {
                if !(*alpha > -1.0) || !alpha.is_finite() {
                    return Err(Error::InvalidMeasure(format!("mu_alpha needs alpha > -1, got {alpha}")));
                }
                ((alpha + 1.0).exp2() / gamma(alpha + 1.0), None)
            }
            MeasureSpec::NuGamma { gamma: g } => {
                if !(*g > 1.0) || !g.is_finite() {
                    return Err(Error::InvalidMeasure(format!("nu_gamma needs gamma > 1, got {g}")));
                }
                (nu_gamma_normalization(*g)?, None)
            }
            MeasureSpec::LogSquare => (1.0, None),
            MeasureSpec::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::InvalidMeasure("tabulated density needs at least 2 samples".into()));
                }
                let mut s = samples.clone();
                s.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
                for w in s.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::InvalidMeasure("tabulated sample abscissae must be distinct".into()));
                    }
                }
                if s.iter().any(|(x, h)| !(*x > 0.0) || !(*h >= 0.0) || !h.is_finite()) {
                    return Err(Error::InvalidMeasure(
                        "tabulated samples need sigma > 0 and finite h >= 0".into(),
                    ));
                }
                let interp = MonotoneCubic::new(
                    s.iter().map(|p| p.0.ln()).collect(),
                    s.iter().map(|p| p.1).collect(),
                );
                let mut m = Self {
                    spec: spec.clone(),
                    normalization: 1.0,
                    table: Some(interp),
                };
                let mass = m.integrate(|_| 1.0, 0.0, f64::INFINITY, 1.0, &QuadratureConfig::default())?;
                if !(mass > 0.0) {
                    return Err(Error::InvalidMeasure("tabulated density has zero mass".into()));
                }
                m.normalization = 1.0 / mass;
                return Ok(m);
            }
        };
        Ok(Self {
            spec,
            normalization,
            table,
        })
    }

    pub fn mu_alpha(alpha: f64) -> Result<Self> {
        Self::new(MeasureSpec::MuAlpha { alpha })
    }

    pub fn nu_gamma(gamma: f64) -> Result<Self> {
        Self::new(MeasureSpec::NuGamma { gamma })
    }

    pub fn log_square() -> Self {
        Self::new(MeasureSpec::LogSquare).expect("log_square is always valid")
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(MeasureSpec::Tabulated { samples })
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Right end of the support (`inf` for unbounded support).
    pub fn support_end(&self) -> f64 {
        match &self.spec {
            MeasureSpec::MuAlpha { .. } => f64::INFINITY,
            MeasureSpec::NuGamma { .. } | MeasureSpec::LogSquare => 1.0,
            MeasureSpec::Tabulated { samples } => samples.iter().map(|s| s.0).fold(0.0, f64::max),
        }
    }

    /// `ln h(σ)`; `-inf` where the density vanishes.
    pub fn log_density(&self, sigma: f64) -> Result<f64> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("density needs sigma > 0, got {sigma}")));
        }
        let c = self.normalization.ln();
        Ok(match &self.spec {
            MeasureSpec::MuAlpha { alpha } => c + alpha * sigma.ln() - 2.0 * sigma,
            MeasureSpec::NuGamma { gamma: g } => c + nu_gamma_log_raw(*g, sigma),
            MeasureSpec::LogSquare => {
                if sigma > 1.0 {
                    f64::NEG_INFINITY
                } else {
                    -sigma.ln() - 2.0 * (1.0 - sigma.ln()).ln()
                }
            }
            MeasureSpec::Tabulated { .. } => {
                let h = self.tabulated_raw(sigma);
                if h > 0.0 {
                    c + h.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        })
    }

    /// The density `h(σ)`, zero outside the family's support.
    pub fn density(&self, sigma: f64) -> Result<f64> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("density needs sigma > 0, got {sigma}")));
        }
        Ok(match &self.spec {
            MeasureSpec::MuAlpha { alpha } => self.normalization * sigma.powf(*alpha) * (-2.0 * sigma).exp(),
            MeasureSpec::Tabulated { .. } => self.normalization * self.tabulated_raw(sigma),
            _ => self.log_density(sigma)?.exp(),
        })
    }

    fn tabulated_raw(&self, sigma: f64) -> f64 {
        self.table
            .as_ref()
            .map(|t| t.eval(sigma.ln()).max(0.0))
            .unwrap_or(0.0)
    }

    /// Mass of `[x, ∞)`, closed form where available; used only to place
    /// truncation points of improper integrals.
    fn tail_mass(&self, x: f64) -> f64 {
        match &self.spec {
            MeasureSpec::MuAlpha { alpha } => gamma_ur(alpha + 1.0, 2.0 * x),
            _ => {
                if x >= self.support_end() {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Cutoff beyond which an integrand bounded by `bound` contributes less
    /// than a hundredth of `abs_tol`.
    fn upper_cutoff(&self, bound: f64, cfg: &QuadratureConfig) -> f64 {
        if let Some(c) = cfg.upper_cutoff {
            return c.min(self.support_end());
        }
        let end = self.support_end();
        if end.is_finite() {
            return end;
        }
        let target = 1e-2 * cfg.abs_tol / bound.max(f64::MIN_POSITIVE);
        let mut x = 1.0;
        while self.tail_mass(x) > target && x < 1e6 {
            x *= 1.25;
        }
        x
    }

    /// Vector valued `∫_lo^hi g(σ) dμ(σ)`. `bound` is an upper bound of
    /// `|g|` on the tail, used to truncate infinite ranges.
    pub fn integrate_vec<G>(
        &self,
        mut g: G,
        dim: usize,
        lo: f64,
        hi: f64,
        bound: f64,
        cfg: &QuadratureConfig,
    ) -> Result<crate::quadrature::Integral>
    where
        G: FnMut(f64, &mut [f64]),
    {
        let breaks = self.breaks(lo, hi, bound, cfg)?;
        let c = self.normalization;
        match &self.spec {
            MeasureSpec::MuAlpha { alpha } => {
                let k = 1.0 / (alpha + 1.0);
                let scale = c * k;
                integrate_vec_with_breaks(
                    |v, out| {
                        let s = v.powf(k);
                        g(s, out);
                        let w = scale * (-2.0 * s).exp();
                        out.iter_mut().for_each(|o| *o *= w);
                    },
                    dim,
                    &breaks,
                    cfg,
                )
            }
            MeasureSpec::NuGamma { gamma: gp } => {
                let gp = *gp;
                integrate_vec_with_breaks(
                    |s, out| {
                        let w = c * nu_gamma_raw(gp, s);
                        if w == 0.0 {
                            out.iter_mut().for_each(|o| *o = 0.0);
                            return;
                        }
                        g(s, out);
                        out.iter_mut().for_each(|o| *o *= w);
                    },
                    dim,
                    &breaks,
                    cfg,
                )
            }
            MeasureSpec::LogSquare => integrate_vec_with_breaks(|x, out| g(log_square_sigma(x), out), dim, &breaks, cfg),
            MeasureSpec::Tabulated { .. } => integrate_vec_with_breaks(
                |u, out| {
                    let s = u.exp();
                    let w = c * self.tabulated_raw(s) * s;
                    if w == 0.0 {
                        out.iter_mut().for_each(|o| *o = 0.0);
                        return;
                    }
                    g(s, out);
                    out.iter_mut().for_each(|o| *o *= w);
                },
                dim,
                &breaks,
                cfg,
            ),
        }
    }

    /// Maps `[lo, hi]` in σ to the integration variable of the family.
    fn transformed_range(&self, lo: f64, hi: f64, bound: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
        if !(lo >= 0.0) || !(hi >= lo) {
            return Err(Error::Domain(format!("invalid integration range [{lo}, {hi}]")));
        }
        let hi = if hi.is_finite() {
            hi.min(self.support_end())
        } else {
            self.upper_cutoff(bound, cfg)
        };
        let lo = lo.min(hi);
        Ok(match &self.spec {
            MeasureSpec::MuAlpha { alpha } => (lo.powf(alpha + 1.0), hi.powf(alpha + 1.0)),
            MeasureSpec::NuGamma { .. } => (lo, hi),
            MeasureSpec::LogSquare => (log_square_x(lo), log_square_x(hi)),
            MeasureSpec::Tabulated { samples } => {
                let smin = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
                let l = lo.max(smin);
                if l >= hi {
                    (0.0, 0.0)
                } else {
                    (l.ln(), hi.ln())
                }
            }
        })
    }

    /// Initial partition in the transformed variable: geometric in σ towards 0.
    fn breaks(&self, lo: f64, hi: f64, bound: f64, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
        let (v_lo, v_hi) = self.transformed_range(lo, hi, bound, cfg)?;
        if v_lo == v_hi {
            return Ok(vec![v_lo, v_hi]);
        }
        let s_hi = self.from_transformed(v_hi);
        let s_lo = self.from_transformed(v_lo);
        let mut sig = vec![s_hi];
        let mut up = 1.0;
        let mut above = Vec::new();
        while up < s_hi {
            if up > s_lo {
                above.push(up);
            }
            up *= 2.0;
        }
        sig.extend(above.iter().rev());
        let mut s = s_hi.min(1.0);
        for _ in 0..60 {
            s *= 0.5;
            if s <= s_lo {
                break;
            }
            sig.push(s);
        }
        let mut out: Vec<f64> = vec![v_lo];
        out.extend(sig.iter().rev().map(|x| self.to_transformed(*x)));
        out.push(v_hi);
        out.retain(|v| *v >= v_lo && *v <= v_hi);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(f64::MIN_POSITIVE));
        if out.len() < 2 {
            return Ok(vec![v_lo, v_hi]);
        }
        Ok(out)
    }

    fn to_transformed(&self, sigma: f64) -> f64 {
        match &self.spec {
            MeasureSpec::MuAlpha { alpha } => sigma.powf(alpha + 1.0),
            MeasureSpec::NuGamma { .. } => sigma,
            MeasureSpec::LogSquare => log_square_x(sigma),
            MeasureSpec::Tabulated { .. } => sigma.ln(),
        }
    }

    fn from_transformed(&self, v: f64) -> f64 {
        match &self.spec {
            MeasureSpec::MuAlpha { alpha } => v.powf(1.0 / (alpha + 1.0)),
            MeasureSpec::NuGamma { .. } => v,
            MeasureSpec::LogSquare => log_square_sigma(v),
            MeasureSpec::Tabulated { .. } => v.exp(),
        }
    }

    /// Scalar `∫_lo^hi g(σ) dμ(σ)`.
    pub fn integrate<G>(&self, mut g: G, lo: f64, hi: f64, bound: f64, cfg: &QuadratureConfig) -> Result<f64>
    where
        G: FnMut(f64) -> f64,
    {
        self.integrate_vec(|s, out| out[0] = g(s), 1, lo, hi, bound, cfg)
            .map(|r| r.values[0])
    }

    /// `μ([0, t])` by quadrature.
    pub fn measure_of_interval(&self, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("measure_of_interval needs t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let cfg = positive_integrand_config(cfg);
        self.integrate(|_| 1.0, 0.0, t, 1.0, &cfg).map(|v| v.clamp(0.0, 1.0))
    }

    /// `β_μ(σ) = ∫_0^σ (σ - u) dμ(u)`.
    pub fn beta(&self, sigma: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("beta_mu needs sigma > 0, got {sigma}")));
        }
        let cfg = positive_integrand_config(cfg);
        self.integrate(|u| (sigma - u).max(0.0), 0.0, sigma, sigma, &cfg)
    }

    /// `ω(σ) = sqrt(β_μ(σ) / h(σ))` for `0 < σ <= 1`.
    pub fn omega(&self, sigma: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::Domain(format!("omega needs 0 < sigma <= 1, got {sigma}")));
        }
        let log_h = self.log_density(sigma)?;
        if log_h == f64::NEG_INFINITY {
            return Err(Error::DegenerateDensity { sigma });
        }
        match &self.spec {
            MeasureSpec::NuGamma { gamma: g } => {
                // Both β and h underflow near 0; integrate the ratio h(u)/h(σ) instead.
                let g = *g;
                let log_raw_sigma = nu_gamma_log_raw(g, sigma);
                let cfg = positive_integrand_config(cfg);
                let ratio = crate::quadrature::integrate(
                    |u| {
                        let l = nu_gamma_log_raw(g, u);
                        if l == f64::NEG_INFINITY {
                            0.0
                        } else {
                            (sigma - u) * (l - log_raw_sigma).exp()
                        }
                    },
                    0.0,
                    sigma,
                    &cfg,
                )?;
                Ok(ratio.sqrt())
            }
            _ => {
                let b = self.beta(sigma, cfg)?;
                Ok((b / log_h.exp()).sqrt())
            }
        }
    }

    /// `w_n = ∫_0^∞ n^{-2σ} dμ(σ)`. `w_1 = 1` exactly.
    pub fn bergman_weight(&self, n: u64, cfg: &QuadratureConfig) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("bergman_weight needs n >= 1".into()));
        }
        if n == 1 {
            return Ok(1.0);
        }
        let lambda = 2.0 * (n as f64).ln();
        self.integrate(|s| (-lambda * s).exp(), 0.0, f64::INFINITY, 1.0, cfg)
    }

    /// Batch rule for `σ ↦ e^{-2σ ln n}` valid for all `2 <= n <= n_max`.
    pub fn weight_rule(&self, n_max: u64, cfg: &QuadratureConfig) -> Result<WeightRule> {
        let lam_max = 2.0 * (n_max.max(2) as f64).ln();
        let mut lambdas = vec![0.0];
        let mut l = 2.0 * 2f64.ln();
        while l < lam_max {
            lambdas.push(l);
            l *= 1.15;
        }
        lambdas.push(lam_max);
        let dim = lambdas.len();
        let (v_lo, v_hi) = self.transformed_range(0.0, f64::INFINITY, 1.0, cfg)?;
        let r = self.integrate_vec(
            |s, out| {
                for (o, lam) in out.iter_mut().zip(&lambdas) {
                    *o = (-lam * s).exp();
                }
            },
            dim,
            0.0,
            f64::INFINITY,
            1.0,
            cfg,
        )?;
        let rule = CompositeRule::from_panels(&r.panels);
        let panels_nonempty = if rule.is_empty() {
            CompositeRule::from_panels(&[(v_lo, v_hi)])
        } else {
            rule
        };
        // Fold the change of variables into σ-nodes and μ-weights.
        let mut sigmas = Vec::with_capacity(panels_nonempty.len());
        let mut weights = Vec::with_capacity(panels_nonempty.len());
        for (v, w) in panels_nonempty.nodes.iter().zip(&panels_nonempty.weights) {
            let (s, jac) = self.node_and_jacobian(*v);
            sigmas.push(s);
            weights.push(w * jac);
        }
        Ok(WeightRule {
            sigmas,
            weights,
            n_max,
        })
    }

    /// σ and `dμ/dv` at the transformed variable `v`.
    fn node_and_jacobian(&self, v: f64) -> (f64, f64) {
        let c = self.normalization;
        match &self.spec {
            MeasureSpec::MuAlpha { alpha } => {
                let k = 1.0 / (alpha + 1.0);
                let s = v.powf(k);
                (s, c * k * (-2.0 * s).exp())
            }
            MeasureSpec::NuGamma { gamma: g } => (v, c * nu_gamma_raw(*g, v)),
            MeasureSpec::LogSquare => (log_square_sigma(v), 1.0),
            MeasureSpec::Tabulated { .. } => {
                let s = v.exp();
                (s, c * self.tabulated_raw(s) * s)
            }
        }
    }

    /// `sup h(x)/h(σ)` lower envelope: the largest `c` with `h(x) >= c h(σ)`
    /// for `x ∈ [σ/2, σ]`, over the given σ values (H₂-type condition).
    pub fn h2_constant(&self, sigmas: &[f64], points_per_interval: usize) -> Result<f64> {
        let mut c = f64::INFINITY;
        for &s in sigmas {
            let ls = self.log_density(s)?;
            if ls == f64::NEG_INFINITY {
                continue;
            }
            for i in 0..=points_per_interval {
                let x = s * (0.5 + 0.5 * i as f64 / points_per_interval.max(1) as f64);
                c = c.min((self.log_density(x)? - ls).exp());
            }
        }
        Ok(c)
    }

    /// `sup h(δt) / (δ^α h(t))` over the given δ and t grids (H₁-type condition).
    pub fn h1_constant(&self, alpha: f64, deltas: &[f64], ts: &[f64]) -> Result<f64> {
        let mut c: f64 = 0.0;
        for &t in ts {
            let lt = self.log_density(t)?;
            if lt == f64::NEG_INFINITY {
                continue;
            }
            for &d in deltas {
                c = c.max((self.log_density(d * t)? - lt - alpha * d.ln()).exp());
            }
        }
        Ok(c)
    }
}

fn log_square_x(sigma: f64) -> f64 {
    if sigma <= 0.0 {
        0.0
    } else if sigma >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 - sigma.ln())
    }
}

fn log_square_sigma(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / x).exp()
    }
}

/// Positive integrands without cancellation: rely on the relative tolerance
/// so that tiny values near σ = 0 are still resolved.
fn positive_integrand_config(cfg: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: 1e-300,
        rel_tol: cfg.rel_tol.min(1e-12),
        ..*cfg
    }
}

/// Fixed quadrature rule in σ reproducing `w_n` for all `n <= n_max`.
#[derive(Debug, Clone)]
pub struct WeightRule {
    pub sigmas: Vec<f64>,
    pub weights: Vec<f64>,
    pub n_max: u64,
}

impl WeightRule {
    pub fn weight(&self, n: u64) -> f64 {
        if n == 1 {
            return 1.0;
        }
        let lam = 2.0 * (n as f64).ln();
        self.sigmas
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| w * (-lam * s).exp())
            .sum()
    }

    /// `∫ φ(σ) dμ(σ)` for integrands no rougher than the rule's test family.
    pub fn apply<F: FnMut(f64) -> f64>(&self, mut phi: F) -> f64 {
        self.sigmas.iter().zip(&self.weights).map(|(s, w)| w * phi(*s)).sum()
    }
}
