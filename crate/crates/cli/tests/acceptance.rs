//! The fifteen acceptance criteria. Run with
//! `cargo test -p dvlab --test acceptance -- --nocapture` to see one line per
//! criterion. Oracles that are independent of the library routines live here.

use std::path::Path;
use std::time::Instant;

use dvlab_cli::presets::{f_gamma, lacunary_primes, log_integral, radicality_audit};
use dvlab_cli::{emit, run_experiment, ExperimentConfig, Report};
use dvlab_core::cache::compute_weight_table;
use dvlab_core::measures::AdmissibleMeasure;
use dvlab_core::norms::{a2mu_norm, a2mu_norm_integral, eval_deriv_functional_h2};
use dvlab_core::quadrature::QuadratureConfig;
use dvlab_core::sampling::rng;
use dvlab_core::volterra::{compactness_profile, finite_section_matrix, schatten_partial_sum, volterra_apply, volterra_apply_quadrature};
use dvlab_core::{Complex64, DirichletSeries};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn preset(name: &str) -> Report {
    run_experiment(&ExperimentConfig::new(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn assertion(r: &Report, name: &str) -> bool {
    r.assertions.iter().find(|a| a.name == name).unwrap_or_else(|| panic!("no assertion {name}")).passed
}

fn random_series<R: Rng>(r: &mut R, len: usize) -> DirichletSeries {
    DirichletSeries::from_coefficients((0..len).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect())
}

fn c01_weight_closed_form() -> Outcome {
    let q = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for alpha in [-0.5, 0.0, 1.0, 2.0] {
        let w = compute_weight_table(&AdmissibleMeasure::mu_alpha(alpha).unwrap(), 10_000, &q).unwrap();
        for (i, wn) in w.iter().enumerate() {
            let n = (i + 1) as f64;
            worst = worst.max((wn - (1.0 + n.ln()).powf(-(alpha + 1.0))).abs());
        }
    }
    outcome(worst < 1e-8, format!("max |w_n - (1+ln n)^-(a+1)| = {worst:.3e}"))
}

fn c02_supermultiplicativity() -> Outcome {
    let q = QuadratureConfig::default();
    let measures = [
        AdmissibleMeasure::mu_alpha(0.0).unwrap(),
        AdmissibleMeasure::nu_gamma(2.0).unwrap(),
        AdmissibleMeasure::log_square(),
        AdmissibleMeasure::tabulated((1..=60).map(|k| (k as f64 / 30.0, (k as f64 / 30.0).sqrt() * (-(k as f64) / 15.0).exp())).collect())
            .unwrap(),
    ];
    let mut worst = f64::INFINITY;
    for mu in &measures {
        let w = compute_weight_table(mu, 1_000_000, &q).unwrap();
        for m in 1..=1000usize {
            for n in m..=1000usize {
                worst = worst.min(w[m * n - 1] - w[m - 1] * w[n - 1]);
            }
        }
    }
    outcome(worst >= -1e-12, format!("min w_mn - w_m w_n = {worst:.3e} over 4 measures"))
}

fn c03_norm_identity() -> Outcome {
    let q = QuadratureConfig::default();
    let mut r = rng(3);
    let measures = [AdmissibleMeasure::mu_alpha(0.0).unwrap(), AdmissibleMeasure::mu_alpha(1.0).unwrap(), AdmissibleMeasure::log_square()];
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let f = random_series(&mut r, 50);
        for mu in &measures {
            let a = a2mu_norm(&f, mu).unwrap();
            let b = a2mu_norm_integral(&f, mu, &q).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst < 1e-7, format!("max |integral - coefficient norm| = {worst:.3e}"))
}

fn c04_volterra_cross_oracle() -> Outcome {
    let q = QuadratureConfig::default();
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (lf, lg) = (r.gen_range(1..=30), r.gen_range(2..=30));
        let f = random_series(&mut r, lf);
        let g = random_series(&mut r, lg);
        let t = volterra_apply(&g, &f, 900);
        for s in [Complex64::new(3.0, 0.0), Complex64::new(3.0, 0.7)] {
            let coef = t.evaluate(s).value;
            let quad = volterra_apply_quadrature(&g, &f, s, &q).unwrap();
            worst = worst.max((coef - quad).norm());
        }
    }
    outcome(worst < 1e-6, format!("max |coefficients - quadrature| = {worst:.3e}"))
}

fn c05_monomial_action() -> Outcome {
    let t = volterra_apply(&DirichletSeries::monomial(3), &DirichletSeries::monomial(2), 6);
    let want = 3f64.ln() / (2f64.ln() + 3f64.ln());
    let exact = t.coefficient(6) == Complex64::new(want, 0.0);
    let single = t.terms().iter().all(|(n, c)| *n == 6 || *c == Complex64::new(0.0, 0.0));
    outcome(exact && single, format!("coefficient at 6 = {:?}, expected {want:?}", t.coefficient(6).re))
}

fn c06_littlewood_paley() -> Outcome {
    let r = preset("exp-lp-identity");
    let ok = assertion(&r, "ratio_bracket") && assertion(&r, "monte_carlo_precision");
    let a = &r.assertions[0].observed;
    outcome(ok, format!("ratio bracket [{}, {}]", a["r_lo"], a["r_hi"]))
}

fn c07_translation_laws() -> Outcome {
    let mu = AdmissibleMeasure::mu_alpha(0.0).unwrap();
    let mut r = rng(7);
    let mut bad = 0;
    for _ in 0..100 {
        let f = random_series(&mut r, 80);
        let x = r.gen_range(0.0..1.0);
        let sigma = x + r.gen_range(0.0..2.0);
        let near = a2mu_norm(&f.translate(x).unwrap(), &mu).unwrap();
        let far = a2mu_norm(&f.translate(sigma).unwrap(), &mu).unwrap();
        // coefficient-wise contraction as well as the norms
        let coefficientwise = (1..=80).all(|n| {
            f.translate(sigma).unwrap().coefficient(n).norm() <= f.translate(x).unwrap().coefficient(n).norm()
        });
        let m = r.gen_range(2..40u64);
        let tail = f.map_terms(|n, c| if n >= m { c } else { Complex64::new(0.0, 0.0) });
        let lhs = a2mu_norm(&tail.translate(sigma).unwrap(), &mu).unwrap();
        let rhs = (m as f64).powf(-sigma) * a2mu_norm(&tail, &mu).unwrap();
        if far > near || !coefficientwise || lhs > rhs * (1.0 + 1e-14) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} of 100 series violate contraction or tail decay"))
}

fn c08_block_sums() -> Outcome {
    let r = preset("exp-lacunary");
    let ok = assertion(&r, "lacunary_block_sums") && assertion(&r, "zeta_blocks_unbounded");
    let primes = lacunary_primes(1u64 << 32);
    outcome(
        ok && primes == vec![2, 5, 17, 257, 65537],
        format!("lacunary max {}, zeta growth {}", r.assertions[0].observed["max"], r.assertions[1].observed["growth"]),
    )
}

/// `w_n` for `dμ = dσ/(σ ln²(e/σ))` on (0,1] after `u = ln(e/σ)`:
/// `∫_1^∞ n^{-2e^{1-u}} u^{-2} du`, Simpson on [1, 60] plus the tail `1/60`.
fn log_square_weight_oracle(n: u64) -> f64 {
    let ln = (n as f64).ln();
    let f = |u: f64| (-2.0 * (1.0 - u).exp() * ln).exp() / (u * u);
    let (a, b, k) = (1.0, 60.0, 200_000);
    let h = (b - a) / k as f64;
    let mut s = f(a) + f(b);
    for i in 1..k {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 + 1.0 / 60.0
}

fn c09_lacunary_divergence() -> Outcome {
    let r = preset("exp-lacunary");
    let preset_ok = assertion(&r, "partial_norms_diverge");
    let q = QuadratureConfig::default();
    let mu = AdmissibleMeasure::log_square();
    let mut worst_oracle: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for (j, p) in lacunary_primes(1u64 << 32).into_iter().enumerate() {
        let w = mu.bergman_weight(p, &q).unwrap();
        let oracle = log_square_weight_oracle(p);
        worst_oracle = worst_oracle.max((w - oracle).abs());
        if j >= 1 {
            let x = 2f64.powi(1 << j);
            let inc = log_integral(1.0 / (x * x).ln()) - log_integral(1.0 / x.ln());
            min_ratio = min_ratio.min(oracle / inc);
        }
    }
    outcome(
        preset_ok && worst_oracle < 1e-9 && min_ratio >= 0.25,
        format!("min increment ratio {min_ratio:.4}, weight oracle error {worst_oracle:.2e}"),
    )
}

fn c10_schatten() -> Outcome {
    let r = preset("exp-schatten");
    let ok = r.passed();
    // column norms of T_{e_2} from the closed form w_n = 1/(1 + ln n)
    let mu = AdmissibleMeasure::mu_alpha(0.0).unwrap();
    let rep = schatten_partial_sum(&DirichletSeries::monomial(2), &mu, 2.0, 10_000).unwrap();
    let w = |n: u64| 1.0 / (1.0 + (n as f64).ln());
    let l2 = 2f64.ln();
    let worst = rep
        .rows
        .iter()
        .map(|row| {
            let n = row.0;
            let want = (l2 / ((n as f64).ln() + l2)).powi(2) * w(2 * n) / w(n);
            ((row.1 - want) / want).abs()
        })
        .fold(0.0, f64::max);
    outcome(
        ok && worst < 1e-8,
        format!("partial sum / first term = {:.1}, term oracle error {worst:.2e}", rep.partial_sum() / rep.rows[0].1),
    )
}

fn c11_compactness() -> Outcome {
    let r = preset("exp-compactness");
    let ok = r.passed();
    // for e_2 the section maps ẽ_j to a multiple of ẽ_{2j}, so the tail norm is the largest multiple
    let mu = AdmissibleMeasure::mu_alpha(0.0).unwrap();
    let n = 2048usize;
    let m = finite_section_matrix(&DirichletSeries::monomial(2), &mu, n).unwrap();
    let cuts = [0usize, 1, 16, 256, 1023, 1024];
    let prof = compactness_profile(&m, &cuts, 2000, 1e-13).unwrap();
    let w = |k: usize| 1.0 / (1.0 + (k as f64).ln());
    let l2 = 2f64.ln();
    let worst = prof
        .iter()
        .map(|&(c, v)| {
            let want = ((c + 1)..=n / 2).map(|j| l2 / ((2 * j) as f64).ln() * (w(2 * j) / w(j)).sqrt()).fold(0.0, f64::max);
            (v - want).abs()
        })
        .fold(0.0, f64::max);
    outcome(ok && worst < 1e-8, format!("tail norm oracle error {worst:.2e}"))
}

/// `ζ″(s) = Σ (ln n)² n^{-s}` as a partial sum to `N` plus the integral tail
/// and the endpoint correction.
fn zeta2_oracle(s: f64) -> f64 {
    let n = 200_000u64;
    let mut acc = 0.0;
    for k in (2..=n).rev() {
        let l = (k as f64).ln();
        acc += l * l * (-s * l).exp();
    }
    let (e, l) = (s - 1.0, (n as f64).ln());
    let tail = (-e * l).exp() * (l * l / e + 2.0 * l / (e * e) + 2.0 / (e * e * e));
    let endpoint = l * l * (-s * l).exp();
    acc + tail - endpoint / 2.0
}

fn c12_functionals() -> Outcome {
    let r = preset("exp-functionals");
    let ok = r.passed();
    let mut worst: f64 = 0.0;
    for j in 3..=12 {
        let s = 0.5 + 2f64.powi(-j);
        let v = eval_deriv_functional_h2(s).unwrap();
        let o = zeta2_oracle(2.0 * s).sqrt();
        worst = worst.max(((v - o) / o).abs());
    }
    let a = &r.assertions[0].observed;
    outcome(
        ok && worst < 1e-8,
        format!("scaled bracket [{}, {}], zeta'' oracle error {worst:.2e}", a["min"], a["max"]),
    )
}

fn c13_radicality() -> Outcome {
    let audit = radicality_audit(13, &[1, 2, 3], 200, 50, 4).unwrap();
    let violations: usize = audit.reports.iter().map(|r| r.2.violations.len()).sum();
    let checks: usize = audit.reports.iter().map(|r| r.2.rows.len()).sum();
    outcome(
        violations == 0 && audit.pythagoras_max_error <= 1e-12,
        format!("{violations} violations in {checks} checks, Pythagoras error {:.2e}", audit.pythagoras_max_error),
    )
}

fn c14_nu_gamma() -> Outcome {
    let r = preset("exp-nu-gamma");
    let ok = assertion(&r, "classical_growth") && assertion(&r, "power_law_bounded");
    // f′_2(σ) = −ζ′(1+σ) = σ^{-2} + γ₁ − γ₂σ + γ₃σ²/2 + O(σ³) with Stieltjes constants γ_k
    let (g1, g2, g3) = (-0.072_815_845_483_676_72, -0.009_690_363_192_872_318, 0.002_053_834_420_303_346);
    let f = f_gamma(2.0, 100_000).derivative();
    let mut worst: f64 = 0.0;
    for j in 4..=12 {
        let s = 2f64.powi(-j);
        let v = f.evaluate(Complex64::new(s, 0.0)).value.re;
        let want = s.powi(-2) + g1 - g2 * s + g3 * s * s / 2.0;
        worst = worst.max(((v - want) * s * s).abs());
    }
    outcome(ok && worst < 1e-6, format!("growth {}, sigma^2 f' oracle error {worst:.2e}", r.assertions[0].observed["growth"]))
}

fn csv_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn c15_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for name in dvlab_cli::PRESETS {
        let mut cfg = ExperimentConfig::new(name);
        cfg.seed = 15;
        let a = tmp.path().join(format!("{name}-a"));
        let b = tmp.path().join(format!("{name}-b"));
        emit(&run_experiment(&cfg).unwrap(), &a).unwrap();
        emit(&run_experiment(&cfg).unwrap(), &b).unwrap();
        let (x, y) = (csv_bodies(&a), csv_bodies(&b));
        if x.is_empty() || x != y {
            differing.push(name);
        }
    }
    outcome(differing.is_empty(), format!("presets with differing CSVs: {differing:?}"))
}

#[test]
fn acceptance() {
    let cache = tempfile::tempdir().unwrap();
    std::env::set_var(dvlab_core::cache::CACHE_DIR_ENV, cache.path());
    let criteria: [(&str, fn() -> Outcome); 15] = [
        ("weight closed form", c01_weight_closed_form),
        ("supermultiplicativity", c02_supermultiplicativity),
        ("norm identity", c03_norm_identity),
        ("volterra cross-oracle", c04_volterra_cross_oracle),
        ("monomial action", c05_monomial_action),
        ("littlewood-paley p=2", c06_littlewood_paley),
        ("translation laws", c07_translation_laws),
        ("block-sum criterion", c08_block_sums),
        ("lacunary divergence", c09_lacunary_divergence),
        ("schatten divergence", c10_schatten),
        ("compactness profile", c11_compactness),
        ("evaluation functionals", c12_functionals),
        ("radicality", c13_radicality),
        ("nu_gamma strictness", c14_nu_gamma),
        ("determinism", c15_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        println!(
            "[{}] {:>2} {name}: {} ({:.1}s)",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
