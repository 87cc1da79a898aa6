use dvlab_core::measures::AdmissibleMeasure;
use dvlab_core::volterra::{finite_section_matrix, operator_norm_estimate, volterra_apply, FiniteSectionMatrix};
use dvlab_core::{Complex64, DirichletSeries};
use proptest::prelude::*;

const N: u64 = 64;

fn series(len: usize) -> impl Strategy<Value = DirichletSeries> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_map(|v| DirichletSeries::from_coefficients(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()))
}

fn close(f: &DirichletSeries, g: &DirichletSeries, tol: f64) -> Result<(), TestCaseError> {
    for k in 1..=N {
        let (a, b) = (f.coefficient(k), g.coefficient(k));
        prop_assert!((a - b).norm() <= tol * (1.0 + a.norm()), "k={} {} vs {}", k, a, b);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linear_in_both_arguments(g in series(20), g2 in series(20), f in series(20), f2 in series(20), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let a = Complex64::new(re, im);
        let lhs = volterra_apply(&g, &f.scale(a).add(&f2), N);
        let rhs = volterra_apply(&g, &f, N).scale(a).add(&volterra_apply(&g, &f2, N));
        close(&lhs, &rhs, 1e-12)?;
        let lhs = volterra_apply(&g.scale(a).add(&g2), &f, N);
        let rhs = volterra_apply(&g, &f, N).scale(a).add(&volterra_apply(&g2, &f, N));
        close(&lhs, &rhs, 1e-12)?;
    }

    #[test]
    fn acting_on_one_removes_the_constant(g in series(40)) {
        let t = volterra_apply(&g, &DirichletSeries::constant(Complex64::new(1.0, 0.0)), N);
        let want = g.map_terms(|n, c| if n == 1 { Complex64::new(0.0, 0.0) } else { c });
        close(&t, &want, 1e-13)?;
    }

    #[test]
    fn derivative_identity(g in series(30), f in series(30)) {
        let lhs = volterra_apply(&g, &f, N).derivative();
        let rhs = f.multiply(&g.derivative(), N);
        close(&lhs, &rhs, 1e-12)?;
    }

    #[test]
    fn matrix_matches_coefficient_action(g in series(16), f in series(32)) {
        let n = 32usize;
        // weights equal to 1 make the normalized basis the monomials
        let m = FiniteSectionMatrix::from_weights(&g, &vec![1.0; n + 1], n).unwrap();
        let x: Vec<Complex64> = (1..=n as u64).map(|k| f.coefficient(k)).collect();
        let y = m.apply(&x);
        let t = volterra_apply(&g, &f, n as u64);
        for k in 1..=n {
            let want = t.coefficient(k as u64);
            prop_assert!((y[k - 1] - want).norm() <= 1e-13 * (1.0 + want.norm()));
        }
    }
}

#[test]
fn section_norms_grow_with_n() {
    let mu = AdmissibleMeasure::mu_alpha(0.0).unwrap();
    let g = DirichletSeries::from_real(&[0.0, 1.0, 0.5, 0.0, 0.25]);
    let mut prev = 0.0;
    for n in [16usize, 32, 64, 128, 256] {
        let m = finite_section_matrix(&g, &mu, n).unwrap();
        let est = operator_norm_estimate(&m, 500, 1e-12).unwrap();
        assert!(est.value >= prev * (1.0 - 1e-9), "n={n}: {} < {prev}", est.value);
        prev = est.value;
    }
}
