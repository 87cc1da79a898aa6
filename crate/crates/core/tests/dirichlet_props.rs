use dvlab_core::dirichlet::{Character, DirichletSeries};
use dvlab_core::Complex64;
use proptest::prelude::*;

const N: u64 = 60;

fn series(len: usize) -> impl Strategy<Value = DirichletSeries> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), len)
        .prop_map(|v| DirichletSeries::from_coefficients(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()))
}

fn close(f: &DirichletSeries, g: &DirichletSeries, n: u64, tol: f64) -> Result<(), TestCaseError> {
    for k in 1..=n {
        let (a, b) = (f.coefficient(k), g.coefficient(k));
        prop_assert!((a - b).norm() <= tol * (1.0 + a.norm()), "k={} {} vs {}", k, a, b);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiply_commutes_and_associates(f in series(30), g in series(30), h in series(30)) {
        close(&f.multiply(&g, N), &g.multiply(&f, N), N, 1e-12)?;
        let left = f.multiply(&g, N).multiply(&h, N);
        let right = f.multiply(&g.multiply(&h, N), N);
        close(&left, &right, N, 1e-11)?;
    }

    #[test]
    fn divisor_route_matches(f in series(40), g in series(25)) {
        close(&f.multiply(&g, N), &f.multiply_by_divisors(&g, N), N, 1e-12)?;
    }

    #[test]
    fn leibniz_rule(f in series(30), g in series(30)) {
        let lhs = f.multiply(&g, N).derivative();
        let rhs = f.derivative().multiply(&g, N).add(&f.multiply(&g.derivative(), N));
        close(&lhs, &rhs, N, 1e-11)?;
    }

    #[test]
    fn translation_is_multiplicative(f in series(30), g in series(30), sigma in 0.0f64..3.0) {
        let lhs = f.multiply(&g, N).translate(sigma).unwrap();
        let rhs = f.translate(sigma).unwrap().multiply(&g.translate(sigma).unwrap(), N);
        close(&lhs, &rhs, N, 1e-12)?;
    }

    #[test]
    fn twist_commutes(f in series(30), g in series(30), angles in prop::collection::vec(0.0f64..1.0, 17)) {
        let chi = Character::from_angles(&angles);
        let lhs = f.multiply(&g, N).twist(&chi).unwrap();
        let rhs = f.twist(&chi).unwrap().multiply(&g.twist(&chi).unwrap(), N);
        close(&lhs, &rhs, N, 1e-11)?;
        close(&f.derivative().twist(&chi).unwrap(), &f.twist(&chi).unwrap().derivative(), N, 1e-12)?;
    }

    #[test]
    fn triangle_inequality(f in series(50), re in 0.0f64..4.0, im in -20.0f64..20.0) {
        let s = Complex64::new(re, im);
        let v = f.evaluate(s).value.norm();
        prop_assert!(v <= f.abs_sum(re) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn csv_round_trip(f in series(20)) {
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = DirichletSeries::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(f.truncation(), g.truncation());
        for k in 1..=f.truncation() {
            prop_assert_eq!(f.coefficient(k), g.coefficient(k));
        }
    }

    #[test]
    fn bohr_lift_round_trip(f in series(30)) {
        let smooth = f.map_terms(|n, c| if n % 7 == 0 || n % 11 == 0 || n % 13 == 0 || n % 17 == 0 || n % 19 == 0 || n % 23 == 0 || n % 29 == 0 { Complex64::new(0.0, 0.0) } else { c });
        let p = smooth.bohr_lift(3).unwrap();
        let back = p.inverse_bohr_lift().unwrap();
        close(&smooth, &back, 30, 0.0)?;
    }
}

#[test]
fn zeta_truncation_agrees_with_tail_evaluation() {
    let z = DirichletSeries::zeta_truncation(1000);
    let e = z.evaluate(Complex64::new(2.0, 0.0));
    let partial: f64 = (1..=1000).map(|n| (n as f64).powi(-2)).sum();
    assert!((e.value.re - partial).abs() < 1e-12);
    assert!(e.tail_bound >= std::f64::consts::PI.powi(2) / 6.0 - partial - 1e-12);
}

#[test]
fn sparse_storage_for_lacunary_series() {
    let f = DirichletSeries::from_terms(1u64 << 32, [2u64, 5, 17, 257, 65537].map(|p| (p, Complex64::new(1.0, 0.0)))).unwrap();
    assert!(f.is_sparse());
    assert_eq!(f.nnz(), 5);
    assert_eq!(f.coefficient(257), Complex64::new(1.0, 0.0));
    assert_eq!(f.coefficient(258), Complex64::new(0.0, 0.0));
}
