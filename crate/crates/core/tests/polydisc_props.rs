use dvlab_core::polydisc::{
    bergman_norm_polydisc, centered_composed_norm, garsia_norm, halton_centers, polydisc_bloch_seminorm, radicality_check,
    MobiusTuple, PolydiscGrid,
};
use dvlab_core::sampling::{torus_mean, TorusRule};
use dvlab_core::{Complex64, PolydiscPolynomial};
use proptest::prelude::*;

fn poly(d: usize, deg: u32) -> impl Strategy<Value = PolydiscPolynomial> {
    let count = (deg as usize + 1).pow(d as u32);
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), count).prop_map(move |v| {
        let mut p = PolydiscPolynomial::zero(d);
        for (i, (re, im)) in v.into_iter().enumerate() {
            let mut r = i;
            let alpha: Vec<u32> = (0..d)
                .map(|_| {
                    let e = (r % (deg as usize + 1)) as u32;
                    r /= deg as usize + 1;
                    e
                })
                .collect();
            p.add_term(alpha, Complex64::new(re, im));
        }
        p
    })
}

fn disc_point() -> impl Strategy<Value = Complex64> {
    (0.0f64..0.9, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn tuple(d: usize) -> impl Strategy<Value = MobiusTuple> {
    (
        prop::collection::vec(disc_point(), d),
        prop::collection::vec(0.0f64..std::f64::consts::TAU, d),
        Just((0..d).collect::<Vec<usize>>()).prop_shuffle(),
    )
        .prop_map(|(a, e, p)| MobiusTuple::new(a, e.into_iter().map(|t| Complex64::from_polar(1.0, t)).collect(), p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pythagoras(f in poly(2, 2), k in 1u32..4) {
        let fk = f.pow(k, None).unwrap();
        let mut centered = fk.clone();
        centered.add_term(vec![0, 0], -fk.constant_term());
        let lhs = bergman_norm_polydisc(&centered).powi(2);
        let rhs = bergman_norm_polydisc(&fk).powi(2) - f.constant_term().norm_sqr().powi(k as i32);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs));
    }

    #[test]
    fn mobius_invariance_of_bloch_quantity(f in poly(2, 3), phi in tuple(2), z in prop::collection::vec(disc_point(), 2)) {
        let h = 1e-5;
        let composed = |w: &[Complex64]| f.evaluate(&phi.apply(w));
        let image = phi.apply(&z);
        for j in 0..2 {
            let i = phi.permutation[j];
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] += h;
            zm[i] -= h;
            let d_composed = (composed(&zp) - composed(&zm)) / (2.0 * h);
            let lhs = d_composed.norm() * (1.0 - z[i].norm_sqr());
            let rhs = f.partial_derivative(j).evaluate(&image).norm() * (1.0 - image[j].norm_sqr());
            prop_assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + rhs), "j={} {} vs {}", j, lhs, rhs);
        }
    }

    #[test]
    fn centered_norm_chain_is_monotone(f in poly(2, 2)) {
        let id = MobiusTuple::identity_like(2);
        let mut prev = 0.0;
        for m in 1..=5u32 {
            let v = centered_composed_norm(&f.pow(m, None).unwrap(), &id).unwrap().powf(1.0 / m as f64);
            prop_assert!(v >= prev * (1.0 - 1e-12), "m={} {} < {}", m, v, prev);
            prev = v;
        }
    }

    #[test]
    fn radicality_without_violations(f in poly(2, 2), n in 2u32..5) {
        let centers = halton_centers(2, 12, 0.95);
        for m in 1..n {
            let r = radicality_check(&f, n, m, &centers, n * 2).unwrap();
            prop_assert!(r.violations.is_empty(), "{:?}", r.rows);
        }
    }

    #[test]
    fn exact_and_truncated_garsia_agree(f in poly(1, 3), phi in tuple(1)) {
        let r = garsia_norm(&f, &[phi], 120).unwrap();
        prop_assert!(r.truncation_tail < 1e-4);
        prop_assert!((r.value - r.truncated_value).abs() <= r.truncation_tail + 1e-10);
    }
}

#[test]
fn bergman_norm_matches_area_integral() {
    // |F|² averaged over 𝔻² with z = √u e^{2πiθ}, area-uniform in each factor
    let f = PolydiscPolynomial::from_terms(
        2,
        [(vec![0, 0], Complex64::new(0.5, 0.0)), (vec![1, 2], Complex64::new(1.0, -1.0)), (vec![3, 0], Complex64::new(0.0, 2.0))],
    )
    .unwrap();
    let est = torus_mean(4, 200_000, 5, TorusRule::MonteCarlo, |x| {
        let z = [Complex64::from_polar(x[0].sqrt(), std::f64::consts::TAU * x[1]), Complex64::from_polar(x[2].sqrt(), std::f64::consts::TAU * x[3])];
        f.evaluate(&z).norm_sqr()
    });
    let exact = bergman_norm_polydisc(&f).powi(2);
    assert!((est.mean - exact).abs() < 3.0 * est.std_error, "{} vs {exact} (se {})", est.mean, est.std_error);
}

#[test]
fn truncated_log_seminorm_matches_radial_scan() {
    // F = Σ_{k=1}^{200} z^k/k; on the positive axis |F'(r)|(1−r²) = (1+r)(1−r^200), which is the maximum over each circle
    let f = PolydiscPolynomial::from_terms(1, (1..=200u32).map(|k| (vec![k], Complex64::new(1.0 / k as f64, 0.0)))).unwrap();
    let scan = (0..=200_000).map(|i| i as f64 / 200_000.0).map(|r| (1.0 + r) * (1.0 - r.powi(200))).fold(0.0, f64::max);
    let grid = PolydiscGrid { radii: (0..=400).map(|i| i as f64 / 400.0 * 0.999).collect(), n_angles: 8 };
    let est = polydisc_bloch_seminorm(&f, &grid);
    assert!(est.value <= scan + 1e-12);
    assert!(est.value >= 0.99 * scan, "{} vs scan {scan}", est.value);
    assert!(scan > 1.9 && scan < 2.0);
}

#[test]
fn garsia_and_bloch_are_comparable() {
    let grid = PolydiscGrid { radii: (0..=30).map(|i| i as f64 / 31.0).collect(), n_angles: 12 };
    let centers = halton_centers(2, 30, 0.95);
    let mut ratios = Vec::new();
    let mut rng = dvlab_core::sampling::rng(3);
    use rand::Rng;
    for _ in 0..10 {
        let mut f = PolydiscPolynomial::zero(2);
        for a in 0..3u32 {
            for b in 0..3u32 {
                if a + b > 0 {
                    f.add_term(vec![a, b], Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
        }
        let g = garsia_norm(&f, &centers, 8).unwrap().value;
        let b = polydisc_bloch_seminorm(&f, &grid).value;
        ratios.push(g / b);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    assert!(lo > 0.0 && hi / lo < 10.0, "bracket [{lo}, {hi}]");
}
