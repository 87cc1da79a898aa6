//! Fixtures shared by the criterion benches.

use dvlab_core::{Complex64, DirichletSeries};

/// Dense series with coefficients `e^{i n}/n`.
pub fn dense_series(n: u64) -> DirichletSeries {
    DirichletSeries::from_coefficients((1..=n).map(|k| Complex64::from_polar(1.0 / k as f64, k as f64)).collect())
}
