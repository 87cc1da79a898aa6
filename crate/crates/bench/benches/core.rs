use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use dvlab_bench::dense_series;
use dvlab_core::volterra::{finite_section_matrix, operator_norm_estimate};
use dvlab_core::{AdmissibleMeasure, DirichletSeries, QuadratureConfig};

fn multiply(c: &mut Criterion) {
    let mut g = c.benchmark_group("multiply");
    for n in [1_000u64, 10_000, 100_000] {
        let (f, h) = (dense_series(n), dense_series(n));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| black_box(f.multiply(&h, n))));
    }
    g.finish();
}

fn weight_table(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let mut g = c.benchmark_group("weight_rule");
    g.sample_size(10);
    for (name, mu) in [("mu_alpha_1", AdmissibleMeasure::mu_alpha(1.0).unwrap()), ("nu_gamma_2", AdmissibleMeasure::nu_gamma(2.0).unwrap())] {
        g.bench_function(name, |b| b.iter(|| black_box(mu.weight_rule(1 << 12, &cfg).unwrap())));
    }
    g.finish();
}

fn norm_estimate(c: &mut Criterion) {
    let mu = AdmissibleMeasure::mu_alpha(0.0).unwrap();
    let g = DirichletSeries::from_real(&[0.0, 1.0, -0.5, 0.0, 0.25]);
    let mut group = c.benchmark_group("operator_norm_estimate");
    for n in [256usize, 2048] {
        let m = finite_section_matrix(&g, &mu, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| black_box(operator_norm_estimate(m, 2000, 1e-13).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, multiply, weight_table, norm_estimate);
criterion_main!(benches);
