//! Sequential against rayon execution on the data-parallel workloads.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use motherbody::conformal::solve_conformal;
use motherbody::measures::MeasurePair;
use motherbody::model::ModelParams;
use motherbody::oracle::{solve_kernel_route, OracleParams};
use motherbody::spectral::SpectralCurve;
use motherbody::{Exec, C64};

fn policies() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn bench(c: &mut Criterion) {
    let cd = solve_conformal(&ModelParams::new(2.0, 1.0, 0.1), 1e-13).unwrap();
    let mp = MeasurePair::new(&SpectralCurve::new(&cd).unwrap()).unwrap();
    let ext = [cd.f(C64::from_polar(1.4, 0.3))];
    let int = [0.6 * cd.f(C64::from_polar(1.0, 1.0))];
    let op = OracleParams::from_floats(24, 240, 2.0, 1.0).unwrap();

    let mut g = c.benchmark_group("sweeps");
    g.sample_size(10);
    for (name, exec) in policies() {
        g.bench_with_input(BenchmarkId::new("droplet_quadrature", name), &exec, |b, &e| {
            b.iter(|| mp.droplet_potential_check(120, 160, &ext, &int, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("variational_check", name), &exec, |b, &e| {
            b.iter(|| mp.variational_check(16, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("kernel_route_24_240", name), &exec, |b, &e| {
            b.iter(|| solve_kernel_route(&op, e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
