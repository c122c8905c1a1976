use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gammaflow::conjectures::asymptotic_fit;
use gammaflow::numerics::ZPoint;
use gammaflow::parallel::Schedule;
use gammaflow::space::Space;
use gammaflow::stokes::{asymptotic_basis, BasisOptions, QdmPoint};
use gammaflow::PrecisionContext;

const SCHEDULES: [(&str, Schedule); 2] = [("sequential", Schedule::Sequential), ("parallel", Schedule::Parallel)];

fn j_grid(c: &mut Criterion) {
    let ctx = PrecisionContext::with_digits(50).unwrap();
    let space = Space::projective(2).unwrap();
    let grid: Vec<f64> = (0..16).map(|k| 20.0 + 3.0 * f64::from(k)).collect();
    let mut g = c.benchmark_group("j_grid_P2");
    g.sample_size(10);
    for (name, schedule) in SCHEDULES {
        g.bench_function(name, |b| b.iter(|| asymptotic_fit(black_box(&space), &grid, &ctx, schedule).unwrap()));
    }
    g.finish();
}

fn asymptotic_channels(c: &mut Criterion) {
    let ctx = PrecisionContext::with_digits(50).unwrap();
    let space = Space::projective(2).unwrap();
    let point = QdmPoint::at(&space, &ZPoint::from_f64(ctx.bits(), 1.0, 0.0), ctx.bits()).unwrap();
    let mut g = c.benchmark_group("asymptotic_basis_P2");
    g.sample_size(10);
    for (name, schedule) in SCHEDULES {
        let opts = BasisOptions { schedule, ..Default::default() };
        g.bench_function(name, |b| b.iter(|| asymptotic_basis(black_box(&point), None, &ctx, opts).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, j_grid, asymptotic_channels);
criterion_main!(benches);
