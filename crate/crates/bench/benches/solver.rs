use criterion::{black_box, criterion_group, criterion_main, Criterion};
use wetlab_core::*;

fn small() -> SolverConfig {
    SolverConfig { nodes_x: 33, nodes_y: 16, ..Default::default() }
}

fn bench_solve(c: &mut Criterion) {
    let cfg = small();
    let flat = SurfaceSpec::catalog(Geometry::Flat, Chemistry::Uniform { theta: 60f64.to_radians() }, 0.125).unwrap();
    let wave = SurfaceSpec::catalog(
        Geometry::WaveY { amplitude: 0.1 },
        Chemistry::Uniform { theta: 60f64.to_radians() },
        0.125,
    )
    .unwrap();
    let mut g = c.benchmark_group("solve_free");
    g.sample_size(10);
    g.bench_function("flat_60", |b| b.iter(|| solve_free(black_box(&flat), 0.0, &cfg).unwrap()));
    g.bench_function("wave_y_60", |b| b.iter(|| solve_free(black_box(&wave), 0.0, &cfg).unwrap()));
    g.finish();
}

fn bench_formula(c: &mut Criterion) {
    let spec = SurfaceSpec::catalog(
        Geometry::WaveZ { amplitude: 0.1 },
        Chemistry::Uniform { theta: 90f64.to_radians() },
        0.25,
    )
    .unwrap();
    c.bench_function("lift_and_average_256", |b| {
        b.iter(|| lift_contact_line(&spec, |_| black_box(0.03), 256).unwrap().apparent_cosine())
    });
    c.bench_function("angle_vs_offset_64", |b| b.iter(|| angle_vs_offset(black_box(&spec), 64).unwrap()));
}

criterion_group!(benches, bench_solve, bench_formula);
criterion_main!(benches);
