//! Parallel vs sequential timing of the grid-heavy kernels. The library's
//! public entry points run on rayon when the `parallel` feature is enabled
//! (the default); the `*_sequential` baselines drive the same per-point
//! operations from a plain loop.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use bandtime::arrival::{arrival_state, reconstruct_position, XGrid};
use bandtime::band::{BandGrid, GaugePhase};
use bandtime::scattering::{amplitudes, scattering_table, PotentialSpec};
use bandtime::timeop::{distribution, eigenstate_overlap, DistributionOptions};

fn bench_scattering_table(c: &mut Criterion) {
    let potential = PotentialSpec::double_delta_barrier(1.0, 10.0, 0.3).unwrap();
    let grid = BandGrid::new(0.2, 0.4, 1601).unwrap();

    let mut group = c.benchmark_group("scattering_table");
    group.bench_function("parallel", |b| {
        b.iter(|| scattering_table(black_box(&potential), black_box(&grid)).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let ts: Vec<_> = grid
                .energies()
                .map(|eps| amplitudes(black_box(&potential), eps).unwrap().transmission)
                .collect();
            black_box(ts)
        })
    });
    group.finish();
}

fn bench_distribution(c: &mut Criterion) {
    let grid = BandGrid::new(0.2, 0.4, 1601).unwrap();
    let potential = PotentialSpec::double_delta_barrier(1.0, 10.0, 0.3).unwrap();
    let table = scattering_table(&potential, &grid).unwrap();
    let scenario = bandtime::arrival::Scenario::new(
        potential,
        grid,
        100.0,
        0.0,
        bandtime::arrival::GaugeKind::Constant,
        DistributionOptions {
            tail_tol: 1e-6,
            m_cap: 1 << 14,
        },
    )
    .unwrap();
    let projected = bandtime::arrival::project_right(&scenario, &table).unwrap();
    let gauge = GaugePhase::zero(grid);

    let mut group = c.benchmark_group("arrival_distribution");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            distribution(
                black_box(&projected.amplitude),
                &gauge,
                DistributionOptions {
                    tail_tol: 1e-6,
                    m_cap: 1 << 14,
                },
            )
            .unwrap()
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let mut mass = 0.0;
            for m in -256..=256 {
                mass += eigenstate_overlap(black_box(&projected.amplitude), m, &gauge)
                    .unwrap()
                    .norm_sqr();
            }
            black_box(mass)
        })
    });
    group.finish();
}

fn bench_reconstruction(c: &mut Criterion) {
    let grid = BandGrid::new(0.2, 0.4, 801).unwrap();
    let g = arrival_state(&grid, 100.0).normalized().unwrap();
    let free = PotentialSpec::free();
    let xg = XGrid::new(-200.0, 300.0, 1251).unwrap();

    let mut group = c.benchmark_group("position_reconstruction");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| reconstruct_position(black_box(&g), &free, (0.0, 10.0), &xg).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            // per-x quadrature driven from a plain loop
            let sols: Vec<_> = grid
                .energies()
                .map(|eps| amplitudes(&free, eps).unwrap())
                .collect();
            let dens: Vec<f64> = xg
                .points()
                .map(|x| {
                    let integrand: Vec<_> = sols
                        .iter()
                        .zip(g.samples())
                        .map(|(s, gz)| gz * s.value(x))
                        .collect();
                    grid.integrate(&integrand).unwrap().norm_sqr()
                })
                .collect();
            black_box(dens)
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_scattering_table,
    bench_distribution,
    bench_reconstruction
);
criterion_main!(benches);
