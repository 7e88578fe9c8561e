//! Parallel-vs-sequential comparison of the data-parallel inner loops. The
//! `library` rows exercise the crate entry points (rayon-backed under the
//! default `parallel` feature); the `sequential_baseline` rows run the same
//! public per-point math in a plain loop. Building the bench with
//! `--no-default-features` measures the crate's sequential fallback instead.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use dfp::search::{optimize_single, SearchConfig};
use dfp::tomo::{born_table, povm_zx};
use dfp::wfh::{
    coherent_alpha_scan, outcome_fisher, ProbeField, WfhDetector, WfhError, DEFAULT_FD_STEP,
};
use dfp::{
    coefficient_derivatives, decompose, density_of, evolve, fisher_from_dfp, positivity_filter,
    ChannelOrder, ChannelParams, DfpTable, PureQubit,
};

fn grid_objective(table: &DfpTable, params: &ChannelParams, probe: &PureQubit) -> Option<f64> {
    let c = decompose(&density_of(&evolve(probe, params).ok()?));
    if !positivity_filter(&c, table, 0.0) {
        return None;
    }
    let (dphi, _) = coefficient_derivatives(probe, params);
    fisher_from_dfp(&c, &[&dphi], table)
        .ok()
        .map(|f| f.get(0, 0))
}

fn bench_probe_grid(c: &mut Criterion) {
    let table = born_table(&povm_zx(0.55, 0.45).unwrap());
    let channel = ChannelParams::new(0.0, 0.0, ChannelOrder::Vu).unwrap();
    // grid only: the simplex refinement is sequential either way
    let config = SearchConfig {
        starts: 0,
        ..SearchConfig::default()
    };

    let mut group = c.benchmark_group("probe_grid");
    group.sample_size(10);
    group.bench_function("library", |b| {
        b.iter(|| optimize_single(black_box(&table), &channel, 0.0, &config).unwrap())
    });
    group.bench_function("sequential_baseline", |b| {
        b.iter(|| {
            let mut best = f64::NEG_INFINITY;
            for i in 0..=config.polar_steps {
                let polar = std::f64::consts::PI * i as f64 / config.polar_steps as f64;
                for j in 0..config.azimuth_steps {
                    let azimuth = std::f64::consts::TAU * j as f64 / config.azimuth_steps as f64;
                    let probe = PureQubit::from_spherical(polar, azimuth);
                    if let Some(f) = grid_objective(&table, &channel, &probe) {
                        best = best.max(f);
                    }
                }
            }
            black_box(best)
        })
    });
    group.finish();
}

fn bench_wfh_scan(c: &mut Criterion) {
    let det = WfhDetector::new(Complex64::new(1.0, 0.0), 4).unwrap();
    let alphas: Vec<f64> = (0..=100).map(|i| 0.02 * i as f64).collect();

    let mut group = c.benchmark_group("wfh_alpha_scan");
    group.sample_size(10);
    group.bench_function("library", |b| {
        b.iter(|| coherent_alpha_scan(black_box(&det), &alphas, 0.1, DEFAULT_FD_STEP).unwrap())
    });
    group.bench_function("sequential_baseline", |b| {
        b.iter(|| {
            let mut totals = Vec::with_capacity(alphas.len());
            for &alpha in &alphas {
                let probe = ProbeField::Coherent(Complex64::new(alpha, 0.0));
                let mut total = 0.0;
                for x in det.outcomes() {
                    match outcome_fisher(&det, x, &probe, 0.1, DEFAULT_FD_STEP) {
                        Ok(f) => total += f,
                        Err(WfhError::FloorViolation { .. }) => {}
                        Err(e) => panic!("{e}"),
                    }
                }
                totals.push(total);
            }
            black_box(totals)
        })
    });
    group.finish();
}

criterion_group!(benches, bench_probe_grid, bench_wfh_scan);
criterion_main!(benches);
