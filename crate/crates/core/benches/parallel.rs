//! Sequential vs parallel execution of the data-parallel kernels.
//!
//! Build with `--no-default-features` to confirm both modes collapse to the
//! sequential path when rayon is not compiled in.

use std::hint::black_box;

use asgrowth_core::arima::{fit_many, ArimaSpec, FitOptions};
use asgrowth_core::changepoint::{segneigh_with, PenaltySpec, SearchOptions};
use asgrowth_core::exec::Mode;
use asgrowth_core::sim::{monte_carlo, rng_for, ArimaProcess};
use asgrowth_core::Series;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use rand_distr::StandardNormal;

const MODES: [(&str, Mode); 2] = [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)];

fn variance_shift(n: usize) -> Series {
    let mut rng = rng_for(11, 0);
    let y = (0..n)
        .map(|i| if i < n / 2 { 1.0 } else { 4.0 } * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Series::new(y).unwrap()
}

fn bench_segneigh(c: &mut Criterion) {
    let mut group = c.benchmark_group("segneigh");
    for n in [200, 800] {
        let s = variance_shift(n);
        for (name, mode) in MODES {
            let opts = SearchOptions { mode, ..SearchOptions::default() };
            group.bench_with_input(BenchmarkId::new(name, n), &s, |b, s| {
                b.iter(|| segneigh_with(black_box(s), PenaltySpec::sic(), 5, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_fit_many(c: &mut Criterion) {
    let process = ArimaProcess { ar: vec![0.6], ma: vec![0.3], d: 1, drift: 0.5, sigma: 1.0 };
    let s = Series::new(process.simulate(&mut rng_for(12, 0), 120, 50)).unwrap();
    let specs: Vec<ArimaSpec> = (0..=2)
        .flat_map(|p| (0..=2).map(move |q| ArimaSpec::new(p, 1, q)))
        .collect();
    let mut group = c.benchmark_group("fit_many");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| fit_many(black_box(&s), &specs, &FitOptions::default(), mode))
        });
    }
    group.finish();
}

fn bench_monte_carlo(c: &mut Criterion) {
    let process = ArimaProcess { ar: vec![0.7], ma: vec![0.4], d: 1, drift: 0.0, sigma: 1.0 };
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                monte_carlo(mode, 16, 13, |_, rng| {
                    let s = Series::new(process.simulate(rng, 200, 50)).unwrap();
                    asgrowth_core::arima::fit(&s, ArimaSpec::new(1, 1, 1)).map(|f| f.ar[0]).ok()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_segneigh, bench_fit_many, bench_monte_carlo);
criterion_main!(benches);
