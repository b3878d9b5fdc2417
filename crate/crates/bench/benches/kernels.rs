use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use stochlab::calibration::simplex_minimize;
use stochlab::engine::{euler_maruyama, simulate_heston, FnSde, HestonParams};
use stochlab::garch::{garch_loglik, GarchParams};
use stochlab::stable::{standard_pdf, StableDensity};
use stochlab::{Objective, OptimizerOptions, RngSeed, TimeGrid};
use stochlab_bench::{garch_returns, stable_returns};

fn stable(c: &mut Criterion) {
    c.bench_function("stable pdf by inversion", |b| b.iter(|| standard_pdf(black_box(1.3), 1.5)));
    let density = StableDensity::new(1.5).unwrap();
    let xs = stable_returns(10_000, 1);
    c.bench_function("stable loglik 1e4", |b| b.iter(|| density.loglik(black_box(&xs), 0.001, 0.01)));
    c.bench_function("stable density table", |b| b.iter(|| StableDensity::new(black_box(1.5)).unwrap()));
}

fn garch(c: &mut Criterion) {
    let r = garch_returns(20_000, 2);
    let p = GarchParams::garch11(0.05, 0.1, 0.85, 0.0).unwrap();
    c.bench_function("garch loglik 2e4", |b| b.iter(|| garch_loglik(&p, black_box(&r)).unwrap()));
}

fn optimizers(c: &mut Criterion) {
    let rosen = Objective::new(2, |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
    let opts = OptimizerOptions::default();
    c.bench_function("simplex rosenbrock", |b| {
        b.iter(|| simplex_minimize(&rosen, black_box(&[-1.2, 1.0]), &opts).unwrap())
    });
}

fn paths(c: &mut Criterion) {
    let grid = TimeGrid::uniform(1.0, 1000).unwrap();
    let ou = FnSde {
        dim: 1,
        noise_dim: 1,
        drift: |_t: f64, x: &[f64], out: &mut [f64]| out[0] = -x[0],
        diffusion: |_t: f64, _x: &[f64], out: &mut [f64]| out[0] = 0.3,
    };
    c.bench_function("euler-maruyama 1e3 steps", |b| {
        b.iter(|| euler_maruyama(&ou, black_box(&[1.0]), &grid, RngSeed::new(3)).unwrap())
    });
    let heston = HestonParams {
        mu: 0.05,
        kappa: 2.0,
        theta: 0.04,
        xi: 0.3,
        rho: -0.7,
        s0: 100.0,
        v0: 0.04,
    };
    c.bench_function("heston 1e3 steps", |b| {
        b.iter(|| simulate_heston(black_box(&heston), &grid, RngSeed::new(4)).unwrap())
    });
}

criterion_group!(benches, stable, garch, optimizers, paths);
criterion_main!(benches);
