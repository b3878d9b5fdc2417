//! Inputs shared by the benchmarks.

use stochlab::garch::{simulate_garch, GarchParams};
use stochlab::stable::{stable_sample, StableParams};
use stochlab::RngSeed;

/// Daily-scale symmetric 1.5-stable returns.
pub fn stable_returns(n: usize, seed: u64) -> Vec<f64> {
    stable_sample(n, &StableParams::symmetric(1.5, 0.001, 0.01), RngSeed::new(seed)).expect("valid parameters")
}

/// GARCH(1,1) returns with unit long-run variance.
pub fn garch_returns(n: usize, seed: u64) -> Vec<f64> {
    let params = GarchParams::garch11(0.05, 0.1, 0.85, 0.0).expect("valid parameters");
    simulate_garch(&params, n, RngSeed::new(seed)).expect("valid parameters")
}
