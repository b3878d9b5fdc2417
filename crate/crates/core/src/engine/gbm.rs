use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::grid::{SimPath, TimeGrid};
use crate::error::{invalid, Result};
use crate::rng::RngSeed;

/// `dS/S = mu dt + sigma dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmParams {
    pub mu: f64,
    pub sigma: f64,
    pub s0: f64,
}

impl GbmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid(format!("GBM sigma must be >= 0, got {}", self.sigma)));
        }
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(invalid(format!("GBM s0 must be > 0, got {}", self.s0)));
        }
        if !self.mu.is_finite() {
            return Err(invalid("GBM mu must be finite"));
        }
        Ok(())
    }
}

/// Exact log-space scheme `S[k+1] = S[k] exp((mu - sigma²/2) Δt + sigma ΔW)`.
pub fn simulate_gbm(p: &GbmParams, grid: &TimeGrid, seed: RngSeed) -> Result<SimPath> {
    p.validate()?;
    let mut rng = seed.rng();
    let drift = p.mu - 0.5 * p.sigma * p.sigma;
    let mut s = p.s0;
    let mut states = Vec::with_capacity(grid.len());
    states.push(vec![s]);
    for dt in grid.steps() {
        let z: f64 = rng.sample(StandardNormal);
        s *= (drift * dt + p.sigma * dt.sqrt() * z).exp();
        states.push(vec![s]);
    }
    SimPath::new(grid.clone(), states, vec!["S".into()])
}
