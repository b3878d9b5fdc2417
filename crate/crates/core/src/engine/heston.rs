use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::grid::{SimPath, TimeGrid};
use crate::error::{invalid, Result};
use crate::rng::RngSeed;

/// Heston stochastic volatility:
///
/// ```text
/// dS = mu S dt + sqrt(v) S dW1
/// dv = kappa (theta - v) dt + xi sqrt(v) dW2,   d<W1, W2> = rho dt
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonParams {
    pub mu: f64,
    pub kappa: f64,
    pub theta: f64,
    pub xi: f64,
    pub rho: f64,
    pub s0: f64,
    pub v0: f64,
}

impl HestonParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.kappa > 0.0
            && self.theta >= 0.0
            && self.xi >= 0.0
            && (-1.0..=1.0).contains(&self.rho)
            && self.s0 > 0.0
            && self.v0 >= 0.0
            && self.mu.is_finite()
            && [self.kappa, self.theta, self.xi, self.s0, self.v0]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid Heston parameters {self:?}")))
        }
    }

    /// `2 kappa theta / xi²`; at least 1 when the Feller condition holds.
    pub fn feller_ratio(&self) -> f64 {
        2.0 * self.kappa * self.theta / (self.xi * self.xi)
    }
}

/// Full-truncation Euler. The variance recursion uses `max(v, 0)` in both
/// drift and diffusion; the reported variance is that truncated value, so it
/// is never negative. The price is advanced in log space with the same
/// truncated variance and correlated increments.
pub fn simulate_heston(p: &HestonParams, grid: &TimeGrid, seed: RngSeed) -> Result<SimPath> {
    p.validate()?;
    let mut rng = seed.rng();
    let rho_perp = (1.0 - p.rho * p.rho).max(0.0).sqrt();
    let mut log_s = p.s0.ln();
    let mut v = p.v0;
    let mut states = Vec::with_capacity(grid.len());
    states.push(vec![p.s0, p.v0]);
    for dt in grid.steps() {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let sd = dt.sqrt();
        let dw_v = sd * z2;
        let dw_s = sd * (p.rho * z2 + rho_perp * z1);
        let vp = v.max(0.0);
        log_s += (p.mu - 0.5 * vp) * dt + vp.sqrt() * dw_s;
        v += p.kappa * (p.theta - vp) * dt + p.xi * vp.sqrt() * dw_v;
        states.push(vec![log_s.exp(), v.max(0.0)]);
    }
    SimPath::new(grid.clone(), states, vec!["S".into(), "v".into()])
}
