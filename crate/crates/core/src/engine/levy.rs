use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::grid::{SimPath, TimeGrid};
use crate::error::{invalid, Result};
use crate::rng::RngSeed;

pub const DEFAULT_VG_NU: f64 = 0.2;

/// Variance-gamma: `X_t = theta G_t + sigma W(G_t)` with `G` a gamma
/// subordinator of unit mean rate and variance rate `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VgParams {
    pub theta: f64,
    pub sigma: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
}

fn default_nu() -> f64 {
    DEFAULT_VG_NU
}

impl VgParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid(format!("VG sigma must be >= 0, got {}", self.sigma)));
        }
        check_nu(self.nu)?;
        if !self.theta.is_finite() {
            return Err(invalid("VG theta must be finite"));
        }
        Ok(())
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("gamma variance rate must be positive, got {nu}")))
    }
}

fn gamma_step(dt: f64, nu: f64) -> Gamma<f64> {
    Gamma::new(dt / nu, nu).expect("shape and scale are positive")
}

/// Gamma process with `G(t0) = 0` and increments `Gamma(shape = Δt/nu, scale = nu)`,
/// so `E[ΔG] = Δt` and `Var[ΔG] = nu Δt`.
pub fn gamma_subordinator(nu: f64, grid: &TimeGrid, seed: RngSeed) -> Result<SimPath> {
    check_nu(nu)?;
    let mut rng = seed.rng();
    let mut g = 0.0;
    let mut states = Vec::with_capacity(grid.len());
    states.push(vec![0.0]);
    for dt in grid.steps() {
        g += gamma_step(dt, nu).sample(&mut rng);
        states.push(vec![g]);
    }
    SimPath::new(grid.clone(), states, vec!["G".into()])
}

/// Variance-gamma path with dimensions `X` and the random clock `G`.
pub fn simulate_vg(p: &VgParams, grid: &TimeGrid, seed: RngSeed) -> Result<SimPath> {
    p.validate()?;
    let mut rng = seed.rng();
    let (mut g, mut w) = (0.0, 0.0);
    let mut states = Vec::with_capacity(grid.len());
    states.push(vec![0.0, 0.0]);
    for dt in grid.steps() {
        let dg = gamma_step(dt, p.nu).sample(&mut rng);
        let z: f64 = rng.sample(StandardNormal);
        g += dg;
        w += dg.sqrt() * z;
        states.push(vec![p.theta * g + p.sigma * w, g]);
    }
    SimPath::new(grid.clone(), states, vec!["X".into(), "G".into()])
}
