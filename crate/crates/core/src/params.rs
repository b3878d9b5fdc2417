//! Parameter sets for every model, tagged by name, and a single simulation
//! entry point over them.

use serde::{Deserialize, Serialize};

use crate::engine::{
    sample_fbm, simulate_gbm, simulate_heston, simulate_vg, FbmParams, GbmParams, HestonParams, SimPath,
    TimeGrid, VgParams,
};
use crate::error::{invalid, Result};
use crate::garch::{simulate_garch, GarchParams};
use crate::reaction::{MarketState, RateConstants, ReactionModel, ReactionVariant};
use crate::rng::RngSeed;
use crate::stable::{stable_sample, StableParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gbm,
    Reaction,
    Heston,
    Fbm,
    Garch,
    Vg,
    Stable,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Gbm,
        ModelKind::Reaction,
        ModelKind::Heston,
        ModelKind::Fbm,
        ModelKind::Garch,
        ModelKind::Vg,
        ModelKind::Stable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gbm => "gbm",
            ModelKind::Reaction => "reaction",
            ModelKind::Heston => "heston",
            ModelKind::Fbm => "fbm",
            ModelKind::Garch => "garch",
            ModelKind::Vg => "vg",
            ModelKind::Stable => "stable",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionParams {
    #[serde(flatten)]
    pub rates: RateConstants,
    pub s0: f64,
    pub v0: f64,
    /// Zero gives the deterministic path.
    #[serde(default)]
    pub noise_scale: f64,
    #[serde(default)]
    pub variant: ReactionVariant,
}

/// Parameters of one model. Serialized with a `"model"` tag, e.g.
/// `{"model": "gbm", "mu": 0.05, "sigma": 0.2, "s0": 100}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    Gbm(GbmParams),
    Reaction(ReactionParams),
    Heston(HestonParams),
    Fbm(FbmParams),
    Garch(GarchParams),
    Vg(VgParams),
    Stable(StableParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Gbm(_) => ModelKind::Gbm,
            ModelParams::Reaction(_) => ModelKind::Reaction,
            ModelParams::Heston(_) => ModelKind::Heston,
            ModelParams::Fbm(_) => ModelKind::Fbm,
            ModelParams::Garch(_) => ModelKind::Garch,
            ModelParams::Vg(_) => ModelKind::Vg,
            ModelParams::Stable(_) => ModelKind::Stable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimulateOptions {
    /// Integrate a noiseless reaction model with explicit Euler instead of RK4.
    pub euler: bool,
}

/// One path of the model on `grid`.
///
/// GARCH and stable returns are accumulated into a log-price-like path `X`
/// starting at 0. GARCH takes one return per grid step; stable increments
/// over `Δt` have location `loc Δt` and scale `scale Δt^{1/α}`.
pub fn simulate(params: &ModelParams, grid: &TimeGrid, seed: RngSeed, opts: SimulateOptions) -> Result<SimPath> {
    match params {
        ModelParams::Gbm(p) => simulate_gbm(p, grid, seed),
        ModelParams::Heston(p) => simulate_heston(p, grid, seed),
        ModelParams::Fbm(p) => sample_fbm(p, grid, seed),
        ModelParams::Vg(p) => simulate_vg(p, grid, seed),
        ModelParams::Reaction(p) => {
            p.rates.validate()?;
            let model = ReactionModel::new(p.rates).with_variant(p.variant);
            let x0 = MarketState::new(p.s0, p.v0);
            if p.noise_scale > 0.0 {
                model.simulate_stochastic(x0, grid, p.noise_scale, seed)
            } else if opts.euler {
                model.simulate_euler(x0, grid)
            } else {
                model.simulate_deterministic(x0, grid)
            }
        }
        ModelParams::Garch(p) => {
            let r = simulate_garch(p, grid.len() - 1, seed)?;
            cumulative(grid, &r)
        }
        ModelParams::Stable(p) => {
            p.validate()?;
            let z = stable_sample(grid.len() - 1, &StableParams::symmetric(p.alpha, 0.0, 1.0), seed)?;
            let inc: Vec<f64> = grid
                .steps()
                .zip(&z)
                .map(|(dt, z)| p.loc * dt + p.scale * dt.powf(1.0 / p.alpha) * z)
                .collect();
            cumulative(grid, &inc)
        }
    }
}

fn cumulative(grid: &TimeGrid, increments: &[f64]) -> Result<SimPath> {
    let mut x = 0.0;
    let mut states = Vec::with_capacity(grid.len());
    states.push(vec![0.0]);
    for d in increments {
        x += d;
        states.push(vec![x]);
    }
    SimPath::new(grid.clone(), states, vec!["X".into()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_tagging() {
        let p: ModelParams = serde_json::from_str(r#"{"model":"gbm","mu":0.05,"sigma":0.2,"s0":100}"#).unwrap();
        assert_eq!(p, ModelParams::Gbm(GbmParams { mu: 0.05, sigma: 0.2, s0: 100.0 }));
        let p: ModelParams =
            serde_json::from_str(r#"{"model":"reaction","k1":0.1,"k2":0.2,"k3":0.01,"k4":0.05,"s0":0.5,"v0":0.05}"#)
                .unwrap();
        assert_eq!(p.kind(), ModelKind::Reaction);
        let back: ModelParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let p: ModelParams = serde_json::from_str(r#"{"model":"vg","theta":0.1,"sigma":0.2}"#).unwrap();
        assert_eq!(p, ModelParams::Vg(VgParams { theta: 0.1, sigma: 0.2, nu: 0.2 }));
        assert!(serde_json::from_str::<ModelParams>(r#"{"model":"jump","a":1}"#).is_err());
    }

    #[test]
    fn every_model_simulates() {
        let grid = TimeGrid::uniform(1.0, 50).unwrap();
        let all = [
            ModelParams::Gbm(GbmParams { mu: 0.05, sigma: 0.2, s0: 100.0 }),
            ModelParams::Reaction(ReactionParams {
                rates: RateConstants::new(0.1, 0.2, 0.01, 0.05).unwrap(),
                s0: 0.5,
                v0: 0.05,
                noise_scale: 0.01,
                variant: ReactionVariant::Bilinear,
            }),
            ModelParams::Heston(HestonParams {
                mu: 0.0,
                kappa: 2.0,
                theta: 0.04,
                xi: 0.3,
                rho: -0.7,
                s0: 100.0,
                v0: 0.04,
            }),
            ModelParams::Fbm(FbmParams { hurst: 0.7, scale: 1.0 }),
            ModelParams::Garch(GarchParams::garch11(0.05, 0.1, 0.85, 0.0).unwrap()),
            ModelParams::Vg(VgParams { theta: 0.1, sigma: 0.2, nu: 0.2 }),
            ModelParams::Stable(StableParams::symmetric(1.5, 0.001, 0.01)),
        ];
        for (p, kind) in all.iter().zip(ModelKind::ALL) {
            assert_eq!(p.kind(), kind);
            let a = simulate(p, &grid, RngSeed::new(3), SimulateOptions::default()).unwrap();
            let b = simulate(p, &grid, RngSeed::new(3), SimulateOptions::default()).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.states.len(), 51);
        }
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelKind::ALL {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        assert!("levy".parse::<ModelKind>().is_err());
    }
}
