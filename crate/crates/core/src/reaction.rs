//! Two-species price/volatility reaction model.
//!
//! Species are the price `S` and the volatility `V`. With rate constants
//! `k1..k4` the canonical (bilinear) drift is
//!
//! ```text
//! dS/dt = k1 S V - k3 S
//! dV/dt = k2 S V - k4 V
//! ```
//!
//! A linear variant built directly from the propensities
//! (`dS/dt = k2 V - k3 S`, `dV/dt = k1 S - k4 V`) is available through
//! [`ReactionVariant::Linear`].

use serde::{Deserialize, Serialize};

use crate::engine::{euler_maruyama, SdeSystem, SimPath, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
}

impl RateConstants {
    pub fn new(k1: f64, k2: f64, k3: f64, k4: f64) -> Result<Self> {
        let k = Self { k1, k2, k3, k4 };
        k.validate()?;
        Ok(k)
    }

    pub fn from_slice(k: &[f64]) -> Result<Self> {
        match k {
            [k1, k2, k3, k4] => Self::new(*k1, *k2, *k3, *k4),
            _ => Err(invalid(format!("expected 4 rate constants, got {}", k.len()))),
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.k1, self.k2, self.k3, self.k4]
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err(invalid(format!("rate constants must be finite and nonnegative: {self:?}")))
        }
    }
}

impl std::str::FromStr for RateConstants {
    type Err = Error;

    /// Parses `k1,k2,k3,k4`.
    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| invalid(format!("bad rate constant {p:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_slice(&values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "V")]
    pub v: f64,
}

impl MarketState {
    pub const fn new(s: f64, v: f64) -> Self {
        Self { s, v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionVariant {
    #[default]
    Bilinear,
    Linear,
}

/// Rate constants plus drift variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionModel {
    pub rates: RateConstants,
    pub variant: ReactionVariant,
}

impl ReactionModel {
    pub fn new(rates: RateConstants) -> Self {
        Self {
            rates,
            variant: ReactionVariant::Bilinear,
        }
    }

    pub fn with_variant(mut self, variant: ReactionVariant) -> Self {
        self.variant = variant;
        self
    }

    /// Rate terms feeding each species, as `(S terms, V terms)`.
    fn terms(&self, s: f64, v: f64) -> ([f64; 2], [f64; 2]) {
        let k = &self.rates;
        match self.variant {
            ReactionVariant::Bilinear => ([k.k1 * s * v, k.k3 * s], [k.k2 * s * v, k.k4 * v]),
            ReactionVariant::Linear => ([k.k2 * v, k.k3 * s], [k.k1 * s, k.k4 * v]),
        }
    }

    pub fn drift(&self, x: MarketState) -> (f64, f64) {
        let (ts, tv) = self.terms(x.s, x.v);
        (ts[0] - ts[1], tv[0] - tv[1])
    }

    pub fn jacobian(&self, x: MarketState) -> [[f64; 2]; 2] {
        let k = &self.rates;
        match self.variant {
            ReactionVariant::Bilinear => [
                [k.k1 * x.v - k.k3, k.k1 * x.s],
                [k.k2 * x.v, k.k2 * x.s - k.k4],
            ],
            ReactionVariant::Linear => [[-k.k3, k.k2], [k.k1, -k.k4]],
        }
    }

    fn step_fn(&self) -> impl Fn(&[f64]) -> [f64; 2] + '_ {
        move |x| {
            let (ds, dv) = self.drift(MarketState::new(x[0], x[1]));
            [ds, dv]
        }
    }

    /// Fixed-step classical Runge–Kutta on the grid.
    pub fn simulate_deterministic(&self, x0: MarketState, grid: &TimeGrid) -> Result<SimPath> {
        let f = self.step_fn();
        integrate(x0, grid, |x, dt| {
            let k1 = f(x);
            let k2 = f(&[x[0] + 0.5 * dt * k1[0], x[1] + 0.5 * dt * k1[1]]);
            let k3 = f(&[x[0] + 0.5 * dt * k2[0], x[1] + 0.5 * dt * k2[1]]);
            let k4 = f(&[x[0] + dt * k3[0], x[1] + dt * k3[1]]);
            [
                x[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                x[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ]
        })
    }

    /// Explicit Euler, `X[k+1] = X[k] + f(X[k]) Δt`, without clamping.
    pub fn simulate_euler(&self, x0: MarketState, grid: &TimeGrid) -> Result<SimPath> {
        let f = self.step_fn();
        integrate(x0, grid, |x, dt| {
            let d = f(x);
            [x[0] + d[0] * dt, x[1] + d[1] * dt]
        })
    }

    /// Euler–Maruyama with diagonal noise. Each species gets
    /// `noise_scale · sqrt(sum of its rate terms)`; states are clamped at 0
    /// after every step.
    pub fn simulate_stochastic(
        &self,
        x0: MarketState,
        grid: &TimeGrid,
        noise_scale: f64,
        seed: RngSeed,
    ) -> Result<SimPath> {
        if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
            return Err(invalid(format!("noise scale must be nonnegative, got {noise_scale}")));
        }
        check_state(x0)?;
        let system = ReactionSde {
            model: self,
            noise_scale,
        };
        euler_maruyama(&system, &[x0.s, x0.v], grid, seed)
    }

    /// Fixed points of the drift. Linear variant: the origin, plus a notice
    /// when the system matrix is singular and the fixed points form a line.
    pub fn equilibria(&self) -> Equilibria {
        let k = &self.rates;
        let origin = MarketState::new(0.0, 0.0);
        match self.variant {
            ReactionVariant::Bilinear if k.k1 > 0.0 && k.k2 > 0.0 => Equilibria {
                points: vec![origin, MarketState::new(k.k4 / k.k2, k.k3 / k.k1)],
                notice: None,
            },
            ReactionVariant::Bilinear => Equilibria {
                points: vec![origin],
                notice: Some("k1 or k2 is zero; no interior equilibrium".into()),
            },
            ReactionVariant::Linear => Equilibria {
                points: vec![origin],
                notice: (k.k3 * k.k4 == k.k1 * k.k2)
                    .then(|| "k3*k4 = k1*k2; equilibria form a line through the origin".into()),
            },
        }
    }

    pub fn classify(&self) -> EquilibriumReport {
        let eq = self.equilibria();
        let entries = eq
            .points
            .iter()
            .map(|&point| {
                let jacobian = self.jacobian(point);
                let (eigenvalues, classification) = eigen_classify(&jacobian);
                let (ds, dv) = self.drift(point);
                EquilibriumEntry {
                    point,
                    jacobian,
                    eigenvalues,
                    classification,
                    residual: ds.abs().max(dv.abs()),
                }
            })
            .collect();
        EquilibriumReport {
            rates: self.rates,
            variant: self.variant,
            equilibria: entries,
            notice: eq.notice,
        }
    }
}

fn check_state(x: MarketState) -> Result<()> {
    if x.s >= 0.0 && x.v >= 0.0 && x.s.is_finite() && x.v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("state must be finite and nonnegative: {x:?}")))
    }
}

fn labels() -> Vec<String> {
    vec!["S".into(), "V".into()]
}

fn integrate(x0: MarketState, grid: &TimeGrid, step: impl Fn(&[f64], f64) -> [f64; 2]) -> Result<SimPath> {
    let mut states = Vec::with_capacity(grid.len());
    states.push(vec![x0.s, x0.v]);
    for (k, dt) in grid.steps().enumerate() {
        let next = step(&states[k], dt);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: k + 1 });
        }
        states.push(next.to_vec());
    }
    SimPath::new(grid.clone(), states, labels())
}

struct ReactionSde<'a> {
    model: &'a ReactionModel,
    noise_scale: f64,
}

impl SdeSystem for ReactionSde<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn noise_dim(&self) -> usize {
        2
    }

    fn drift(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        let (ds, dv) = self.model.drift(MarketState::new(x[0], x[1]));
        out[0] = ds;
        out[1] = dv;
    }

    fn diffusion(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        let (ts, tv) = self.model.terms(x[0], x[1]);
        out[0] = self.noise_scale * (ts[0] + ts[1]).max(0.0).sqrt();
        out[1] = 0.0;
        out[2] = 0.0;
        out[3] = self.noise_scale * (tv[0] + tv[1]).max(0.0).sqrt();
    }

    fn project(&self, x: &mut [f64]) {
        for v in x.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }

    fn labels(&self) -> Vec<String> {
        labels()
    }
}

/// Bilinear drift `(k1 S V - k3 S, k2 S V - k4 V)`.
pub fn drift(x: MarketState, k: &RateConstants) -> (f64, f64) {
    ReactionModel::new(*k).drift(x)
}

/// `(k1 S, k2 V, k3 S, k4 V)`.
pub fn propensities(x: MarketState, k: &RateConstants) -> [f64; 4] {
    [k.k1 * x.s, k.k2 * x.v, k.k3 * x.s, k.k4 * x.v]
}

pub fn jacobian(x: MarketState, k: &RateConstants) -> [[f64; 2]; 2] {
    ReactionModel::new(*k).jacobian(x)
}

pub fn simulate_deterministic(x0: MarketState, k: &RateConstants, grid: &TimeGrid) -> Result<SimPath> {
    ReactionModel::new(*k).simulate_deterministic(x0, grid)
}

pub fn simulate_euler(x0: MarketState, k: &RateConstants, grid: &TimeGrid) -> Result<SimPath> {
    ReactionModel::new(*k).simulate_euler(x0, grid)
}

pub fn simulate_stochastic(
    x0: MarketState,
    k: &RateConstants,
    grid: &TimeGrid,
    noise_scale: f64,
    seed: RngSeed,
) -> Result<SimPath> {
    ReactionModel::new(*k).simulate_stochastic(x0, grid, noise_scale, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibria {
    pub points: Vec<MarketState>,
    pub notice: Option<String>,
}

pub fn equilibria(k: &RateConstants) -> Equilibria {
    ReactionModel::new(*k).equilibria()
}

pub fn classify(k: &RateConstants) -> EquilibriumReport {
    ReactionModel::new(*k).classify()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "stable node")]
    StableNode,
    #[serde(rename = "unstable node")]
    UnstableNode,
    #[serde(rename = "saddle")]
    Saddle,
    #[serde(rename = "center")]
    Center,
    #[serde(rename = "stable spiral")]
    StableSpiral,
    #[serde(rename = "unstable spiral")]
    UnstableSpiral,
    #[serde(rename = "degenerate")]
    Degenerate,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::StableNode => "stable node",
            Classification::UnstableNode => "unstable node",
            Classification::Saddle => "saddle",
            Classification::Center => "center",
            Classification::StableSpiral => "stable spiral",
            Classification::UnstableSpiral => "unstable spiral",
            Classification::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

/// Eigenvalues of a 2×2 matrix from its trace and determinant, and the
/// phase-portrait label.
///
/// Trace and determinant count as zero when they are below `1e-12` times
/// the largest entry (squared for the determinant), so exact cancellations
/// in floating point do not flip the label.
pub fn eigen_classify(j: &[[f64; 2]; 2]) -> ([Eigenvalue; 2], Classification) {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det;
    let eig = if disc >= 0.0 {
        let r = disc.sqrt();
        // Larger-magnitude root first, the other via the product to avoid cancellation.
        let big = if tr >= 0.0 { 0.5 * (tr + r) } else { 0.5 * (tr - r) };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (lo, hi) = if big < small { (big, small) } else { (small, big) };
        [Eigenvalue { re: lo, im: 0.0 }, Eigenvalue { re: hi, im: 0.0 }]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Eigenvalue { re: 0.5 * tr, im: -im }, Eigenvalue { re: 0.5 * tr, im }]
    };

    let scale = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let tr_zero = tr.abs() <= tol;
    let det_zero = det.abs() <= tol * scale;
    let class = if det_zero {
        Classification::Degenerate
    } else if det < 0.0 {
        Classification::Saddle
    } else if tr_zero {
        Classification::Center
    } else if tr < 0.0 {
        if disc >= 0.0 {
            Classification::StableNode
        } else {
            Classification::StableSpiral
        }
    } else if disc >= 0.0 {
        Classification::UnstableNode
    } else {
        Classification::UnstableSpiral
    };
    (eig, class)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumEntry {
    pub point: MarketState,
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: [Eigenvalue; 2],
    pub classification: Classification,
    /// `max(|dS/dt|, |dV/dt|)` at the point.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub rates: RateConstants,
    pub variant: ReactionVariant,
    pub equilibria: Vec<EquilibriumEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
}
