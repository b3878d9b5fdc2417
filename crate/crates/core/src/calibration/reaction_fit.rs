use super::descent::bounded_descent;
use super::likelihood::paper_path_loglik;
use super::objective::{CalibrationResult, Objective, OptimizerOptions, Param};
use crate::engine::TimeGrid;
use crate::error::{invalid, Result};
use crate::market_data::{align_prices, PriceSeries, VolatilitySeries};
use crate::reaction::RateConstants;

/// Box applied to every rate constant.
pub const DEFAULT_RATE_BOUNDS: (f64, f64) = (0.0, 10.0);

/// Published starting rates `(k1, k2, k3, k4)` for AAPL.
pub const AAPL_REFERENCE_RATES: RateConstants = RateConstants {
    k1: 0.1,
    k2: 0.2,
    k3: 0.01,
    k4: 0.05,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionFitOptions {
    pub x0: RateConstants,
    pub bounds: (f64, f64),
    pub optimizer: OptimizerOptions,
}

impl Default for ReactionFitOptions {
    fn default() -> Self {
        Self {
            x0: AAPL_REFERENCE_RATES,
            bounds: DEFAULT_RATE_BOUNDS,
            optimizer: OptimizerOptions::default(),
        }
    }
}

/// Fits `k1..k4` to observed `(S, V)` pairs by minimizing the negative of
/// [`paper_path_loglik`](super::paper_path_loglik) with
/// [`bounded_descent`]. Observation `i` sits at time `i · n/(n-1)`.
pub fn calibrate_reaction_model(s: &[f64], v: &[f64], opts: &ReactionFitOptions) -> Result<CalibrationResult> {
    let n = s.len();
    if n < 2 {
        return Err(invalid("need at least two observations"));
    }
    let grid = TimeGrid::linspace(0.0, n as f64, n)?;
    let x0 = opts.x0.to_array();
    // Surface data problems and blow-ups at the start point as errors.
    paper_path_loglik(&opts.x0, s, v, &grid).map_err(|e| e.context("reaction model log-likelihood at start point"))?;

    let objective = Objective::new(4, |k: &[f64]| match RateConstants::from_slice(k) {
        Ok(rates) => paper_path_loglik(&rates, s, v, &grid).map_or(f64::INFINITY, |ll| -ll),
        Err(_) => f64::INFINITY,
    })
    .with_bounds(vec![opts.bounds; 4]);
    let result = bounded_descent(&objective, &x0, &opts.optimizer)?;

    Ok(CalibrationResult {
        model: "reaction".into(),
        parameters: ["k1", "k2", "k3", "k4"]
            .iter()
            .zip(&result.x)
            .map(|(name, value)| Param::new(*name, *value))
            .collect(),
        objective: Some(result.f),
        iterations: result.iterations,
        converged: result.converged,
    })
}

/// [`calibrate_reaction_model`] on prices taken at the volatility dates.
pub fn calibrate_reaction_series(
    prices: &PriceSeries,
    vol: &VolatilitySeries,
    opts: &ReactionFitOptions,
) -> Result<CalibrationResult> {
    let s = align_prices(prices, vol)?;
    calibrate_reaction_model(&s, &vol.values, opts)
}
