//! Stochastic market-dynamics toolkit: price ingestion, path simulation for
//! a family of price and volatility models, likelihood fitting, equilibrium
//! analysis of a two-species reaction model, and backtest reporting.

pub mod calibration;
pub mod engine;
mod error;
pub mod estimate;
pub mod garch;
pub mod market_data;
pub mod params;
pub mod quad;
pub mod reaction;
pub mod report;
mod rng;
pub mod stable;

pub use calibration::{CalibrationResult, Objective, OptimizerOptions, OptimizerResult, Param};
pub use engine::{SimPath, TimeGrid};
pub use error::{Error, Result};
pub use market_data::{DateRange, PriceSeries, ReturnSeries, VolatilitySeries};
pub use params::{ModelKind, ModelParams};
pub use reaction::{EquilibriumReport, MarketState, RateConstants};
pub use report::BacktestReport;
pub use rng::RngSeed;
pub use stable::StableParams;
