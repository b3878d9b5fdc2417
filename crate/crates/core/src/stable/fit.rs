use serde::{Deserialize, Serialize};

use super::density::StableDensity;
use crate::calibration::{simplex_minimize, Objective, OptimizerOptions};
use crate::error::{invalid, Result};
use crate::market_data::ReturnSeries;

pub const DEFAULT_STABLE_ALPHA: f64 = 1.5;

/// Scale never drops below this during fitting.
pub const MIN_STABLE_SCALE: f64 = 1e-8;

const INITIAL_GUESS: [f64; 2] = [0.001, 0.001];

const MAX_RESTARTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableFit {
    pub alpha: f64,
    pub theta: f64,
    pub sigma: f64,
    pub loglik: f64,
    /// Log-likelihood at the initial guess `(0.001, 0.001)`.
    pub initial_loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximum-likelihood location `theta` and scale `sigma` of a symmetric
/// stable law with fixed `alpha`, starting from `(0.001, 0.001)`.
///
/// The search runs over `(theta, ln(sigma - MIN_STABLE_SCALE))` with the
/// simplex method, restarted from its own optimum until the likelihood stops
/// improving.
pub fn fit_stable_mle(returns: &ReturnSeries, alpha: f64) -> Result<StableFit> {
    fit_values(&returns.values, alpha)
}

pub(crate) fn fit_values(xs: &[f64], alpha: f64) -> Result<StableFit> {
    if xs.len() < 30 {
        return Err(invalid(format!("stable fit needs at least 30 returns, got {}", xs.len())));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(invalid("returns contain non-finite values"));
    }
    let density = StableDensity::new(alpha)?;
    let to_sigma = |y: f64| MIN_STABLE_SCALE + y.exp();
    let objective = Objective::new(2, |x: &[f64]| -density.loglik(xs, x[0], to_sigma(x[1])));
    let opts = OptimizerOptions::default();

    let x0 = [INITIAL_GUESS[0], (INITIAL_GUESS[1] - MIN_STABLE_SCALE).ln()];
    let initial_loglik = -objective.eval(&x0);
    let mut best = simplex_minimize(&objective, &x0, &opts)?;
    let mut iterations = best.iterations;
    for _ in 0..MAX_RESTARTS {
        let next = simplex_minimize(&objective, &best.x, &opts)?;
        iterations += next.iterations;
        let improved = next.f < best.f - 1e-9 * best.f.abs().max(1.0);
        let converged = next.converged;
        if next.f <= best.f {
            best = next;
        }
        if !improved && converged {
            break;
        }
    }
    Ok(StableFit {
        alpha,
        theta: best.x[0],
        sigma: to_sigma(best.x[1]),
        loglik: -best.f,
        initial_loglik,
        iterations,
        converged: best.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;
    use crate::stable::{stable_sample, StableParams};

    #[test]
    fn too_short() {
        let r = ReturnSeries::from_values(vec![0.01, -0.02, 0.0, 0.01, 0.03]);
        assert!(fit_stable_mle(&r, 1.5).is_err());
    }

    #[test]
    fn recovers_parameters_and_improves_on_start() {
        let p = StableParams::symmetric(1.5, 0.001, 0.01);
        let xs = stable_sample(10_000, &p, RngSeed::new(100)).unwrap();
        let fit = fit_stable_mle(&ReturnSeries::from_values(xs), 1.5).unwrap();
        assert!((fit.theta - 0.001).abs() < 0.2 * 0.001, "theta {}", fit.theta);
        assert!((fit.sigma - 0.01).abs() < 0.1 * 0.01, "sigma {}", fit.sigma);
        assert!(fit.loglik >= fit.initial_loglik);
    }

    #[test]
    fn scale_equivariance() {
        let p = StableParams::symmetric(1.5, 0.002, 0.01);
        let xs = stable_sample(3_000, &p, RngSeed::new(7)).unwrap();
        let c = 3.0;
        let a = fit_values(&xs, 1.5).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| c * x).collect();
        let b = fit_values(&scaled, 1.5).unwrap();
        assert!((b.sigma / (c * a.sigma) - 1.0).abs() < 1e-4, "{} vs {}", b.sigma, c * a.sigma);
        assert!((b.theta - c * a.theta).abs() < 1e-4 * c * a.sigma);
    }
}
