//! GARCH(p, q) with constant conditional mean:
//!
//! ```text
//! a_t   = r_t - mean
//! s2_t  = omega + Σ_{i=1..q} alpha_i a²_{t-i} + Σ_{j=1..p} beta_j s2_{t-j}
//! ```

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::calibration::{simplex_minimize, Objective, OptimizerOptions};
use crate::error::{invalid, Result};
use crate::market_data::{mean, sample_var};
use crate::rng::RngSeed;

/// Upper limit on `Σα + Σβ` imposed while fitting.
pub const MAX_PERSISTENCE: f64 = 1.0 - 1e-6;

const MIN_FIT_LEN: usize = 100;
const MAX_RESTARTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    /// ARCH coefficients on lagged squared shocks, `alpha_1..alpha_q`.
    pub alphas: Vec<f64>,
    /// GARCH coefficients on lagged variances, `beta_1..beta_p`.
    pub betas: Vec<f64>,
    pub mean: f64,
}

impl GarchParams {
    pub fn new(omega: f64, alphas: Vec<f64>, betas: Vec<f64>, mean: f64) -> Result<Self> {
        let p = Self {
            omega,
            alphas,
            betas,
            mean,
        };
        p.validate()?;
        Ok(p)
    }

    /// GARCH(1, 1).
    pub fn garch11(omega: f64, alpha: f64, beta: f64, mean: f64) -> Result<Self> {
        Self::new(omega, vec![alpha], vec![beta], mean)
    }

    pub fn p(&self) -> usize {
        self.betas.len()
    }

    pub fn q(&self) -> usize {
        self.alphas.len()
    }

    pub fn persistence(&self) -> f64 {
        self.alphas.iter().sum::<f64>() + self.betas.iter().sum::<f64>()
    }

    /// `omega / (1 - Σα - Σβ)`.
    pub fn long_run_variance(&self) -> f64 {
        self.omega / (1.0 - self.persistence())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(invalid(format!("omega must be positive, got {}", self.omega)));
        }
        if !self.mean.is_finite() {
            return Err(invalid("mean must be finite"));
        }
        if self.alphas.iter().chain(&self.betas).any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(invalid("GARCH coefficients must be nonnegative"));
        }
        if self.persistence() >= 1.0 {
            return Err(invalid(format!(
                "not covariance stationary: sum of coefficients is {}",
                self.persistence()
            )));
        }
        Ok(())
    }
}

/// Value used for squared shocks and variances before the first observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Presample {
    /// Mean of `a_t²` over the sample.
    #[default]
    SampleVariance,
    /// `omega / (1 - Σα - Σβ)`.
    Unconditional,
}

fn presample_value(params: &GarchParams, returns: &[f64], init: Presample) -> f64 {
    match init {
        Presample::SampleVariance => {
            returns.iter().map(|r| (r - params.mean).powi(2)).sum::<f64>() / returns.len() as f64
        }
        Presample::Unconditional => params.long_run_variance(),
    }
}

fn check_len(params: &GarchParams, returns: &[f64]) -> Result<()> {
    let lags = params.p().max(params.q());
    if returns.len() <= lags {
        return Err(invalid(format!(
            "need more than {lags} returns for GARCH({}, {}), got {}",
            params.p(),
            params.q(),
            returns.len()
        )));
    }
    Ok(())
}

/// Conditional variances `s2_t`, one per return, with pre-sample values set
/// to the mean squared shock.
pub fn variance_recursion(params: &GarchParams, returns: &[f64]) -> Result<Vec<f64>> {
    variance_recursion_with(params, returns, Presample::SampleVariance)
}

pub fn variance_recursion_with(params: &GarchParams, returns: &[f64], init: Presample) -> Result<Vec<f64>> {
    params.validate()?;
    check_len(params, returns)?;
    Ok(recursion(params, returns, presample_value(params, returns, init)))
}

fn recursion(params: &GarchParams, returns: &[f64], pre: f64) -> Vec<f64> {
    let n = returns.len();
    let mut s2 = Vec::with_capacity(n);
    for t in 0..n {
        let mut v = params.omega;
        for (i, a) in params.alphas.iter().enumerate() {
            let lag = i + 1;
            v += a * if t >= lag { (returns[t - lag] - params.mean).powi(2) } else { pre };
        }
        for (j, b) in params.betas.iter().enumerate() {
            let lag = j + 1;
            v += b * if t >= lag { s2[t - lag] } else { pre };
        }
        s2.push(v);
    }
    s2
}

fn loglik_from(params: &GarchParams, returns: &[f64], s2: &[f64]) -> f64 {
    let ln2pi = (2.0 * PI).ln();
    returns
        .iter()
        .zip(s2)
        .map(|(r, v)| -0.5 * (ln2pi + v.ln() + (r - params.mean).powi(2) / v))
        .sum()
}

/// Gaussian log-likelihood `Σ -½(ln 2π + ln s2_t + a_t² / s2_t)`.
pub fn garch_loglik(params: &GarchParams, returns: &[f64]) -> Result<f64> {
    garch_loglik_with(params, returns, Presample::SampleVariance)
}

pub fn garch_loglik_with(params: &GarchParams, returns: &[f64], init: Presample) -> Result<f64> {
    let s2 = variance_recursion_with(params, returns, init)?;
    Ok(loglik_from(params, returns, &s2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub p: usize,
    pub q: usize,
    pub params: GarchParams,
    pub loglik: f64,
    /// Log-likelihood at `omega = 0.1 var, Σα = 0.1, Σβ = 0.8`.
    pub start_loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Unconstrained coordinates: `ln omega` followed by one logit per
/// coefficient. The coefficients are a softmax share of `MAX_PERSISTENCE`
/// against a fixed slack logit of zero, so they stay nonnegative and their
/// sum stays below `MAX_PERSISTENCE`.
struct Reparam {
    p: usize,
    q: usize,
    mean: f64,
}

impl Reparam {
    fn decode(&self, x: &[f64]) -> GarchParams {
        let e: Vec<f64> = x[1..].iter().map(|z| z.exp()).collect();
        let denom = 1.0 + e.iter().sum::<f64>();
        let coef: Vec<f64> = e.iter().map(|v| MAX_PERSISTENCE * v / denom).collect();
        GarchParams {
            omega: x[0].exp(),
            alphas: coef[..self.q].to_vec(),
            betas: coef[self.q..].to_vec(),
            mean: self.mean,
        }
    }

    fn encode(&self, omega: f64, alphas: &[f64], betas: &[f64]) -> Vec<f64> {
        let slack = 1.0 - (alphas.iter().sum::<f64>() + betas.iter().sum::<f64>()) / MAX_PERSISTENCE;
        let mut x = vec![omega.ln()];
        x.extend(alphas.iter().chain(betas).map(|c| (c / MAX_PERSISTENCE / slack).ln()));
        debug_assert_eq!(x.len(), 1 + self.p + self.q);
        x
    }
}

/// Quasi-maximum-likelihood GARCH(p, q) fit with the mean fixed at the
/// sample mean.
///
/// Starts from `omega = 0.1 · var`, `alpha_i = 0.1 / q`, `beta_j = 0.8 / p`
/// and restarts the simplex search from its own optimum until the
/// likelihood stops improving.
pub fn fit_garch(returns: &[f64], p: usize, q: usize) -> Result<GarchFit> {
    if returns.len() < MIN_FIT_LEN {
        return Err(invalid(format!(
            "GARCH fit needs at least {MIN_FIT_LEN} returns, got {}",
            returns.len()
        )));
    }
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(invalid("returns contain non-finite values"));
    }
    let mu = mean(returns);
    let var = sample_var(returns);
    if !(var > 0.0) {
        return Err(invalid("returns have zero variance"));
    }
    let re = Reparam { p, q, mean: mu };
    let alphas = vec![0.1 / q.max(1) as f64; q];
    let betas = vec![0.8 / p.max(1) as f64; p];
    let x0 = re.encode(0.1 * var, &alphas, &betas);

    let objective = Objective::new(1 + p + q, |x: &[f64]| {
        let params = re.decode(x);
        if !(params.omega > 0.0 && params.omega.is_finite()) {
            return f64::INFINITY;
        }
        let pre = presample_value(&params, returns, Presample::SampleVariance);
        -loglik_from(&params, returns, &recursion(&params, returns, pre))
    });
    let opts = OptimizerOptions::default();
    let start_loglik = -objective.eval(&x0);
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
    Ok(GarchFit {
        p,
        q,
        params: re.decode(&best.x),
        loglik: -best.f,
        start_loglik,
        iterations,
        converged: best.converged,
    })
}

/// Most recent squared shocks and variances, newest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchState {
    pub a2: Vec<f64>,
    pub sigma2: Vec<f64>,
}

impl GarchState {
    /// State after running the recursion over `returns`.
    pub fn from_history(params: &GarchParams, returns: &[f64]) -> Result<Self> {
        let s2 = variance_recursion(params, returns)?;
        let pre = presample_value(params, returns, Presample::SampleVariance);
        let n = returns.len() as isize;
        let a2 = (0..params.q() as isize)
            .map(|i| {
                let t = n - 1 - i;
                if t >= 0 {
                    (returns[t as usize] - params.mean).powi(2)
                } else {
                    pre
                }
            })
            .collect();
        let sigma2 = (0..params.p() as isize)
            .map(|j| {
                let t = n - 1 - j;
                if t >= 0 {
                    s2[t as usize]
                } else {
                    pre
                }
            })
            .collect();
        Ok(Self { a2, sigma2 })
    }
}

/// Expected conditional variances for the next `horizon` steps, using
/// `E[a²] = s2` for future shocks.
pub fn forecast_variance(params: &GarchParams, state: &GarchState, horizon: usize) -> Result<Vec<f64>> {
    params.validate()?;
    if horizon == 0 {
        return Err(invalid("forecast horizon must be at least 1"));
    }
    if state.a2.len() < params.q() || state.sigma2.len() < params.p() {
        return Err(invalid("state holds fewer lags than the model order"));
    }
    // Newest-first histories; future shocks enter as their expected value.
    let mut a2 = state.a2.clone();
    let mut s2 = state.sigma2.clone();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let v = params.omega
            + params.alphas.iter().zip(&a2).map(|(a, x)| a * x).sum::<f64>()
            + params.betas.iter().zip(&s2).map(|(b, x)| b * x).sum::<f64>();
        out.push(v);
        a2.insert(0, v);
        s2.insert(0, v);
        a2.truncate(params.q());
        s2.truncate(params.p());
    }
    Ok(out)
}

/// Simulated returns with Gaussian innovations, pre-sample values at the
/// unconditional variance.
pub fn simulate_garch(params: &GarchParams, n: usize, seed: RngSeed) -> Result<Vec<f64>> {
    params.validate()?;
    let pre = params.long_run_variance();
    let mut rng = seed.rng();
    let mut a2 = vec![pre; params.q()];
    let mut s2 = vec![pre; params.p()];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let v = params.omega
            + params.alphas.iter().zip(&a2).map(|(a, x)| a * x).sum::<f64>()
            + params.betas.iter().zip(&s2).map(|(b, x)| b * x).sum::<f64>();
        let a = v.sqrt() * rng.sample::<f64, _>(StandardNormal);
        out.push(params.mean + a);
        if params.q() > 0 {
            a2.rotate_right(1);
            a2[0] = a * a;
        }
        if params.p() > 0 {
            s2.rotate_right(1);
            s2[0] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fixture() -> Vec<f64> {
        let params = GarchParams::garch11(0.05, 0.1, 0.85, 0.01).unwrap();
        simulate_garch(&params, 500, RngSeed::new(5)).unwrap()
    }

    #[test]
    fn rejects_nonstationary() {
        assert!(GarchParams::garch11(0.1, 0.3, 0.7, 0.0).is_err());
        assert!(GarchParams::garch11(0.0, 0.1, 0.7, 0.0).is_err());
        assert!(GarchParams::garch11(0.1, -0.1, 0.7, 0.0).is_err());
    }

    #[test]
    fn constant_variance_without_lags() {
        let params = GarchParams::new(0.3, vec![], vec![], 0.0).unwrap();
        let s2 = variance_recursion(&params, &fixture()).unwrap();
        assert!(s2.iter().all(|v| *v == 0.3));
    }

    #[test]
    fn one_step_by_hand() {
        // Unit shock and unit variance at t-1: 0.1 + 0.2 + 0.7.
        let params = GarchParams::garch11(0.1, 0.2, 0.7, 0.0).unwrap();
        let s2 = variance_recursion(&params, &[1.0, -1.0]).unwrap();
        assert_relative_eq!(s2[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(s2[1], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn variance_at_least_omega() {
        let params = GarchParams::new(0.02, vec![0.05, 0.1], vec![0.3, 0.4], 0.0).unwrap();
        let s2 = variance_recursion(&params, &fixture()).unwrap();
        assert!(s2.iter().all(|v| *v >= 0.02));
    }

    #[test]
    fn short_input_rejected() {
        let params = GarchParams::new(0.02, vec![0.05, 0.1], vec![0.3], 0.0).unwrap();
        assert!(variance_recursion(&params, &[0.1, 0.2]).is_err());
        let iid = GarchParams::new(0.02, vec![], vec![], 0.0).unwrap();
        assert!(garch_loglik(&iid, &[]).is_err());
    }

    #[test]
    fn iid_reduction() {
        let r = fixture();
        let mu = mean(&r);
        let var = sample_var(&r);
        let params = GarchParams::new(var, vec![], vec![], mu).unwrap();
        let want: f64 = r
            .iter()
            .map(|x| -0.5 * ((2.0 * PI * var).ln() + (x - mu).powi(2) / var))
            .sum();
        assert_relative_eq!(garch_loglik(&params, &r).unwrap(), want, max_relative = 1e-12);
    }

    #[test]
    fn loglik_falls_as_omega_grows_past_variance() {
        let r = fixture();
        let var = sample_var(&r);
        let mut last = f64::INFINITY;
        for m in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let params = GarchParams::garch11(m * var, 0.05, 0.1, mean(&r)).unwrap();
            let ll = garch_loglik(&params, &r).unwrap();
            assert!(ll < last);
            last = ll;
        }
    }

    #[test]
    fn forecast_converges_to_long_run() {
        let params = GarchParams::garch11(0.1, 0.1, 0.8, 0.0).unwrap();
        let state = GarchState {
            a2: vec![5.0],
            sigma2: vec![3.0],
        };
        let f = forecast_variance(&params, &state, 10_000).unwrap();
        assert!((f.last().unwrap() - 1.0).abs() < 1e-10);
        assert!(f.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn forecast_without_lags_is_omega() {
        let params = GarchParams::new(0.4, vec![], vec![], 0.0).unwrap();
        let state = GarchState { a2: vec![], sigma2: vec![] };
        assert!(forecast_variance(&params, &state, 5).unwrap().iter().all(|v| *v == 0.4));
        assert!(forecast_variance(&params, &state, 0).is_err());
    }

    #[test]
    fn one_step_forecast_matches_recursion() {
        let r = fixture();
        let params = GarchParams::new(0.05, vec![0.08, 0.02], vec![0.6, 0.2], 0.01).unwrap();
        // The unconditional init keeps the pre-sample value the same for both runs.
        let full = variance_recursion_with(&params, &r, Presample::Unconditional).unwrap();
        let head = &r[..r.len() - 1];
        let s2 = variance_recursion_with(&params, head, Presample::Unconditional).unwrap();
        let n = head.len();
        let state = GarchState {
            a2: vec![(head[n - 1] - 0.01).powi(2), (head[n - 2] - 0.01).powi(2)],
            sigma2: vec![s2[n - 1], s2[n - 2]],
        };
        let f = forecast_variance(&params, &state, 1).unwrap();
        assert_relative_eq!(f[0], full[n], max_relative = 1e-14);
    }

    #[test]
    fn state_from_history() {
        let r = fixture();
        let params = GarchParams::garch11(0.05, 0.1, 0.85, 0.01).unwrap();
        let s2 = variance_recursion(&params, &r).unwrap();
        let state = GarchState::from_history(&params, &r).unwrap();
        assert_eq!(state.sigma2, vec![s2[r.len() - 1]]);
        assert_eq!(state.a2, vec![(r[r.len() - 1] - 0.01).powi(2)]);
    }

    #[test]
    fn fit_improves_on_start() {
        let r = simulate_garch(&GarchParams::garch11(0.05, 0.1, 0.85, 0.0).unwrap(), 2000, RngSeed::new(8)).unwrap();
        let fit = fit_garch(&r, 1, 1).unwrap();
        assert!(fit.loglik >= fit.start_loglik);
        assert!(fit.params.persistence() <= MAX_PERSISTENCE);
        assert!(fit_garch(&r[..10], 1, 1).is_err());
    }

    #[test]
    fn reparam_round_trip() {
        let re = Reparam { p: 2, q: 1, mean: 0.0 };
        let x = re.encode(0.2, &[0.1], &[0.5, 0.2]);
        let back = re.decode(&x);
        assert_relative_eq!(back.omega, 0.2, max_relative = 1e-12);
        assert_relative_eq!(back.alphas[0], 0.1, max_relative = 1e-9);
        assert_relative_eq!(back.betas[1], 0.2, max_relative = 1e-9);
    }

    #[test]
    fn simulation_reproducible() {
        let params = GarchParams::garch11(0.05, 0.1, 0.85, 0.0).unwrap();
        assert_eq!(
            simulate_garch(&params, 50, RngSeed::new(1)).unwrap(),
            simulate_garch(&params, 50, RngSeed::new(1)).unwrap()
        );
    }
}
