//! Quick moment-based estimators for the models without a likelihood fit.
//! Time is measured in observation steps (one trading day per return).

use crate::engine::{GbmParams, HestonParams, VgParams};
use crate::error::{invalid, Result};
use crate::market_data::{mean, sample_var};

const MIN_LEN: usize = 30;

fn check(returns: &[f64]) -> Result<()> {
    if returns.len() < MIN_LEN {
        return Err(invalid(format!("need at least {MIN_LEN} returns, got {}", returns.len())));
    }
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(invalid("returns contain non-finite values"));
    }
    Ok(())
}

/// Maximum-likelihood GBM drift and volatility from log returns:
/// `sigma² = var(r)`, `mu = mean(r) + sigma²/2`.
pub fn fit_gbm(returns: &[f64], s0: f64) -> Result<GbmParams> {
    check(returns)?;
    let var = sample_var(returns);
    let p = GbmParams {
        mu: mean(returns) + 0.5 * var,
        sigma: var.sqrt(),
        s0,
    };
    p.validate()?;
    Ok(p)
}

/// Variance-gamma by moments, to leading order in `theta`:
/// `theta = mean`, `nu = excess kurtosis / 3`, `sigma² = var - nu theta²`.
pub fn fit_vg(returns: &[f64]) -> Result<VgParams> {
    check(returns)?;
    let m = mean(returns);
    let n = returns.len() as f64;
    let m2 = returns.iter().map(|r| (r - m).powi(2)).sum::<f64>() / n;
    let m4 = returns.iter().map(|r| (r - m).powi(4)).sum::<f64>() / n;
    let excess = m4 / (m2 * m2) - 3.0;
    let nu = (excess / 3.0).max(1e-4);
    let var = sample_var(returns);
    let sigma2 = (var - nu * m * m).max(1e-6 * var);
    let p = VgParams {
        theta: m,
        sigma: sigma2.sqrt(),
        nu,
    };
    p.validate()?;
    Ok(p)
}

/// Heston parameters from returns and a rolling-variance proxy.
///
/// The proxy `v_t` is the sample variance of the last `window` returns.
/// Regressing `v_{t+1} - v_t` on `v_t` gives `kappa` and `theta`; the
/// residuals scaled by `sqrt(v_t)` give `xi`, and their correlation with the
/// return shocks gives `rho`. This is a rough heuristic: overlapping windows
/// bias `kappa` low.
pub fn fit_heston(returns: &[f64], window: usize, s0: f64) -> Result<HestonParams> {
    check(returns)?;
    if window < 2 || window + 2 > returns.len() {
        return Err(invalid(format!("window {window} does not fit {} returns", returns.len())));
    }
    let v: Vec<f64> = returns.windows(window).map(sample_var).collect();
    let x = &v[..v.len() - 1];
    let dv: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let mx = mean(x);
    let my = mean(&dv);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&dv).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let kappa = (-slope).max(1e-4);
    let theta = ((my - slope * mx) / kappa).max(0.0);
    let theta = if theta > 0.0 { theta } else { mean(&v) };

    let scaled: Vec<f64> = x
        .iter()
        .zip(&dv)
        .map(|(vt, d)| (d - kappa * (theta - vt)) / vt.max(1e-300).sqrt())
        .collect();
    let xi = (scaled.iter().map(|e| e * e).sum::<f64>() / scaled.len() as f64).sqrt();

    // Return whose window ends at v_{t+1} is returns[t + window].
    let shocks: Vec<f64> = (0..x.len()).map(|t| returns[t + window] - mean(returns)).collect();
    let rho = correlation(&shocks, &scaled).clamp(-1.0, 1.0);

    let p = HestonParams {
        mu: mean(returns) + 0.5 * mean(&v),
        kappa,
        theta,
        xi,
        rho,
        s0,
        v0: *v.last().expect("nonempty"),
    };
    p.validate()?;
    Ok(p)
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let sab: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let saa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let sbb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if saa > 0.0 && sbb > 0.0 {
        sab / (saa * sbb).sqrt()
    } else {
        0.0
    }
}
