use std::f64::consts::PI;

use crate::engine::TimeGrid;
use crate::error::{invalid, Error, Result};
use crate::reaction::{simulate_euler, MarketState, RateConstants};

/// Variance floor used by [`corrected_path_loglik`] unless told otherwise.
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-12;

fn check_lengths(s: &[f64], v: &[f64]) -> Result<()> {
    if s.len() != v.len() {
        return Err(invalid(format!("S has {} points, V has {}", s.len(), v.len())));
    }
    if s.len() < 2 {
        return Err(invalid("need at least two observations"));
    }
    Ok(())
}

/// Two-term Gaussian score of observed `(S, V)` against a simulated path,
/// with the observed `V` serving as the variance of both terms:
///
/// ```text
/// -½ Σ (ln 2π + ln V + (S - S_sim)² / V) - ½ Σ (ln 2π + ln V + (V - V_sim)² / V)
/// ```
pub fn gaussian_path_score(s: &[f64], v: &[f64], s_sim: &[f64], v_sim: &[f64]) -> Result<f64> {
    check_lengths(s, v)?;
    if s_sim.len() != s.len() || v_sim.len() != v.len() {
        return Err(invalid("simulated path length differs from observations"));
    }
    if let Some(i) = v.iter().position(|x| !(*x > 0.0)) {
        return Err(Error::Data(format!("observed volatility must be positive, got {} at index {i}", v[i])));
    }
    let ln2pi = (2.0 * PI).ln();
    let mut ls = 0.0;
    let mut lv = 0.0;
    for i in 0..s.len() {
        let lnv = v[i].ln();
        ls += ln2pi + lnv + (s[i] - s_sim[i]).powi(2) / v[i];
        lv += ln2pi + lnv + (v[i] - v_sim[i]).powi(2) / v[i];
    }
    Ok(-0.5 * ls - 0.5 * lv)
}

/// Integrates the reaction drift with explicit Euler from the first
/// observation and scores the result with [`gaussian_path_score`].
pub fn paper_path_loglik(k: &RateConstants, s: &[f64], v: &[f64], grid: &TimeGrid) -> Result<f64> {
    check_lengths(s, v)?;
    if grid.len() != s.len() {
        return Err(invalid(format!("grid has {} points, series has {}", grid.len(), s.len())));
    }
    if let Some(i) = v.iter().position(|x| !(*x > 0.0)) {
        return Err(Error::Data(format!("observed volatility must be positive, got {} at index {i}", v[i])));
    }
    let path = simulate_euler(MarketState::new(s[0], v[0]), k, grid)?;
    gaussian_path_score(s, v, &path.component(0), &path.component(1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedScore {
    pub value: f64,
    /// At least one variance was raised to the floor.
    pub floor_engaged: bool,
}

/// One-step Gaussian transition likelihood of the observed path.
///
/// Each step predicts `x + f(x) dt` from the previous observation. The
/// price step has variance `(V S)² dt` and the volatility step `V² dt`; both
/// are raised to `floor` when smaller.
pub fn corrected_path_loglik(
    k: &RateConstants,
    s: &[f64],
    v: &[f64],
    dt: f64,
    floor: f64,
) -> Result<CorrectedScore> {
    check_lengths(s, v)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    if !(floor > 0.0) {
        return Err(invalid(format!("variance floor must be positive, got {floor}")));
    }
    if let Some(i) = v.iter().position(|x| !(*x >= 0.0)) {
        return Err(Error::Data(format!("observed volatility must be nonnegative, got {} at index {i}", v[i])));
    }
    let ln2pi = (2.0 * PI).ln();
    let mut floor_engaged = false;
    let mut floored = |var: f64| {
        if var < floor {
            floor_engaged = true;
            floor
        } else {
            var
        }
    };
    let mut total = 0.0;
    for t in 0..s.len() - 1 {
        let (ds, dv) = crate::reaction::drift(MarketState::new(s[t], v[t]), k);
        let var_s = floored((v[t] * s[t]).powi(2) * dt);
        let var_v = floored(v[t] * v[t] * dt);
        let rs = s[t + 1] - (s[t] + ds * dt);
        let rv = v[t + 1] - (v[t] + dv * dt);
        total += ln2pi + var_s.ln() + rs * rs / var_s;
        total += ln2pi + var_v.ln() + rv * rv / var_v;
    }
    Ok(CorrectedScore {
        value: -0.5 * total,
        floor_engaged,
    })
}
