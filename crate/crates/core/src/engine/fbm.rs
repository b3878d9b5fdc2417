use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::grid::{SimPath, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::rng::RngSeed;

/// Largest grid the dense sampler factorizes by default.
pub const DEFAULT_FBM_CAP: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbmParams {
    pub hurst: f64,
    pub scale: f64,
}

impl FbmParams {
    pub fn validate(&self) -> Result<()> {
        check_hurst(self.hurst)?;
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(invalid(format!("fBm scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }
}

fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("Hurst index must lie in (0, 1), got {h}")))
    }
}

/// `E[B_s B_t] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2`.
pub fn fbm_covariance(s: f64, t: f64, hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if s < 0.0 || t < 0.0 {
        return Err(invalid("fBm covariance is defined for nonnegative times"));
    }
    Ok(cov(s, t, hurst))
}

fn cov(s: f64, t: f64, h: f64) -> f64 {
    let e = 2.0 * h;
    0.5 * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e))
}

/// Cholesky factor of the covariance on one grid, reusable across paths.
#[derive(Debug, Clone)]
pub struct FbmSampler {
    params: FbmParams,
    grid: TimeGrid,
    /// Grid index of the first point with nonzero variance.
    offset: usize,
    lower: DMatrix<f64>,
}

impl FbmSampler {
    pub fn new(params: FbmParams, grid: &TimeGrid, cap: usize) -> Result<Self> {
        params.validate()?;
        if grid.len() > cap {
            return Err(invalid(format!(
                "fBm grid has {} points, dense sampling is capped at {cap}",
                grid.len()
            )));
        }
        if grid.start() < 0.0 {
            return Err(invalid("fBm grid must start at t >= 0"));
        }
        let offset = usize::from(grid.start() == 0.0);
        let times = &grid.points()[offset..];
        let n = times.len();
        let c = DMatrix::from_fn(n, n, |i, j| cov(times[i], times[j], params.hurst));
        let lower = match c.clone().cholesky() {
            Some(ch) => ch.l(),
            None => {
                let min_eigenvalue = c.symmetric_eigenvalues().min();
                return Err(Error::NotPositiveDefinite { min_eigenvalue });
            }
        };
        Ok(Self {
            params,
            grid: grid.clone(),
            offset,
            lower,
        })
    }

    pub fn sample(&self, seed: RngSeed) -> Result<SimPath> {
        let mut rng = seed.rng();
        let n = self.lower.nrows();
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let b = &self.lower * z;
        let mut states = Vec::with_capacity(self.grid.len());
        if self.offset == 1 {
            states.push(vec![0.0]);
        }
        states.extend(b.iter().map(|x| vec![self.params.scale * x]));
        SimPath::new(self.grid.clone(), states, vec!["B".into()])
    }
}

/// Exact Gaussian sample of fBm on `grid` (dense factorization, default cap).
pub fn sample_fbm(p: &FbmParams, grid: &TimeGrid, seed: RngSeed) -> Result<SimPath> {
    FbmSampler::new(*p, grid, DEFAULT_FBM_CAP)?.sample(seed)
}
