//! Symmetric α-stable laws: density by Fourier inversion, Chambers–Mallows–Stuck
//! sampling, and maximum-likelihood fitting of location and scale at fixed α.

mod density;
mod fit;
mod sample;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use density::{
    inversion_pdf, stable_logpdf, stable_pdf, standard_pdf, tail_series, StableDensity,
};
pub use fit::{fit_stable_mle, StableFit, DEFAULT_STABLE_ALPHA, MIN_STABLE_SCALE};
pub use sample::stable_sample;

/// Stable law with characteristic function
/// `exp(i loc u - |scale u|^alpha)` (β = 0 only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    pub loc: f64,
    pub scale: f64,
}

impl StableParams {
    pub fn symmetric(alpha: f64, loc: f64, scale: f64) -> Self {
        Self {
            alpha,
            beta: 0.0,
            loc,
            scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.beta != 0.0 {
            return Err(Error::Unsupported(format!(
                "skewed stable laws (beta = {}) are not implemented",
                self.beta
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(invalid(format!("stable scale must be positive, got {}", self.scale)));
        }
        if !self.loc.is_finite() {
            return Err(invalid("stable location must be finite"));
        }
        Ok(())
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(invalid(format!("stability index must lie in (0, 2], got {alpha}")))
    }
}
