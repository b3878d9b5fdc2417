use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use super::{check_alpha, StableParams};
use crate::error::Result;
use crate::quad::{integrate_pieces, QuadOptions};

/// `e^{-u^α}` is below this past the truncation point of the inversion integral.
const CF_CUTOFF: f64 = 1e-16;

/// For α = 2 the inversion integral is used up to this standardized distance;
/// beyond it the density is below quadrature resolution and the Gaussian
/// closed form takes over.
const GAUSS_SWITCH: f64 = 6.0;

/// Smallest standardized distance at which the tail expansion is attempted.
const TAIL_MIN: f64 = 1.0;

const QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-15,
    rel_tol: 1e-13,
    max_intervals: 20_000,
};

fn truncation_point(alpha: f64) -> f64 {
    (-CF_CUTOFF.ln()).powf(1.0 / alpha)
}

/// Breakpoints at half-periods of the oscillating factor.
fn breaks(upper: f64, z: f64) -> Vec<f64> {
    let half_periods = (upper * z / PI).ceil().clamp(1.0, 4096.0) as usize;
    (0..=half_periods)
        .map(|i| upper * i as f64 / half_periods as f64)
        .collect()
}

/// Standardized density by direct quadrature of
/// `(1/π) ∫_0^U e^{-u^α} cos(u z) du`.
pub fn inversion_pdf(z: f64, alpha: f64) -> f64 {
    let z = z.abs();
    let upper = truncation_point(alpha);
    let q = integrate_pieces(|u| (-u.powf(alpha)).exp() * (u * z).cos(), &breaks(upper, z), QUAD);
    q.value / PI
}

/// Derivative in `z` of [`inversion_pdf`] for `z >= 0`.
fn inversion_pdf_derivative(z: f64, alpha: f64) -> f64 {
    let upper = truncation_point(alpha);
    let q = integrate_pieces(
        |u| u * (-u.powf(alpha)).exp() * (u * z).sin(),
        &breaks(upper, z),
        QUAD,
    );
    -q.value / PI
}

/// Large-`z` expansion
/// `(1/π) Σ_k (-1)^{k+1} Γ(kα+1)/k! sin(kπα/2) z^{-kα-1}`, summed until the
/// next term is negligible. Returns `None` if the terms start growing first
/// (the expansion is only asymptotic for α > 1).
pub fn tail_series(z: f64, alpha: f64) -> Option<f64> {
    let z = z.abs();
    if z <= 0.0 || alpha >= 2.0 {
        return None;
    }
    let lz = z.ln();
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..400 {
        let kf = k as f64;
        let log_mag = ln_gamma(kf * alpha + 1.0) - ln_gamma(kf + 1.0) - (kf * alpha + 1.0) * lz;
        let mag = log_mag.exp();
        if sum > 0.0 && mag < 1e-14 * sum {
            return Some(sum / PI);
        }
        if mag > prev {
            return None;
        }
        prev = mag;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * mag * (kf * PI * alpha / 2.0).sin();
    }
    None
}

fn gaussian_std_pdf(z: f64) -> f64 {
    // α = 2: Normal with variance 2.
    (-z * z / 4.0).exp() / (2.0 * PI.sqrt())
}

/// Density of the standardized law (loc 0, scale 1).
pub fn standard_pdf(z: f64, alpha: f64) -> f64 {
    let z = z.abs();
    if alpha == 2.0 {
        if z > GAUSS_SWITCH {
            return gaussian_std_pdf(z);
        }
        return inversion_pdf(z, alpha);
    }
    if z >= TAIL_MIN {
        if let Some(v) = tail_series(z, alpha) {
            return v;
        }
    }
    inversion_pdf(z, alpha)
}

pub fn stable_pdf(x: f64, p: &StableParams) -> Result<f64> {
    p.validate()?;
    Ok(standard_pdf((x - p.loc) / p.scale, p.alpha) / p.scale)
}

pub fn stable_logpdf(x: f64, p: &StableParams) -> Result<f64> {
    p.validate()?;
    let z = (x - p.loc) / p.scale;
    if p.alpha == 2.0 && z.abs() > GAUSS_SWITCH {
        return Ok(-z * z / 4.0 - (2.0 * PI.sqrt()).ln() - p.scale.ln());
    }
    Ok(standard_pdf(z, p.alpha).ln() - p.scale.ln())
}

/// Log-density evaluator for a fixed α.
///
/// The standardized log-density is tabulated on `[0, z_tail]` from the
/// inversion integral (values and derivatives) and interpolated with cubic
/// Hermite polynomials; beyond `z_tail` the tail expansion is summed directly.
/// Agrees with [`stable_logpdf`] to about 1e-9.
#[derive(Debug, Clone)]
pub struct StableDensity {
    alpha: f64,
    nodes: Vec<f64>,
    log_values: Vec<f64>,
    log_slopes: Vec<f64>,
    z_tail: f64,
}

impl StableDensity {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let z_tail = if alpha == 2.0 {
            GAUSS_SWITCH
        } else {
            let mut z = TAIL_MIN;
            while tail_series(z, alpha).is_none() {
                z *= 1.02;
                if z > 1e6 {
                    return Err(crate::error::invalid(format!(
                        "no usable tail expansion for alpha = {alpha}"
                    )));
                }
            }
            z
        };
        let mut nodes = vec![0.0];
        let mut z: f64 = 0.0;
        while z < z_tail {
            z = (z + 0.01 * (z / 2.0).max(1.0)).min(z_tail);
            nodes.push(z);
        }
        let (log_values, log_slopes) = nodes
            .iter()
            .map(|&z| {
                let g = inversion_pdf(z, alpha);
                let dg = if z == 0.0 { 0.0 } else { inversion_pdf_derivative(z, alpha) };
                (g.ln(), dg / g)
            })
            .unzip();
        Ok(Self {
            alpha,
            nodes,
            log_values,
            log_slopes,
            z_tail,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Log-density of the standardized law.
    pub fn log_standard(&self, z: f64) -> f64 {
        let z = z.abs();
        if z >= self.z_tail {
            if self.alpha == 2.0 {
                return -z * z / 4.0 - (2.0 * PI.sqrt()).ln();
            }
            return match tail_series(z, self.alpha) {
                Some(v) => v.ln(),
                None => inversion_pdf(z, self.alpha).ln(),
            };
        }
        let i = self.nodes.partition_point(|&n| n <= z).saturating_sub(1).min(self.nodes.len() - 2);
        let (z0, z1) = (self.nodes[i], self.nodes[i + 1]);
        let h = z1 - z0;
        let s = (z - z0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.log_values[i]
            + h10 * h * self.log_slopes[i]
            + h01 * self.log_values[i + 1]
            + h11 * h * self.log_slopes[i + 1]
    }

    pub fn logpdf(&self, x: f64, loc: f64, scale: f64) -> f64 {
        self.log_standard((x - loc) / scale) - scale.ln()
    }

    /// `Σ log f(x_i)`.
    pub fn loglik(&self, xs: &[f64], loc: f64, scale: f64) -> f64 {
        let log_scale = scale.ln();
        xs.iter()
            .map(|x| self.log_standard((x - loc) / scale) - log_scale)
            .sum()
    }
}
