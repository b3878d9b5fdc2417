//! Random-path generation: Wiener increments, a generic Euler–Maruyama
//! driver, and the single-asset simulators built on top of it.

mod fbm;
mod gbm;
mod grid;
mod heston;
mod levy;
mod sde;

pub use fbm::{fbm_covariance, sample_fbm, FbmParams, FbmSampler, DEFAULT_FBM_CAP};
pub use gbm::{simulate_gbm, GbmParams};
pub use grid::{SimPath, TimeGrid};
pub use heston::{simulate_heston, HestonParams};
pub use levy::{gamma_subordinator, simulate_vg, VgParams, DEFAULT_VG_NU};
pub use sde::{euler_maruyama, wiener_increments, FnSde, SdeSystem};
