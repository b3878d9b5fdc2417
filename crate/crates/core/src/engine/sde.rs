use rand::Rng;
use rand_distr::StandardNormal;

use super::grid::{SimPath, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::rng::RngSeed;

/// `n` independent Normal(0, dt) draws.
pub fn wiener_increments(n: usize, dt: f64, seed: RngSeed) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("need at least one increment"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    let sd = dt.sqrt();
    let mut rng = seed.rng();
    Ok((0..n)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

/// An Itô system `dX = a(t, X) dt + B(t, X) dW` with `W` of dimension
/// [`noise_dim`](SdeSystem::noise_dim).
pub trait SdeSystem {
    fn dim(&self) -> usize;

    fn noise_dim(&self) -> usize;

    fn drift(&self, t: f64, x: &[f64], out: &mut [f64]);

    /// Row-major `dim × noise_dim` matrix.
    fn diffusion(&self, t: f64, x: &[f64], out: &mut [f64]);

    /// Applied to the state after every step.
    fn project(&self, _x: &mut [f64]) {}

    fn labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| format!("x{i}")).collect()
    }
}

/// Closure-backed [`SdeSystem`].
pub struct FnSde<A, B> {
    pub dim: usize,
    pub noise_dim: usize,
    pub drift: A,
    pub diffusion: B,
}

impl<A, B> SdeSystem for FnSde<A, B>
where
    A: Fn(f64, &[f64], &mut [f64]),
    B: Fn(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.drift)(t, x, out)
    }

    fn diffusion(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.diffusion)(t, x, out)
    }
}

/// Euler–Maruyama: `X[k+1] = X[k] + a Δt + B ΔW`, `ΔW ~ Normal(0, Δt I)`.
///
/// Fails with [`Error::NonFinite`] carrying the index of the first bad state.
pub fn euler_maruyama<S: SdeSystem + ?Sized>(
    system: &S,
    x0: &[f64],
    grid: &TimeGrid,
    seed: RngSeed,
) -> Result<SimPath> {
    let d = system.dim();
    let m = system.noise_dim();
    if x0.len() != d {
        return Err(invalid(format!("initial state has {} entries, system has {d}", x0.len())));
    }
    let mut rng = seed.rng();
    let mut states = Vec::with_capacity(grid.len());
    states.push(x0.to_vec());
    let mut a = vec![0.0; d];
    let mut b = vec![0.0; d * m];
    let mut dw = vec![0.0; m];
    let t = grid.points();
    for k in 0..t.len() - 1 {
        let dt = t[k + 1] - t[k];
        let x = &states[k];
        system.drift(t[k], x, &mut a);
        system.diffusion(t[k], x, &mut b);
        let sd = dt.sqrt();
        for w in dw.iter_mut() {
            *w = sd * rng.sample::<f64, _>(StandardNormal);
        }
        let mut next: Vec<f64> = (0..d)
            .map(|i| {
                let noise: f64 = b[i * m..(i + 1) * m].iter().zip(&dw).map(|(bij, w)| bij * w).sum();
                x[i] + a[i] * dt + noise
            })
            .collect();
        system.project(&mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: k + 1 });
        }
        states.push(next);
    }
    SimPath::new(grid.clone(), states, system.labels())
}
