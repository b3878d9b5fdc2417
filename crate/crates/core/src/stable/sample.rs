use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::Exp1;

use super::StableParams;
use crate::error::Result;
use crate::rng::RngSeed;

/// `n` i.i.d. draws by the Chambers–Mallows–Stuck transform:
/// `X = sin(αU) / cos(U)^{1/α} · (cos(U - αU) / E)^{(1-α)/α}` with
/// `U ~ Uniform(-π/2, π/2)` and `E ~ Exp(1)`.
pub fn stable_sample(n: usize, p: &StableParams, seed: RngSeed) -> Result<Vec<f64>> {
    p.validate()?;
    let mut rng = seed.rng();
    let a = p.alpha;
    Ok((0..n)
        .map(|_| {
            let u = loop {
                let u: f64 = rng.random::<f64>();
                if u > 0.0 {
                    break (u - 0.5) * 2.0 * FRAC_PI_2;
                }
            };
            let e: f64 = rng.sample(Exp1);
            let x = if a == 1.0 {
                u.tan()
            } else {
                (a * u).sin() / u.cos().powf(1.0 / a) * ((u - a * u).cos() / e).powf((1.0 - a) / a)
            };
            p.loc + p.scale * x
        })
        .collect())
}
