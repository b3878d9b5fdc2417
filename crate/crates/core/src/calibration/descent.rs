use super::objective::{Objective, OptimizerOptions, OptimizerResult, Termination};
use crate::error::{invalid, Error, Result};

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Iterations over which decrease and step length are measured for the
/// `ftol` and `xtol` tests.
const FTOL_WINDOW: usize = 10;

fn fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// Central-difference gradient with step `1e-6 · max(1, |x_i|)`. Next to a
/// bound the difference is taken one-sided, inward.
pub fn finite_difference_gradient(obj: &Objective, x: &[f64], fx: f64) -> Vec<f64> {
    let bounds = obj.bounds();
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = fd_step(x[i]);
            let (lo, hi) = bounds.map_or((f64::NEG_INFINITY, f64::INFINITY), |b| b[i]);
            let up = x[i] + h <= hi;
            let down = x[i] - h >= lo;
            let mut at = |v: f64| {
                probe[i] = v;
                let f = obj.eval(&probe);
                probe[i] = x[i];
                f
            };
            match (down, up) {
                (true, true) => (at(x[i] + h) - at(x[i] - h)) / (2.0 * h),
                (false, true) => (at(x[i] + h) - fx) / h,
                (true, false) => (fx - at(x[i] - h)) / h,
                (false, false) => 0.0,
            }
        })
        .collect()
}

fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(*lo, *hi);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected gradient descent inside the objective's box.
///
/// Gradients come from [`finite_difference_gradient`]. Each iteration tries a
/// Barzilai–Borwein step along the projected path and halves it until the
/// Armijo condition (coefficient 1e-4) holds, so accepted objective values
/// never increase. Stops when, over the last [`FTOL_WINDOW`] iterations, the
/// relative decrease is below `ftol` or every step is below `xtol`; on a
/// step that cannot be made to decrease the objective; or at `max_iter`.
///
/// A non-finite gradient at the starting point is an error; later in the run
/// it ends the search with the best point so far and
/// [`Termination::NonFiniteGradient`].
pub fn bounded_descent(obj: &Objective, x0: &[f64], opts: &OptimizerOptions) -> Result<OptimizerResult> {
    let bounds = obj
        .bounds()
        .ok_or_else(|| invalid("bounded descent needs bounds"))?
        .to_vec();
    if x0.len() != obj.arity() {
        return Err(invalid(format!("x0 has {} entries, objective takes {}", x0.len(), obj.arity())));
    }
    if !obj.in_bounds(x0) {
        return Err(invalid("x0 lies outside the bounds"));
    }
    let mut x = x0.to_vec();
    let mut fx = obj.eval(&x);
    if !fx.is_finite() {
        return Err(Error::NonFiniteGradient { iteration: 0 });
    }
    let mut g = finite_difference_gradient(obj, &x, fx);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteGradient { iteration: 0 });
    }

    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut step = if gmax > 0.0 { 1.0 / gmax } else { 1.0 };
    let mut trace = Vec::new();
    let mut steps: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let termination = loop {
        if iterations >= opts.max_iter {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let mut accepted = None;
        let mut t = step;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            project(&mut trial, &bounds);
            let d: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            if d.iter().all(|v| *v == 0.0) {
                break;
            }
            let ft = obj.eval(&trial);
            if ft <= fx + ARMIJO * dot(&g, &d) {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            trace.push(fx);
            break Termination::NoDescent;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let g_new = finite_difference_gradient(obj, &x_new, f_new);
        x = x_new;
        fx = f_new;
        trace.push(fx);

        if trace.len() > FTOL_WINDOW {
            let before = trace[trace.len() - 1 - FTOL_WINDOW];
            let scale = before.abs().max(fx.abs()).max(1.0);
            if before - fx <= opts.ftol * scale {
                break Termination::FunctionTolerance;
            }
        }
        steps.push(s.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        if steps.len() >= FTOL_WINDOW && steps[steps.len() - FTOL_WINDOW..].iter().all(|l| *l < opts.xtol) {
            break Termination::StepTolerance;
        }
        if g_new.iter().any(|v| !v.is_finite()) {
            break Termination::NonFiniteGradient;
        }
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { (dot(&s, &s) / sy).clamp(1e-12, 1e12) } else { (2.0 * t).min(1e12) };
        g = g_new;
    };

    Ok(OptimizerResult {
        x,
        f: fx,
        iterations,
        converged: !matches!(termination, Termination::MaxIterations | Termination::NonFiniteGradient),
        termination,
        trace,
    })
}
