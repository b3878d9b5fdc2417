use super::objective::{Objective, OptimizerOptions, OptimizerResult, Termination};
use crate::error::{invalid, Result};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Vertex {
    x: Vec<f64>,
    f: f64,
    id: usize,
}

/// Nelder–Mead simplex search.
///
/// The initial simplex is `x0` plus one vertex per coordinate, displaced by
/// 5% of that coordinate (0.00025 when it is zero). Stops once the spread of
/// objective values is below `ftol` and the simplex diameter is below `xtol`,
/// or after `max_iter` iterations. Requiring both keeps a simplex that
/// straddles the minimum symmetrically (equal values, wide apart) from
/// stopping early. Vertices are ordered by `(f, creation order)` so runs are
/// deterministic.
pub fn simplex_minimize(obj: &Objective, x0: &[f64], opts: &OptimizerOptions) -> Result<OptimizerResult> {
    let n = obj.arity();
    if x0.len() != n {
        return Err(invalid(format!("x0 has {} entries, objective takes {n}", x0.len())));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(invalid("x0 must be finite"));
    }
    if !obj.in_bounds(x0) {
        return Err(invalid("x0 lies outside the bounds"));
    }

    let mut next_id = 0;
    let make = |x: Vec<f64>, f: f64, next_id: &mut usize| {
        *next_id += 1;
        Vertex { x, f, id: *next_id - 1 }
    };
    let mut simplex = vec![make(x0.to_vec(), obj.eval(x0), &mut next_id)];
    for i in 0..n {
        let mut x = x0.to_vec();
        let step = if x[i] != 0.0 { 0.05 * x[i] } else { 0.00025 };
        x[i] += step;
        if !obj.in_bounds(&x) {
            x[i] = x0[i] - step;
        }
        let f = obj.eval(&x);
        simplex.push(make(x, f, &mut next_id));
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let termination = loop {
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f).then(a.id.cmp(&b.id)));
        let best = &simplex[0];
        let spread = simplex.iter().map(|v| (v.f - best.f).abs()).fold(0.0, f64::max);
        let diameter = simplex
            .iter()
            .map(|v| v.x.iter().zip(&best.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread < opts.ftol && diameter < opts.xtol {
            break Termination::FunctionTolerance;
        }
        if iterations >= opts.max_iter {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(&v.x) {
                *c += x / n as f64;
            }
        }
        let worst_f = simplex[n].f;
        let second_worst_f = simplex[n - 1].f;
        let best_f = simplex[0].f;
        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + coef * (c - w)).collect()
        };
        let xr = toward(REFLECT, &simplex[n].x);
        let fr = obj.eval(&xr);

        if fr < best_f {
            let xe = toward(EXPAND, &simplex[n].x);
            let fe = obj.eval(&xe);
            simplex[n] = if fe < fr { make(xe, fe, &mut next_id) } else { make(xr, fr, &mut next_id) };
        } else if fr < second_worst_f {
            simplex[n] = make(xr, fr, &mut next_id);
        } else {
            let (xc, fc, accept) = if fr < worst_f {
                let xc = toward(CONTRACT, &simplex[n].x);
                let fc = obj.eval(&xc);
                (xc, fc, fc <= fr)
            } else {
                let xc = toward(-CONTRACT, &simplex[n].x);
                let fc = obj.eval(&xc);
                (xc, fc, fc < worst_f)
            };
            if accept {
                simplex[n] = make(xc, fc, &mut next_id);
            } else {
                let anchor = simplex[0].x.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = anchor.iter().zip(&v.x).map(|(b, x)| b + SHRINK * (x - b)).collect();
                    let f = obj.eval(&x);
                    *v = Vertex { x, f, id: v.id };
                }
                // Shrunk vertices count as new.
                for v in simplex.iter_mut().skip(1) {
                    v.id = next_id;
                    next_id += 1;
                }
            }
        }
        let best_now = simplex.iter().map(|v| v.f).fold(f64::INFINITY, f64::min);
        trace.push(best_now);
    };

    let best = &simplex[0];
    Ok(OptimizerResult {
        x: best.x.clone(),
        f: best.f,
        iterations,
        converged: termination != Termination::MaxIterations,
        termination,
        trace,
    })
}
