use serde::{Deserialize, Serialize};

type ObjectiveFn<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;

/// Scalar function to minimize, optionally restricted to a box.
///
/// Points outside the box, and points where the function is NaN, evaluate
/// to `+∞`.
pub struct Objective<'a> {
    arity: usize,
    f: ObjectiveFn<'a>,
    bounds: Option<Vec<(f64, f64)>>,
}

impl<'a> Objective<'a> {
    pub fn new(arity: usize, f: impl Fn(&[f64]) -> f64 + 'a) -> Self {
        Self {
            arity,
            f: Box::new(f),
            bounds: None,
        }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        assert_eq!(bounds.len(), self.arity, "one bound pair per parameter");
        self.bounds = Some(bounds);
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bounds(&self) -> Option<&[(f64, f64)]> {
        self.bounds.as_deref()
    }

    pub fn in_bounds(&self, x: &[f64]) -> bool {
        match &self.bounds {
            Some(b) => x.iter().zip(b).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi),
            None => true,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if !self.in_bounds(x) {
            return f64::INFINITY;
        }
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub ftol: f64,
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            ftol: 1e-8,
            xtol: 1e-8,
            max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    FunctionTolerance,
    StepTolerance,
    NoDescent,
    MaxIterations,
    NonFiniteGradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerResult {
    pub x: Vec<f64>,
    /// Objective at `x`, exactly as returned by [`Objective::eval`].
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Best objective value after each iteration.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: f64,
}

impl Param {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
        }
    }
}

/// Outcome of fitting one model; the JSON form of `calibrate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub model: String,
    pub parameters: Vec<Param>,
    /// Minimized objective (negative log-likelihood for likelihood fits);
    /// absent for moment estimators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl CalibrationResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn values(&self) -> Vec<f64> {
        self.parameters.iter().map(|p| p.value).collect()
    }
}
