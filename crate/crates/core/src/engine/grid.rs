use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Strictly increasing time points, at least two of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t: Vec<f64>,
    uniform: bool,
}

impl TimeGrid {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.len() < 2 {
            return Err(invalid(format!("time grid needs at least 2 points, got {}", t.len())));
        }
        if t.iter().any(|x| !x.is_finite()) {
            return Err(invalid("time grid contains non-finite points"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("time grid must be strictly increasing"));
        }
        let h = t[1] - t[0];
        let uniform = t
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.abs().max(w[1].abs()));
        Ok(Self { t, uniform })
    }

    /// `steps + 1` equally spaced points on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(horizon > 0.0) {
            return Err(invalid("uniform grid needs steps >= 1 and a positive horizon"));
        }
        let dt = horizon / steps as f64;
        let mut t: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
        t[steps] = horizon;
        Ok(Self { t, uniform: true })
    }

    /// `points` equally spaced points from `start` to `end` inclusive,
    /// like `numpy.linspace`.
    pub fn linspace(start: f64, end: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(invalid("linspace needs at least 2 points"));
        }
        let step = (end - start) / (points - 1) as f64;
        let mut t: Vec<f64> = (0..points).map(|i| start + i as f64 * step).collect();
        t[points - 1] = end;
        let mut g = Self::new(t)?;
        g.uniform = true;
        Ok(g)
    }

    pub fn points(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn start(&self) -> f64 {
        self.t[0]
    }

    pub fn end(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    /// Step sizes `t[k+1] - t[k]`.
    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        self.t.windows(2).map(|w| w[1] - w[0])
    }
}

/// A simulated trajectory: one state vector per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPath {
    pub grid: TimeGrid,
    pub states: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl SimPath {
    pub fn new(grid: TimeGrid, states: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(invalid(format!(
                "{} states for a grid of {} points",
                states.len(),
                grid.len()
            )));
        }
        if states.iter().any(|s| s.len() != labels.len()) {
            return Err(invalid("state dimension does not match labels"));
        }
        if let Some(step) = states.iter().position(|s| s.iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFinite { step });
        }
        Ok(Self { grid, states, labels })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Values of one state dimension along the path.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    pub fn terminal(&self) -> &[f64] {
        &self.states[self.states.len() - 1]
    }

    /// CSV with a `t` column followed by one column per label.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (t, s) in self.grid.points().iter().zip(&self.states) {
            let mut row = vec![format_f64(*t)];
            row.extend(s.iter().map(|x| format_f64(*x)));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.get(0) != Some("t") {
            return Err(Error::Data("first column must be `t`".into()));
        }
        let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut t = Vec::new();
        let mut states = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::Data(format!("`{f}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            t.push(vals[0]);
            states.push(vals[1..].to_vec());
        }
        SimPath::new(TimeGrid::new(t)?, states, labels)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn format_f64(x: f64) -> String {
    format!("{x:?}")
}
