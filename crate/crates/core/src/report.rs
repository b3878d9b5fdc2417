//! Backtests (fit on one date range, simulate over the next) and their
//! outputs: R², JSON reports, plot CSV and SVG.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate_reaction_model, Param, ReactionFitOptions};
use crate::engine::{simulate_gbm, simulate_heston, simulate_vg, TimeGrid, VgParams};
use crate::error::{invalid, Error, Result};
use crate::estimate::{fit_gbm, fit_heston, fit_vg};
use crate::garch::{fit_garch, simulate_garch};
use crate::market_data::{log_returns, mean, rolling_volatility, DateRange, PriceSeries};
use crate::params::ModelKind;
use crate::reaction::{MarketState, RateConstants, ReactionModel};
use crate::rng::RngSeed;
use crate::stable::{fit_stable_mle, stable_sample, StableParams, DEFAULT_STABLE_ALPHA};

type Generator = Box<dyn Fn(RngSeed) -> Result<Vec<f64>>>;

/// `1 - SS_res / SS_tot`. Negative when the prediction does worse than the
/// mean of `actual`.
pub fn r_squared(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(invalid(format!(
            "R² needs equal nonzero lengths, got {} and {}",
            actual.len(),
            predicted.len()
        )));
    }
    let m = mean(actual);
    let ss_tot: f64 = actual.iter().map(|a| (a - m).powi(2)).sum();
    if !(ss_tot > 0.0) {
        return Err(Error::Data("actual series is constant; R² is undefined".into()));
    }
    let ss_res: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub paths: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// One compared quantity: actual values against the simulated path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub name: String,
    pub timestamps: Vec<NaiveDate>,
    pub actual: Vec<f64>,
    pub simulated: Vec<f64>,
    pub r_squared: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<Band>,
}

impl Track {
    fn new(name: &str, timestamps: Vec<NaiveDate>, actual: Vec<f64>, simulated: Vec<f64>) -> Result<Self> {
        let r2 = r_squared(&actual, &simulated).map_err(|e| e.context(format!("{name} track")))?;
        Ok(Self {
            name: name.into(),
            timestamps,
            actual,
            simulated,
            r_squared: r2,
            band: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub ticker: String,
    pub model: ModelKind,
    pub seed: u64,
    pub params: Vec<Param>,
    pub train_range: DateRange,
    pub test_range: DateRange,
    /// R² of the first track.
    pub r_squared: f64,
    pub tracks: Vec<Track>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestConfig {
    pub model: ModelKind,
    pub train: DateRange,
    pub test: DateRange,
    pub seed: u64,
    /// Stability index for the stable model.
    pub alpha: f64,
    /// Rolling window for the volatility series (reaction, heston).
    pub window: usize,
    pub annualization: f64,
    /// Extra paths for a mean ± std band; 0 for none.
    pub ensemble: usize,
    /// Integrate the reaction model with explicit Euler instead of RK4.
    pub euler: bool,
}

impl BacktestConfig {
    pub fn new(model: ModelKind, train: DateRange, test: DateRange) -> Self {
        Self {
            model,
            train,
            test,
            seed: 42,
            alpha: DEFAULT_STABLE_ALPHA,
            window: 30,
            annualization: 252.0,
            ensemble: 0,
            euler: false,
        }
    }
}

const NEGATIVE_R2_NOTE: &str =
    "R² below zero: the simulated path explains less variation than the mean of the actual series";

/// Fits `cfg.model` on the train rows and compares one seeded simulated
/// path with the test rows.
///
/// Returns are compared for `stable`, `vg` and `garch`; prices for `gbm`
/// and `heston`; prices and volatilities for `reaction`. `volatility`, when
/// given, is an observed volatility column row-aligned with `prices`;
/// otherwise the reaction model uses the rolling annualized volatility.
pub fn backtest(prices: &PriceSeries, volatility: Option<&[f64]>, cfg: &BacktestConfig) -> Result<BacktestReport> {
    if cfg.train.end >= cfg.test.start {
        return Err(invalid(format!(
            "train range {} must end before test range {}",
            cfg.train, cfg.test
        )));
    }
    let seed = RngSeed::new(cfg.seed);
    let ctx = |e: Error| e.context(format!("{} backtest", cfg.model));
    let (params, tracks) = match cfg.model {
        ModelKind::Reaction => reaction_backtest(prices, volatility, cfg),
        ModelKind::Stable | ModelKind::Vg | ModelKind::Garch => returns_backtest(prices, cfg, seed),
        ModelKind::Gbm | ModelKind::Heston => price_backtest(prices, cfg, seed),
        ModelKind::Fbm => Err(Error::Unsupported("fbm has no fitting procedure to backtest".into())),
    }
    .map_err(ctx)?;
    let mut notes = Vec::new();
    if tracks.iter().any(|t| t.r_squared < 0.0) {
        notes.push(NEGATIVE_R2_NOTE.to_string());
    }
    Ok(BacktestReport {
        ticker: prices.ticker.clone(),
        model: cfg.model,
        seed: cfg.seed,
        params,
        train_range: cfg.train,
        test_range: cfg.test,
        r_squared: tracks[0].r_squared,
        tracks,
        notes,
    })
}

fn rows_in(dates: &[NaiveDate], range: DateRange) -> std::ops::Range<usize> {
    let lo = dates.partition_point(|d| *d < range.start);
    let hi = dates.partition_point(|d| *d <= range.end);
    lo..hi.max(lo)
}

fn need(rows: &std::ops::Range<usize>, min: usize, what: &str, range: DateRange) -> Result<()> {
    if rows.len() < min {
        return Err(Error::Data(format!(
            "{what} range {range} has {} usable rows, need at least {min}",
            rows.len()
        )));
    }
    Ok(())
}

/// Mean and sample standard deviation across paths, per point.
fn band(paths: &[Vec<f64>]) -> Band {
    let n = paths.len();
    let len = paths[0].len();
    let mut m = vec![0.0; len];
    let mut s = vec![0.0; len];
    for i in 0..len {
        let col: Vec<f64> = paths.iter().map(|p| p[i]).collect();
        m[i] = mean(&col);
        s[i] = if n > 1 {
            (col.iter().map(|x| (x - m[i]).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
    }
    Band { paths: n, mean: m, std: s }
}

fn with_band(mut track: Track, ensemble: usize, path: impl Fn(RngSeed) -> Result<Vec<f64>>, seed: RngSeed) -> Result<Track> {
    if ensemble > 0 {
        let paths = (0..ensemble as u64).map(|i| path(seed.path(i))).collect::<Result<Vec<_>>>()?;
        track.band = Some(band(&paths));
    }
    Ok(track)
}

fn returns_backtest(prices: &PriceSeries, cfg: &BacktestConfig, seed: RngSeed) -> Result<(Vec<Param>, Vec<Track>)> {
    let train_rows = prices.indices_in(cfg.train);
    let test_rows = prices.indices_in(cfg.test);
    need(&train_rows, 2, "train", cfg.train)?;
    need(&test_rows, 3, "test", cfg.test)?;
    let train = log_returns(&prices.slice(train_rows))?;
    let test = log_returns(&prices.slice(test_rows))?;
    let m = test.len();

    let (params, generate): (Vec<Param>, Generator) = match cfg.model {
        ModelKind::Stable => {
            let fit = fit_stable_mle(&train, cfg.alpha)?;
            let p = StableParams::symmetric(cfg.alpha, fit.theta, fit.sigma);
            (
                vec![
                    Param::new("alpha", fit.alpha),
                    Param::new("theta", fit.theta),
                    Param::new("sigma", fit.sigma),
                    Param::new("loglik", fit.loglik),
                ],
                Box::new(move |s| stable_sample(m, &p, s)),
            )
        }
        ModelKind::Vg => {
            let p = fit_vg(&train.values)?;
            let grid = TimeGrid::uniform(m as f64, m)?;
            (
                vec![Param::new("theta", p.theta), Param::new("sigma", p.sigma), Param::new("nu", p.nu)],
                Box::new(move |s| vg_returns(&p, &grid, s)),
            )
        }
        ModelKind::Garch => {
            let fit = fit_garch(&train.values, 1, 1)?;
            let p = fit.params.clone();
            (
                vec![
                    Param::new("omega", p.omega),
                    Param::new("alpha1", p.alphas[0]),
                    Param::new("beta1", p.betas[0]),
                    Param::new("mean", p.mean),
                    Param::new("loglik", fit.loglik),
                ],
                Box::new(move |s| simulate_garch(&p, m, s)),
            )
        }
        other => unreachable!("{other} is not a returns model"),
    };
    let track = Track::new("returns", test.timestamps.clone(), test.values.clone(), generate(seed)?)?;
    let track = with_band(track, cfg.ensemble, &generate, seed)?;
    Ok((params, vec![track]))
}

fn vg_returns(p: &VgParams, grid: &TimeGrid, seed: RngSeed) -> Result<Vec<f64>> {
    let x = simulate_vg(p, grid, seed)?.component(0);
    Ok(x.windows(2).map(|w| w[1] - w[0]).collect())
}

fn price_backtest(prices: &PriceSeries, cfg: &BacktestConfig, seed: RngSeed) -> Result<(Vec<Param>, Vec<Track>)> {
    let train_rows = prices.indices_in(cfg.train);
    let test_rows = prices.indices_in(cfg.test);
    need(&train_rows, 2, "train", cfg.train)?;
    need(&test_rows, 2, "test", cfg.test)?;
    let train = log_returns(&prices.slice(train_rows))?;
    let test = prices.slice(test_rows);
    let s0 = test.prices()[0];
    let grid = TimeGrid::uniform((test.len() - 1) as f64, test.len() - 1)?;

    let (params, generate): (Vec<Param>, Generator) = match cfg.model {
        ModelKind::Gbm => {
            let p = fit_gbm(&train.values, s0)?;
            let grid = grid.clone();
            (
                vec![Param::new("mu", p.mu), Param::new("sigma", p.sigma)],
                Box::new(move |s| Ok(simulate_gbm(&p, &grid, s)?.component(0))),
            )
        }
        ModelKind::Heston => {
            let p = fit_heston(&train.values, cfg.window, s0)?;
            let grid = grid.clone();
            (
                vec![
                    Param::new("mu", p.mu),
                    Param::new("kappa", p.kappa),
                    Param::new("theta", p.theta),
                    Param::new("xi", p.xi),
                    Param::new("rho", p.rho),
                    Param::new("v0", p.v0),
                ],
                Box::new(move |s| Ok(simulate_heston(&p, &grid, s)?.component(0))),
            )
        }
        other => unreachable!("{other} is not a price model"),
    };
    let track = Track::new("price", test.timestamps().to_vec(), test.prices().to_vec(), generate(seed)?)?;
    let track = with_band(track, cfg.ensemble, &generate, seed)?;
    Ok((params, vec![track]))
}

fn reaction_backtest(
    prices: &PriceSeries,
    volatility: Option<&[f64]>,
    cfg: &BacktestConfig,
) -> Result<(Vec<Param>, Vec<Track>)> {
    // (date, S, V) rows.
    let (dates, s, v): (Vec<NaiveDate>, Vec<f64>, Vec<f64>) = match volatility {
        Some(vol) => {
            if vol.len() != prices.len() {
                return Err(invalid("volatility column length differs from prices"));
            }
            (prices.timestamps().to_vec(), prices.prices().to_vec(), vol.to_vec())
        }
        None => {
            let vol = rolling_volatility(&log_returns(prices)?, cfg.window, cfg.annualization)?;
            let offset = prices.len() - vol.values.len();
            (vol.timestamps.clone(), prices.prices()[offset..].to_vec(), vol.values)
        }
    };
    let train_rows = rows_in(&dates, cfg.train);
    let test_rows = rows_in(&dates, cfg.test);
    need(&train_rows, 2, "train", cfg.train)?;
    need(&test_rows, 2, "test", cfg.test)?;

    let fit = calibrate_reaction_model(&s[train_rows.clone()], &v[train_rows], &ReactionFitOptions::default())?;
    let rates = RateConstants::from_slice(&fit.values())?;
    let model = ReactionModel::new(rates);
    let m = test_rows.len();
    let x0 = MarketState::new(s[test_rows.start], v[test_rows.start]);
    let grid = TimeGrid::linspace(0.0, m as f64, m)?;
    let path = if cfg.euler {
        model.simulate_euler(x0, &grid)?
    } else {
        model.simulate_deterministic(x0, &grid)?
    };
    let mut params = fit.parameters.clone();
    if let Some(f) = fit.objective {
        params.push(Param::new("objective", f));
    }
    let test_dates = dates[test_rows.clone()].to_vec();
    let tracks = vec![
        Track::new("price", test_dates.clone(), s[test_rows.clone()].to_vec(), path.component(0))?,
        Track::new("volatility", test_dates, v[test_rows].to_vec(), path.component(1))?,
    ];
    Ok((params, tracks))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotFormat {
    Csv,
    Svg,
}

impl std::str::FromStr for PlotFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(PlotFormat::Csv),
            "svg" => Ok(PlotFormat::Svg),
            _ => Err(invalid(format!("unknown plot format {s:?}"))),
        }
    }
}

/// Writes one track as plot data: CSV with columns `t,actual,simulated`, or
/// an SVG line chart titled `"<ticker> <model>"`.
pub fn emit_plot(report: &BacktestReport, track: &Track, format: PlotFormat, path: impl AsRef<Path>) -> Result<()> {
    if track.actual.is_empty() {
        return Err(invalid("nothing to plot"));
    }
    let path = path.as_ref();
    let body = match format {
        PlotFormat::Csv => plot_csv(track),
        PlotFormat::Svg => plot_svg(&format!("{} {}", report.ticker, report.model), track),
    };
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

fn plot_csv(track: &Track) -> String {
    let mut out = String::from("t,actual,simulated\n");
    for ((d, a), s) in track.timestamps.iter().zip(&track.actual).zip(&track.simulated) {
        let _ = writeln!(out, "{d},{a:?},{s:?}");
    }
    out
}

/// Reads a plot CSV back into `(dates, actual, simulated)`.
pub fn read_plot_csv(path: impl AsRef<Path>) -> Result<(Vec<NaiveDate>, Vec<f64>, Vec<f64>)> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    let (mut t, mut a, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Data(format!("{}: short row", path.display())));
        t.push(
            NaiveDate::parse_from_str(field(0)?, "%Y-%m-%d").map_err(|e| Error::Data(format!("bad date: {e}")))?,
        );
        a.push(field(1)?.parse().map_err(|e| Error::Data(format!("bad value: {e}")))?);
        s.push(field(2)?.parse().map_err(|e| Error::Data(format!("bad value: {e}")))?);
    }
    Ok((t, a, s))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const W: f64 = 800.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 40.0;

fn plot_svg(title: &str, track: &Track) -> String {
    let n = track.actual.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let band_lines = track.band.as_ref().map(|b| {
        let upper: Vec<f64> = b.mean.iter().zip(&b.std).map(|(m, s)| m + s).collect();
        let lower: Vec<f64> = b.mean.iter().zip(&b.std).map(|(m, s)| m - s).collect();
        (upper, lower)
    });
    let all = track
        .actual
        .iter()
        .chain(&track.simulated)
        .chain(band_lines.iter().flat_map(|(u, l)| u.iter().chain(l)));
    for v in all {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let x = |i: usize| LEFT + (W - LEFT - RIGHT) * if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };
    let y = |v: f64| TOP + (H - TOP - BOTTOM) * (hi - v) / (hi - lo);
    let points = |vals: &[f64]| {
        vals.iter()
            .enumerate()
            .map(|(i, v)| format!("{:.2},{:.2}", x(i), y(*v)))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        W / 2.0,
        xml_escape(title)
    );
    // Axes.
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - BOTTOM,
        W - RIGHT,
        H - BOTTOM
    );
    let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#, H - BOTTOM);
    for (v, label) in [(hi, hi), (lo, lo)] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{label:.4}</text>"#,
            LEFT - 6.0,
            y(v) + 4.0
        );
    }
    if let (Some(first), Some(last)) = (track.timestamps.first(), track.timestamps.last()) {
        let _ = writeln!(
            out,
            r#"<text x="{LEFT}" y="{}" font-family="sans-serif" font-size="11">{first}</text>"#,
            H - BOTTOM + 16.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{last}</text>"#,
            W - RIGHT,
            H - BOTTOM + 16.0
        );
    }
    if let Some((upper, lower)) = &band_lines {
        let mut pts: Vec<String> = upper
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.2},{:.2}", x(i), y(*v)))
            .collect();
        pts.extend(lower.iter().enumerate().rev().map(|(i, v)| format!("{:.2},{:.2}", x(i), y(*v))));
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="darkorange" fill-opacity="0.2" stroke="none"/>"#,
            pts.join(" ")
        );
    }
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        points(&track.actual)
    );
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="darkorange" stroke-width="1.5"/>"#,
        points(&track.simulated)
    );
    // Legend.
    for (row, (label, color)) in [("Actual", "steelblue"), ("Simulated", "darkorange")].iter().enumerate() {
        let ly = TOP + 10.0 + 16.0 * row as f64;
        let lx = W - RIGHT - 110.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{label}</text>"#,
            lx + 26.0,
            ly + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Plain-text summary of a stored backtest report.
pub fn render_report(report: &BacktestReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} (seed {})", report.ticker, report.model, report.seed);
    let _ = writeln!(out, "train {}  test {}", report.train_range, report.test_range);
    let _ = writeln!(out, "parameters:");
    let width = report.params.iter().map(|p| p.name.len()).max().unwrap_or(0);
    for p in &report.params {
        let _ = writeln!(out, "  {:<width$}  {:.6e}", p.name, p.value);
    }
    for t in &report.tracks {
        let _ = writeln!(out, "R² {:<10} {:.6}  ({} points)", t.name, t.r_squared, t.actual.len());
    }
    for note in &report.notes {
        let _ = writeln!(out, "note: {note}");
    }
    out
}
