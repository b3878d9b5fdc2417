mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stochlab::calibration::{calibrate_reaction_model, ReactionFitOptions};
use stochlab::engine::TimeGrid;
use stochlab::estimate::{fit_gbm, fit_heston, fit_vg};
use stochlab::garch::fit_garch;
use stochlab::market_data::{load_csv, log_returns, read_csv, rolling_volatility, write_csv, CsvSchema, LoadedCsv};
use stochlab::params::{simulate, ReactionParams, SimulateOptions};
use stochlab::reaction::{ReactionModel, ReactionVariant};
use stochlab::report::{backtest, emit_plot, r_squared, render_report, BacktestConfig, PlotFormat};
use stochlab::stable::{fit_stable_mle, DEFAULT_STABLE_ALPHA};
use stochlab::{
    BacktestReport, CalibrationResult, DateRange, Error, ModelKind, ModelParams, Param, RateConstants, RngSeed,
    StableParams,
};

use config::Config;

#[derive(Debug, Parser)]
#[command(name = "stochlab", version, about = "Simulate, calibrate and backtest stochastic market models")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Seed for every random draw [default: 42]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key=value file supplying defaults for the global flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: $STOCHLAB_OUT_DIR, else ./out]
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Date column of input CSVs [default: date]
    #[arg(long, global = true)]
    date_col: Option<String>,
    /// Price column of input CSVs [default: adj_close]
    #[arg(long, global = true)]
    price_col: Option<String>,
    /// Observed volatility column, used by the reaction model
    #[arg(long, global = true)]
    vol_col: Option<String>,
    /// Stability index of the stable model [default: 1.5]
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Rolling volatility window in returns [default: 30]
    #[arg(long, global = true)]
    window: Option<usize>,
    /// Periods per year for annualizing volatility [default: 252]
    #[arg(long, global = true)]
    annualization: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a price CSV and store it in canonical form
    Ingest {
        csv: PathBuf,
        #[arg(long)]
        ticker: Option<String>,
    },
    /// Download a price CSV over HTTP, validate it and store it
    Fetch {
        url: String,
        #[arg(long)]
        ticker: Option<String>,
    },
    /// Fit a model to the train range of a price CSV
    Calibrate {
        csv: PathBuf,
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        train: DateRange,
        /// GARCH order in past variances
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// GARCH order in past squared shocks
        #[arg(long, default_value_t = 1)]
        q: usize,
    },
    /// Simulate paths from a JSON parameter file
    Simulate {
        #[arg(long)]
        params: PathBuf,
        /// Must match the `model` tag of the parameter file when given
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 252)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        paths: usize,
        /// Explicit Euler for the noiseless reaction model
        #[arg(long)]
        euler: bool,
    },
    /// Equilibria and their stability for given reaction rate constants
    Equilibrium {
        /// Rate constants as k1,k2,k3,k4
        #[arg(long)]
        k: RateConstants,
        #[arg(long, value_enum, default_value_t = Variant::Bilinear)]
        variant: Variant,
    },
    /// Fit on the train range, simulate over the test range and compare
    Backtest {
        csv: PathBuf,
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        train: DateRange,
        #[arg(long)]
        test: DateRange,
        /// Extra seeded paths for a mean and standard deviation band
        #[arg(long, default_value_t = 0)]
        ensemble: usize,
        /// Explicit Euler for the reaction model
        #[arg(long)]
        euler: bool,
        #[arg(long, value_enum, default_value_t = Plots::Both)]
        plots: Plots,
    },
    /// Print a stored backtest or calibration JSON as text
    Report { json: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Variant {
    Bilinear,
    Linear,
}

impl From<Variant> for ReactionVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Bilinear => ReactionVariant::Bilinear,
            Variant::Linear => ReactionVariant::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Plots {
    Csv,
    Svg,
    Both,
    None,
}

impl Plots {
    fn formats(self) -> Vec<(PlotFormat, &'static str)> {
        match self {
            Plots::Csv => vec![(PlotFormat::Csv, "csv")],
            Plots::Svg => vec![(PlotFormat::Svg, "svg")],
            Plots::Both => vec![(PlotFormat::Csv, "csv"), (PlotFormat::Svg, "svg")],
            Plots::None => vec![],
        }
    }
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T> = Result<T, Failure>;

/// Global settings after merging flags, config file and environment.
struct Settings {
    seed: u64,
    out_dir: PathBuf,
    schema: CsvSchema,
    alpha: f64,
    window: usize,
    annualization: f64,
}

impl Settings {
    fn resolve(g: &GlobalArgs) -> CliResult<Self> {
        let cfg = match &g.config {
            Some(path) => Config::load(path).map_err(Failure::Usage)?,
            None => Config::default(),
        };
        let usage = Failure::Usage;
        let out_dir = g
            .out_dir
            .clone()
            .or_else(|| cfg.get("out_dir").map(PathBuf::from))
            .or_else(|| std::env::var_os("STOCHLAB_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let text = |flag: &Option<String>, key: &str, default: &str| {
            flag.clone()
                .or_else(|| cfg.get(key).map(String::from))
                .unwrap_or_else(|| default.to_string())
        };
        Ok(Self {
            seed: g.seed.or(cfg.parsed("seed").map_err(usage)?).unwrap_or(42),
            out_dir,
            schema: CsvSchema {
                date_col: text(&g.date_col, "date_col", "date"),
                price_col: text(&g.price_col, "price_col", "adj_close"),
                vol_col: g.vol_col.clone().or_else(|| cfg.get("vol_col").map(String::from)),
            },
            alpha: g.alpha.or(cfg.parsed("alpha").map_err(usage)?).unwrap_or(DEFAULT_STABLE_ALPHA),
            window: g.window.or(cfg.parsed("window").map_err(usage)?).unwrap_or(30),
            annualization: g
                .annualization
                .or(cfg.parsed("annualization").map_err(usage)?)
                .unwrap_or(252.0),
        })
    }

    fn out_file(&self, name: &str) -> CliResult<PathBuf> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| Error::io(&self.out_dir, e))?;
        Ok(self.out_dir.join(name))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else if e.is_data() {
        2
    } else {
        1
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let settings = Settings::resolve(&cli.global)?;
    match cli.command {
        Command::Ingest { csv, ticker } => ingest(&settings, &csv, ticker),
        Command::Fetch { url, ticker } => fetch(&settings, &url, ticker),
        Command::Calibrate {
            csv,
            model,
            train,
            p,
            q,
        } => calibrate(&settings, &csv, model, train, p, q),
        Command::Simulate {
            params,
            model,
            horizon,
            steps,
            paths,
            euler,
        } => simulate_cmd(&settings, &params, model, horizon, steps, paths, euler),
        Command::Equilibrium { k, variant } => {
            let report = ReactionModel::new(k).with_variant(variant.into()).classify();
            println!("{}", to_json(&report)?);
            Ok(())
        }
        Command::Backtest {
            csv,
            model,
            train,
            test,
            ensemble,
            euler,
            plots,
        } => {
            let mut cfg = BacktestConfig::new(model, train, test);
            cfg.ensemble = ensemble;
            cfg.euler = euler;
            backtest_cmd(&settings, &csv, cfg, plots)
        }
        Command::Report { json } => report_cmd(&json),
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value).map_err(Error::from)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let body = to_json(value)? + "\n";
    std::fs::write(path, body).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn load(settings: &Settings, csv: &Path) -> CliResult<LoadedCsv> {
    Ok(load_csv(csv, &settings.schema)?)
}

#[derive(Serialize)]
struct IngestSummary {
    ticker: String,
    rows: usize,
    dropped: usize,
    first: String,
    last: String,
    stored: PathBuf,
}

fn store(settings: &Settings, loaded: &LoadedCsv, ticker: Option<String>) -> CliResult<IngestSummary> {
    let mut series = loaded.series.clone();
    if let Some(t) = ticker {
        series.ticker = t;
    }
    if series.ticker.is_empty() {
        return Err(Failure::Usage("cannot derive a ticker; pass --ticker".into()));
    }
    let path = settings.out_file(&format!("{}.csv", series.ticker))?;
    write_csv(&series, &path)?;
    let dates = series.timestamps();
    Ok(IngestSummary {
        ticker: series.ticker.clone(),
        rows: series.len(),
        dropped: loaded.dropped,
        first: dates[0].to_string(),
        last: dates[dates.len() - 1].to_string(),
        stored: path,
    })
}

fn ingest(settings: &Settings, csv: &Path, ticker: Option<String>) -> CliResult<()> {
    let loaded = load(settings, csv)?;
    println!("{}", to_json(&store(settings, &loaded, ticker)?)?);
    Ok(())
}

fn fetch(settings: &Settings, url: &str, ticker: Option<String>) -> CliResult<()> {
    let body = ureq::get(url)
        .call()
        .and_then(|mut r| r.body_mut().read_to_string())
        .map_err(|e| Error::Data(format!("fetching {url}: {e}")))?;
    let ticker = ticker.unwrap_or_else(|| ticker_from_url(url));
    let loaded = read_csv(body.as_bytes(), &settings.schema, ticker.clone())
        .map_err(|e| e.context(format!("response from {url}")))?;
    println!("{}", to_json(&store(settings, &loaded, Some(ticker))?)?);
    Ok(())
}

/// Last path segment of the URL without query or extension.
fn ticker_from_url(url: &str) -> String {
    let path = url.split(['?', '#']).next().unwrap_or("");
    let last = path.trim_end_matches('/').rsplit('/').next().unwrap_or("");
    let stem = last.split('.').next().unwrap_or("");
    if stem.is_empty() || stem.contains(':') {
        "fetched".into()
    } else {
        stem.into()
    }
}

fn calibrate(settings: &Settings, csv: &Path, model: ModelKind, train: DateRange, p: usize, q: usize) -> CliResult<()> {
    let loaded = load(settings, csv)?;
    let rows = loaded.series.indices_in(train);
    if rows.len() < 3 {
        return Err(Error::Data(format!("train range {train} has {} rows, need at least 3", rows.len())).into());
    }
    let series = loaded.series.slice(rows.clone());
    let returns = log_returns(&series)?;
    let last_price = *series.prices().last().expect("nonempty");
    let ctx = |e: Error| e.context(format!("{model} calibration"));

    let (result, params) = match model {
        ModelKind::Reaction => {
            let (s, v) = match &loaded.volatility {
                Some(vol) => (series.prices().to_vec(), vol[rows].to_vec()),
                None => {
                    let vol = rolling_volatility(&returns, settings.window, settings.annualization).map_err(ctx)?;
                    let offset = series.len() - vol.values.len();
                    (series.prices()[offset..].to_vec(), vol.values)
                }
            };
            let fit = calibrate_reaction_model(&s, &v, &ReactionFitOptions::default()).map_err(ctx)?;
            let params = ModelParams::Reaction(ReactionParams {
                rates: RateConstants::from_slice(&fit.values())?,
                s0: s[s.len() - 1],
                v0: v[v.len() - 1],
                noise_scale: 0.0,
                variant: ReactionVariant::Bilinear,
            });
            (fit, params)
        }
        ModelKind::Stable => {
            let fit = fit_stable_mle(&returns, settings.alpha).map_err(ctx)?;
            let result = CalibrationResult {
                model: "stable".into(),
                parameters: vec![
                    Param::new("alpha", fit.alpha),
                    Param::new("theta", fit.theta),
                    Param::new("sigma", fit.sigma),
                ],
                objective: Some(-fit.loglik),
                iterations: fit.iterations,
                converged: fit.converged,
            };
            (result, ModelParams::Stable(StableParams::symmetric(fit.alpha, fit.theta, fit.sigma)))
        }
        ModelKind::Garch => {
            let fit = fit_garch(&returns.values, p, q).map_err(ctx)?;
            let mut parameters = vec![Param::new("omega", fit.params.omega)];
            parameters.extend(fit.params.alphas.iter().enumerate().map(|(i, a)| Param::new(format!("alpha{}", i + 1), *a)));
            parameters.extend(fit.params.betas.iter().enumerate().map(|(i, b)| Param::new(format!("beta{}", i + 1), *b)));
            parameters.push(Param::new("mean", fit.params.mean));
            let result = CalibrationResult {
                model: "garch".into(),
                parameters,
                objective: Some(-fit.loglik),
                iterations: fit.iterations,
                converged: fit.converged,
            };
            (result, ModelParams::Garch(fit.params))
        }
        ModelKind::Heston => {
            let h = fit_heston(&returns.values, settings.window, last_price).map_err(ctx)?;
            let parameters = vec![
                Param::new("mu", h.mu),
                Param::new("kappa", h.kappa),
                Param::new("theta", h.theta),
                Param::new("xi", h.xi),
                Param::new("rho", h.rho),
                Param::new("v0", h.v0),
            ];
            (moment_result("heston", parameters), ModelParams::Heston(h))
        }
        ModelKind::Vg => {
            let v = fit_vg(&returns.values).map_err(ctx)?;
            let parameters = vec![Param::new("theta", v.theta), Param::new("sigma", v.sigma), Param::new("nu", v.nu)];
            (moment_result("vg", parameters), ModelParams::Vg(v))
        }
        ModelKind::Gbm => {
            let g = fit_gbm(&returns.values, last_price).map_err(ctx)?;
            let parameters = vec![Param::new("mu", g.mu), Param::new("sigma", g.sigma)];
            (moment_result("gbm", parameters), ModelParams::Gbm(g))
        }
        ModelKind::Fbm => {
            return Err(Failure::Usage("fbm has no calibration; pass its parameters to `simulate`".into()));
        }
    };
    let ticker = &loaded.series.ticker;
    write_json(&settings.out_file(&format!("{ticker}_{model}_calibration.json"))?, &result)?;
    write_json(&settings.out_file(&format!("{ticker}_{model}_params.json"))?, &params)?;
    println!("{}", to_json(&result)?);
    Ok(())
}

fn moment_result(model: &str, parameters: Vec<Param>) -> CalibrationResult {
    CalibrationResult {
        model: model.into(),
        parameters,
        objective: None,
        iterations: 0,
        converged: true,
    }
}

fn simulate_cmd(
    settings: &Settings,
    params_path: &Path,
    model: Option<ModelKind>,
    horizon: f64,
    steps: usize,
    paths: usize,
    euler: bool,
) -> CliResult<()> {
    let text = std::fs::read_to_string(params_path).map_err(|e| Error::io(params_path, e))?;
    let params: ModelParams = serde_json::from_str(&text)
        .map_err(|e| Error::from(e).context(params_path.display().to_string()))?;
    if let Some(m) = model {
        if m != params.kind() {
            return Err(Failure::Usage(format!(
                "--model {m} does not match the {} parameter file",
                params.kind()
            )));
        }
    }
    if paths == 0 {
        return Err(Failure::Usage("--paths must be at least 1".into()));
    }
    let grid = TimeGrid::uniform(horizon, steps)?;
    let seed = RngSeed::new(settings.seed);
    let opts = SimulateOptions { euler };
    let kind = params.kind();
    for i in 0..paths {
        let (path_seed, name) = if paths == 1 {
            (seed, format!("{kind}_sim.csv"))
        } else {
            (seed.path(i as u64), format!("{kind}_sim_{i}.csv"))
        };
        let path = simulate(&params, &grid, path_seed, opts).map_err(|e| e.context(format!("{kind} simulation")))?;
        let out = settings.out_file(&name)?;
        path.save_csv(&out)?;
        println!("{}", out.display());
    }
    Ok(())
}

fn backtest_cmd(settings: &Settings, csv: &Path, mut cfg: BacktestConfig, plots: Plots) -> CliResult<()> {
    cfg.seed = settings.seed;
    cfg.alpha = settings.alpha;
    cfg.window = settings.window;
    cfg.annualization = settings.annualization;
    let loaded = load(settings, csv)?;
    let report = backtest(&loaded.series, loaded.volatility.as_deref(), &cfg)?;
    let stem = format!("{}_{}", report.ticker, report.model);
    let json = settings.out_file(&format!("{stem}_backtest.json"))?;
    write_json(&json, &report)?;
    for track in &report.tracks {
        for (format, ext) in plots.formats() {
            let path = settings.out_file(&format!("{stem}_{}.{ext}", track.name))?;
            emit_plot(&report, track, format, &path)?;
        }
    }
    print!("{}", render_report(&report));
    println!("report: {}", json.display());
    Ok(())
}

fn report_cmd(path: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if let Ok(report) = serde_json::from_str::<BacktestReport>(&text) {
        for track in &report.tracks {
            let recomputed = r_squared(&track.actual, &track.simulated)?;
            if recomputed != track.r_squared {
                return Err(Error::Data(format!(
                    "{}: stored R² {} of the {} track differs from recomputed {}",
                    path.display(),
                    track.r_squared,
                    track.name,
                    recomputed
                ))
                .into());
            }
        }
        print!("{}", render_report(&report));
        return Ok(());
    }
    let result: CalibrationResult =
        serde_json::from_str(&text).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    println!("model: {}", result.model);
    for p in &result.parameters {
        println!("  {:<8} {:.6e}", p.name, p.value);
    }
    if let Some(f) = result.objective {
        println!("objective: {f:.6}");
    }
    println!("iterations: {}  converged: {}", result.iterations, result.converged);
    Ok(())
}
