use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rdps::full::{monotonicity_check, ConformityKind};
use rdps::sim::{
    defaults, emit_all, emit_bounds_csv, fmt_f64, run_experiment, Backend, ExperimentConfig, ExperimentResult,
    MethodSpec, Replication, SettingKind,
};
use rdps::{Dataset, Error, PredictiveSystem, Result};

const FAILURE_LIMIT: f64 = 0.01;

#[derive(Parser)]
#[command(name = "rdps", version, about = "Predictive systems from point regressors: build, evaluate and simulate")]
struct Cli {
    /// Worker threads for replications and grid refits (default: all cores).
    #[arg(long, global = true, env = "RDPS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    #[command(long_about = SIMULATE_HELP)]
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the canned linear and nonlinear experiments.
    Reproduce(ReproduceArgs),
    /// Write one system's bound curves (`y,lower,upper`) for a simulated replication.
    Bounds(BoundsArgs),
    /// Central prediction interval for a covariate, from a CSV dataset.
    Interval(IntervalArgs),
    /// Scan a y' grid for decreasing conformity differences.
    CheckMonotonicity(MonotonicityArgs),
}

const SIMULATE_HELP: &str = "Run an experiment described by a flat TOML config file.

Keys and defaults:
  setting          linear | nonlinear (required)
  n                100 (at least 10)
  replications     1000
  seed             42
  methods          [\"lspm\", \"krrpm\", \"rdps-ols-deleted\", \"rdps-krr-deleted\"]
  levels           [0.50, 0.55, ..., 0.95]
  trim_fraction    0.05
  strategy         grid (grid | exact | limits)
  grid_points      512
  grid_span        3.0
  split_fraction   0.5
  smoother_bandwidth 1.0
  sgd_passes       10
  output_dir       results

Writes records.csv, summary.csv, thickness.csv and failures.csv into output_dir.
Exits with status 2 when more than 1% of method-replication cells fail.

Methods: split-cps-ols, split-rdps-ols, split-cps-krr, lspm, lspm-plain, krrpm,
rdps-ols, rdps-krr, rdps-ols-deleted, rdps-krr-deleted, rdps-qsgd, rdps-smoother.";

#[derive(Clone, Copy, ValueEnum)]
enum SettingChoice {
    Linear,
    Nonlinear,
    Both,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, value_enum, default_value = "both")]
    setting: SettingChoice,
    #[arg(long, default_value_t = defaults::SEED)]
    seed: u64,
    #[arg(long, default_value_t = defaults::REPLICATIONS)]
    replications: usize,
    #[arg(long, default_value_t = defaults::N)]
    n: usize,
    /// Trim fraction of the deleted variants.
    #[arg(long, default_value_t = defaults::TRIM_FRACTION)]
    trim: f64,
    /// y' grid size for the full RDPS methods.
    #[arg(long, default_value_t = defaults::GRID_POINTS)]
    grid_points: usize,
    /// Methods to run, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = defaults::METHODS.map(String::from))]
    methods: Vec<String>,
    /// Results go to <DIR>/linear and <DIR>/nonlinear.
    #[arg(long, default_value = "results")]
    output_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimSetting {
    Linear,
    Nonlinear,
}

impl From<SimSetting> for SettingKind {
    fn from(s: SimSetting) -> Self {
        match s {
            SimSetting::Linear => SettingKind::Linear,
            SimSetting::Nonlinear => SettingKind::Nonlinear,
        }
    }
}

#[derive(Args)]
struct MethodArgs {
    /// Method name (see `rdps simulate --help` for the list).
    #[arg(long, default_value = "lspm")]
    method: String,
    #[arg(long, default_value_t = defaults::TRIM_FRACTION)]
    trim: f64,
    #[arg(long, default_value_t = defaults::GRID_POINTS)]
    grid_points: usize,
}

impl MethodArgs {
    fn spec(&self) -> Result<MethodSpec> {
        let mut cfg = ExperimentConfig::new(SettingKind::Linear);
        cfg.trim_fraction = self.trim;
        cfg.grid_points = self.grid_points;
        MethodSpec::from_name(&self.method, &cfg.method_defaults()?)
    }
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum, default_value = "linear")]
    setting: SimSetting,
    #[arg(long, default_value_t = defaults::SEED)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    replication: usize,
    #[arg(long, default_value_t = defaults::N)]
    n: usize,
    /// Covariate (default: the replication's holdout covariate).
    #[arg(long)]
    x: Option<f64>,
    #[command(flatten)]
    method: MethodArgs,
    /// Number of y values in the output grid.
    #[arg(long, default_value_t = 401)]
    points: usize,
    #[arg(long, default_value = "bounds.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct DataArgs {
    /// CSV with a header row; the last column is the outcome, the others covariates.
    #[arg(long)]
    data: PathBuf,
    /// Test covariate, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    x: Vec<f64>,
    /// Seed for cross-validation folds and randomized fits.
    #[arg(long, default_value_t = defaults::SEED)]
    seed: u64,
}

#[derive(Args)]
struct IntervalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Central interval level.
    #[arg(long, default_value_t = 0.9)]
    level: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendChoice {
    Ols,
    Krr,
    Smoother,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindChoice {
    Plain,
    Studentised,
}

#[derive(Args)]
struct MonotonicityArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "ols")]
    backend: BackendChoice,
    #[arg(long, value_enum, default_value = "studentised")]
    kind: KindChoice,
    #[arg(long, default_value_t = 1.0)]
    bandwidth: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Grid spans min(y) - span*range .. max(y) + span*range.
    #[arg(long, default_value_t = 3.0)]
    span: f64,
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let parse = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => parse(format!("{other:?}")),
    })?;
    let width = rdr.headers().map_err(|e| parse(e.to_string()))?.len();
    if width < 2 {
        return Err(parse("need at least one covariate column and an outcome column".into()));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse(e.to_string()))?;
        let vals = rec
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse(format!("row {}: {e}", k + 1)))?;
        x.extend_from_slice(&vals[..width - 1]);
        y.push(vals[width - 1]);
    }
    Dataset::from_flat(width - 1, x, y)
}

fn report(result: &ExperimentResult, dir: &Path) -> Result<bool> {
    emit_all(dir, result)?;
    let rate = result.failure_rate();
    eprintln!(
        "{}: {} replications x {} methods, {} failed cells, written to {}",
        result.setting.name(),
        result.replications,
        result.methods.len(),
        result.failures.len(),
        dir.display()
    );
    Ok(rate <= FAILURE_LIMIT)
}

fn y_grid(ps: &PredictiveSystem, points: usize) -> Vec<f64> {
    let bps: Vec<f64> = ps
        .lower()
        .breakpoints()
        .iter()
        .chain(ps.upper().breakpoints())
        .copied()
        .filter(|b| b.is_finite())
        .collect();
    let lo = bps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = bps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (-1.0, 1.0) };
    let pad = 0.1 * (hi - lo).max(1.0);
    let (a, b) = (lo - pad, hi + pad);
    let k = points.max(2);
    (0..k).map(|j| a + (b - a) * j as f64 / (k - 1) as f64).collect()
}

fn run(cli: Cli) -> Result<ExitCode> {
    let threads = cli.threads;
    let ok = match cli.command {
        Command::Simulate { config, output_dir } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            let result = run_experiment(&cfg, threads)?;
            report(&result, &cfg.output_dir)?
        }
        Command::Reproduce(a) => {
            let settings: &[SettingKind] = match a.setting {
                SettingChoice::Linear => &[SettingKind::Linear],
                SettingChoice::Nonlinear => &[SettingKind::Nonlinear],
                SettingChoice::Both => &[SettingKind::Linear, SettingKind::Nonlinear],
            };
            let mut ok = true;
            for &s in settings {
                let mut cfg = ExperimentConfig::new(s);
                cfg.seed = a.seed;
                cfg.replications = a.replications;
                cfg.n = a.n;
                cfg.trim_fraction = a.trim;
                cfg.grid_points = a.grid_points;
                cfg.methods = a.methods.clone();
                cfg.output_dir = a.output_dir.join(s.name());
                let result = run_experiment(&cfg, threads)?;
                ok &= report(&result, &cfg.output_dir)?;
            }
            ok
        }
        Command::Bounds(a) => {
            let rep = Replication::draw(a.setting.into(), a.n, a.seed, a.replication)?;
            let x = a.x.map(|v| vec![v]);
            let ps = rep.system(&a.method.spec()?, x.as_deref())?;
            emit_bounds_csv(&ps, &y_grid(&ps, a.points), &a.output)?;
            eprintln!("thickness {}, written to {}", fmt_f64(ps.thickness()), a.output.display());
            true
        }
        Command::Interval(a) => {
            let data = read_dataset(&a.data.data)?;
            let m = a.method.spec()?;
            let spec = m.backend().map(|b| b.resolve(&data, &data, a.data.seed)).transpose()?;
            let ps = m.system(&data, spec.as_ref(), &a.data.x, a.data.seed)?;
            let iv = ps.central_interval(1.0 - a.level)?;
            println!("level,lo,hi,thickness");
            println!("{},{},{},{}", fmt_f64(a.level), fmt_f64(iv.lo), fmt_f64(iv.hi), fmt_f64(ps.thickness()));
            true
        }
        Command::CheckMonotonicity(a) => {
            let data = read_dataset(&a.data.data)?;
            let backend = match a.backend {
                BackendChoice::Ols => Backend::Ols,
                BackendChoice::Krr => Backend::Krr,
                BackendChoice::Smoother => Backend::Smoother { bandwidth: a.bandwidth },
            };
            let spec = backend.resolve(&data, &data, a.data.seed)?;
            let kind = match a.kind {
                KindChoice::Plain => ConformityKind::Plain,
                KindChoice::Studentised => ConformityKind::Studentised,
            };
            let ys = data.ys();
            let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let r = if hi > lo { hi - lo } else { 1.0 };
            let (g0, g1) = (lo - a.span * r, hi + a.span * r);
            let k = a.points.max(2);
            let grid: Vec<f64> = (0..k).map(|j| g0 + (g1 - g0) * j as f64 / (k - 1) as f64).collect();
            let rep = monotonicity_check(&data, &spec, kind, &a.data.x, &grid)?;
            println!("index,y_from,y_to,decrease");
            for v in &rep.violations {
                println!("{},{},{},{}", v.index, fmt_f64(v.y_from), fmt_f64(v.y_to), fmt_f64(v.decrease));
            }
            eprintln!(
                "{}",
                if rep.passed() {
                    "monotone on the grid".to_string()
                } else {
                    format!("{} violations", rep.violations.len())
                }
            );
            true
        }
    };
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
