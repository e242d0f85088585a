//! `lsprec`: precision-matrix estimation, structure tests and Monte Carlo
//! experiments for locally stationary time series.

mod config;
mod series;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lsprec::experiment::{run_experiment, rerun_row, ExperimentConfig, Manifest, Row};
use lsprec::lrcov::pilot_bandwidth;
use lsprec::precision::estimate_precision;
use lsprec::procsim::{simulate, TimeSeriesSample};
use lsprec::sievebasis::BasisSet;
use lsprec::structtest::{run_test, TestKind, TestSpec};
use lsprec::tuning::{band_cap, two_step, TuningGrids};
use lsprec::Error;

use config::{SeriesConfig, TestChoice};

#[derive(Debug, Parser)]
#[command(name = "lsprec", version, about = "Precision matrices of locally stationary time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for replications and null draws.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the precision matrix of one series and write it as CSV.
    Estimate,
    /// Test a series for white noise or bandedness; writes one JSON line.
    Test,
    /// Choose (b, c, h) by the two-step procedure; writes one JSON line.
    Tune,
    /// Run a Monte Carlo experiment; writes CSV rows and a JSON manifest.
    Experiment {
        /// Re-run one row from a manifest instead of a configuration.
        #[arg(long, requires = "row")]
        manifest: Option<PathBuf>,
        /// Index of the row to re-run (0-based, header excluded).
        #[arg(long, requires = "manifest")]
        row: Option<usize>,
    },
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn required_config(cli: &Cli) -> Outcome<String> {
    match &cli.config {
        Some(p) => read_text(p),
        None => Err(config_err("--config is required")),
    }
}

fn write_output(out: Option<&Path>, content: &str) -> Outcome<()> {
    match out {
        Some(p) => fs::write(p, content).map_err(|e| config_err(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(content.as_bytes()).map_err(config_err),
    }
}

fn load_series(cfg: &SeriesConfig, base: Option<&Path>, seed: u64) -> Outcome<TimeSeriesSample<f64>> {
    if let Some(input) = &cfg.input {
        let mut path = PathBuf::from(input);
        if path.is_relative() {
            if let Some(dir) = base.and_then(Path::parent) {
                path = dir.join(path);
            }
        }
        return Ok(TimeSeriesSample::from_values(series::read_column(&path).map_err(config_err)?));
    }
    let model = cfg.model.expect("validated source");
    Ok(simulate(&model, cfg.n.expect("validated source"), seed)?)
}

fn series_config(cli: &Cli) -> Outcome<(SeriesConfig, TimeSeriesSample<f64>)> {
    let mut cfg = SeriesConfig::from_toml(&required_config(cli)?).map_err(config_err)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let sample = load_series(&cfg, cli.config.as_deref(), cfg.seed)?;
    Ok((cfg, sample))
}

fn estimate(cli: &Cli) -> Outcome<()> {
    let (cfg, sample) = series_config(cli)?;
    let (b, c) = cfg.band_and_size().map_err(config_err)?;
    let pf = estimate_precision(&sample, b, &BasisSet::new(cfg.basis, c)?)?;
    let mut buf = Vec::new();
    pf.estimate.write_csv(&mut buf)?;
    write_output(cli.out.as_deref(), &String::from_utf8(buf).expect("utf-8 csv"))
}

fn test(cli: &Cli) -> Outcome<()> {
    let (cfg, sample) = series_config(cli)?;
    let (b, c) = cfg.band_and_size().map_err(config_err)?;
    let kind = match (cfg.test, cfg.k0) {
        (Some(TestChoice::WhiteNoise), _) => TestKind::WhiteNoise,
        (Some(TestChoice::Banded), Some(k0)) => TestKind::Banded(k0),
        (Some(TestChoice::Banded), None) => return Err(config_err("k0: required for a banded test")),
        (None, _) => return Err(config_err("test: required (white_noise or banded)")),
    };
    let spec = TestSpec {
        kind,
        level: cfg.level,
        b,
        basis: BasisSet::new(cfg.basis, c)?,
        h: cfg.h.unwrap_or_else(|| pilot_bandwidth(sample.n())),
        draws: cfg.draws,
        seed: cfg.seed,
    };
    let result = run_test(&sample, &spec)?;
    let line = serde_json::to_string(&result).expect("test result serializes");
    write_output(cli.out.as_deref(), &format!("{line}\n"))
}

fn tune(cli: &Cli) -> Outcome<()> {
    let (cfg, sample) = series_config(cli)?;
    let t = cfg.tuning.clone().unwrap_or_default();
    let grids = TuningGrids {
        b0: t.b0.unwrap_or(8).min(band_cap(sample.n())),
        grid_c: t.grid_c,
        grid_h: t.grid_h,
        level: cfg.level,
        draws: cfg.draws,
        seed: cfg.seed,
    };
    let report = two_step(&sample, &grids, &BasisSet::new(cfg.basis, 1)?)?;
    let line = serde_json::to_string(&report).expect("tuning report serializes");
    write_output(cli.out.as_deref(), &format!("{line}\n"))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn experiment(cli: &Cli, manifest: Option<&Path>, row: Option<usize>) -> Outcome<()> {
    if let (Some(path), Some(index)) = (manifest, row) {
        let m = Manifest::from_json(&read_text(path)?)?;
        let r = rerun_row(&m, index)?;
        return write_output(cli.out.as_deref(), &format!("{}\n{}\n", Row::header(m.config.experiment), r.to_csv()));
    }
    let mut cfg = ExperimentConfig::from_toml(&required_config(cli)?)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let output = run_experiment(&cfg)?;
    let csv = output.to_csv(cfg.experiment);
    let manifest = Manifest::new(&cfg, &output)?.to_json();
    let out = cli.out.clone().or_else(|| cfg.output_path.as_ref().map(PathBuf::from));
    match out {
        Some(p) => {
            write_output(Some(&p), &csv)?;
            write_output(Some(&manifest_path(&p)), &format!("{manifest}\n"))
        }
        None => {
            write_output(None, &csv)?;
            eprintln!("{manifest}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Outcome<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(config_err)?;
    }
    match &cli.command {
        Command::Estimate => estimate(cli),
        Command::Test => test(cli),
        Command::Tune => tune(cli),
        Command::Experiment { manifest, row } => experiment(cli, manifest.as_deref(), *row),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("lsprec: {f}");
            ExitCode::from(f.code())
        }
    }
}
