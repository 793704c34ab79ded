//! `tdot`: transmission spectra of a periodically driven side-coupled dot.

mod commands;
mod config;
mod format;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;
use crate::config::{ConfigError, Format, RunConfig};

#[derive(Parser)]
#[command(name = "tdot", version, about = "Driven side-coupled dot transmission")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transmission spectrum with the configured method.
    Spectrum(Common),
    /// Roots of the resonance condition, with widths and classification.
    Resonances(Common),
    /// Deviation report of the approximate methods against Floquet.
    Compare(Common),
    /// Wavepacket transmission next to the Floquet value.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file (or a previous result file).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output file; standard output when absent.
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Run the unitarity suite first; exit 4 if it fails.
    #[arg(long)]
    self_check: bool,
    #[command(flatten)]
    overrides: Overrides,
}

/// Per-key overrides, taking precedence over the file.
#[derive(Args)]
struct Overrides {
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    /// Dot level(s), comma separated.
    #[arg(long = "eps_d", alias = "eps-d", allow_hyphen_values = true)]
    eps_d: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    /// static | floquet | gpp | oracle
    #[arg(long)]
    method: Option<String>,
    #[arg(long = "k_min", alias = "k-min", allow_hyphen_values = true)]
    k_min: Option<String>,
    #[arg(long = "k_max", alias = "k-max", allow_hyphen_values = true)]
    k_max: Option<String>,
    #[arg(long = "k_points", alias = "k-points")]
    k_points: Option<String>,
    #[arg(long = "n_modes", alias = "n-modes")]
    n_modes: Option<String>,
    #[arg(long = "nu_max", alias = "nu-max")]
    nu_max: Option<String>,
    #[arg(long = "oracle_length", alias = "oracle-length")]
    oracle_length: Option<String>,
    #[arg(long = "oracle_sigma", alias = "oracle-sigma")]
    oracle_sigma: Option<String>,
    #[arg(long = "oracle_dt", alias = "oracle-dt")]
    oracle_dt: Option<String>,
    #[arg(long = "oracle_points", alias = "oracle-points")]
    oracle_points: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> [(&'static str, &Option<String>); 16] {
        [
            ("h", &self.h),
            ("eps_d", &self.eps_d),
            ("g0", &self.g0),
            ("g1", &self.g1),
            ("omega", &self.omega),
            ("eta", &self.eta),
            ("method", &self.method),
            ("k_min", &self.k_min),
            ("k_max", &self.k_max),
            ("k_points", &self.k_points),
            ("n_modes", &self.n_modes),
            ("nu_max", &self.nu_max),
            ("oracle_length", &self.oracle_length),
            ("oracle_sigma", &self.oracle_sigma),
            ("oracle_dt", &self.oracle_dt),
            ("oracle_points", &self.oracle_points),
        ]
    }
}

fn resolve(common: &Common) -> Result<(RunConfig, Format), ConfigError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for (key, value) in common.overrides.pairs() {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    let format = common.format.parse().map_err(|m| ConfigError {
        field: "format".into(),
        message: m,
    })?;
    Ok((cfg, format))
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("TDOT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| ConfigError {
        field: "TDOT_THREADS".into(),
        message: format!("must be a positive integer, got '{raw}'"),
    })?;
    // only fails if a pool already exists, which cannot happen this early
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let (name, common) = match &cli.command {
        Command::Spectrum(c) => ("spectrum", c),
        Command::Resonances(c) => ("resonances", c),
        Command::Compare(c) => ("compare", c),
        Command::Oracle(c) => ("oracle", c),
    };
    let (cfg, format) = resolve(common)?;
    if common.self_check {
        commands::self_check(&cfg)?;
    }
    let report = match name {
        "spectrum" => commands::run_spectrum(&cfg)?,
        "resonances" => commands::run_resonances(&cfg)?,
        "compare" => commands::run_compare(&cfg)?,
        _ => commands::run_oracle(&cfg)?,
    };
    let text = match format {
        Format::Csv => report.to_csv(&cfg),
        Format::Json => report.to_json(&cfg),
    };
    match &common.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tdot: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
