//! Command-line front end: config resolution, worker pools, staged outputs
//! and run manifests around the `hybridspin` library.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;

use config::{FitModel, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<hybridspin::Error> for CliError {
    fn from(e: hybridspin::Error) -> Self {
        match e {
            hybridspin::Error::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hybridspin", version, about = "Donor spin levels, resonances, spin-bath echo decay and fits")]
pub struct Cli {
    /// TOML config; omitted keys take their defaults (see print-config).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energies and concurrences of all levels over a field grid.
    Levels,
    /// Resonances at a fixed excitation frequency and the synthesized spectrum.
    Resonances {
        /// MHz.
        #[arg(long)]
        frequency: Option<f64>,
        #[arg(long)]
        floor: Option<f64>,
    },
    /// Frequency and intensity of every allowed transition over a field grid.
    Freqmap,
    /// Rabi frequencies and π times of the resonances at a frequency.
    Rabi {
        /// MHz.
        #[arg(long)]
        frequency: Option<f64>,
        /// Drive amplitude, MHz.
        #[arg(long)]
        drive: Option<f64>,
    },
    /// Ensemble-averaged Hahn-echo decay in a ²⁹Si bath.
    Cce {
        #[arg(long)]
        n_configs: Option<usize>,
        /// Cube edge, nm.
        #[arg(long)]
        side: Option<f64>,
    },
    /// Echo curves over cube sizes and pair cut-offs.
    CceConverge,
    /// Fit a model to a headed CSV file.
    Fit {
        #[arg(long, value_enum)]
        model: Option<FitModel>,
        #[arg(long, value_name = "CSV")]
        input: Option<PathBuf>,
        /// Hold Δ/k_B at this value (K) in the T₁ model.
        #[arg(long, value_name = "K")]
        fix_delta: Option<f64>,
        #[arg(long)]
        n_lines: Option<usize>,
    },
    /// Print the fully resolved config as TOML.
    PrintConfig,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Levels => "levels",
            Command::Resonances { .. } => "resonances",
            Command::Freqmap => "freqmap",
            Command::Rabi { .. } => "rabi",
            Command::Cce { .. } => "cce",
            Command::CceConverge => "cce-converge",
            Command::Fit { .. } => "fit",
            Command::PrintConfig => "print-config",
        }
    }
}

/// Config file plus command-line overrides.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => config::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.to_string_lossy().into_owned();
    }
    match &cli.command {
        Command::Resonances { frequency, floor } => {
            if let Some(f) = frequency {
                cfg.resonances.frequency = *f;
            }
            if let Some(f) = floor {
                cfg.resonances.intensity_floor = *f;
            }
        }
        Command::Rabi { frequency, drive } => {
            if let Some(f) = frequency {
                cfg.rabi.frequency = *f;
            }
            if let Some(d) = drive {
                cfg.rabi.drive = *d;
            }
        }
        Command::Cce { n_configs, side } => {
            if let Some(n) = n_configs {
                cfg.cce.n_configs = *n;
            }
            if let Some(s) = side {
                cfg.cce.side = *s;
            }
        }
        Command::Fit { model, input, fix_delta, n_lines } => {
            if model.is_some() {
                cfg.fit.model = *model;
            }
            if let Some(i) = input {
                cfg.fit.input = Some(i.to_string_lossy().into_owned());
            }
            if fix_delta.is_some() {
                cfg.fit.fix_delta = *fix_delta;
            }
            if let Some(n) = n_lines {
                cfg.fit.n_lines = *n;
            }
        }
        _ => {}
    }
    Ok(cfg)
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<i32, CliError> {
    let start = Instant::now();
    let staged = match cli.command {
        Command::Levels => commands::levels(cfg)?,
        Command::Resonances { .. } => commands::resonances(cfg)?,
        Command::Freqmap => commands::freqmap(cfg)?,
        Command::Rabi { .. } => commands::rabi(cfg)?,
        Command::Cce { .. } => commands::cce(cfg)?,
        Command::CceConverge => commands::cce_converge(cfg)?,
        Command::Fit { .. } => commands::fit(cfg)?,
        Command::PrintConfig => {
            print!("{}", config::render(cfg));
            return Ok(EXIT_OK);
        }
    };
    let failure = staged.failure.clone();
    let dir = PathBuf::from(&cfg.out);
    let outputs = output::commit(&dir, cli.command.name(), cfg, cli.workers, staged, start.elapsed().as_secs_f64())?;
    for name in outputs.keys() {
        println!("{}", dir.join(name).display());
    }
    match failure {
        Some(m) => {
            eprintln!("numerical failure: {m}");
            Ok(EXIT_NUMERICAL)
        }
        None => Ok(EXIT_OK),
    }
}

/// Runs the tool on an argument list and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = resolve(&cli).and_then(|cfg| match cli.workers {
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?
            .install(|| execute(&cli, &cfg)),
        None => execute(&cli, &cfg),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
