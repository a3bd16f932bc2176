//! `bellsim` — CHSH analytics, event-level simulation, and statistical
//! audits for hidden-variable sources that may depend on the chosen
//! measurement settings.

mod commands;
mod config;

use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{parse_config, RunConfig};

#[derive(Parser)]
#[command(
    name = "bellsim",
    version,
    about = "CHSH analytics, seeded event simulation, and no-signaling audits \
             for setting-dependent hidden-variable sources"
)]
struct Cli {
    /// Interpret all input angles (θ bounds, config angles, ξ) as degrees
    #[arg(long, global = true)]
    degrees: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form β columns over the θ family a=2θ, a′=0, b=θ, b′=3θ
    AnalyticSweep {
        /// Lower θ bound, inclusive
        #[arg(long)]
        theta_min: f64,
        /// Upper θ bound, inclusive
        #[arg(long)]
        theta_max: f64,
        /// Grid points including both endpoints (at least 2)
        #[arg(long)]
        steps: usize,
        /// Comma-separated Γ values in [0, 1]
        #[arg(long, value_delimiter = ',', required = true)]
        gammas: Vec<f64>,
    },
    /// Run one seeded simulation from a JSON config and report estimates
    Simulate {
        /// Path to the JSON config, or `-` to read it from standard input
        #[arg(long)]
        config: PathBuf,
    },
    /// Reference curves over θ ∈ [π, 2π]: analytic and simulated β for
    /// Γ ∈ {1.0, 0.8, 0.5} plus the uniform-source baseline
    ReproduceFig1 {
        /// Events per (θ, Γ) grid point
        #[arg(long)]
        events: u64,
        /// Base seed; each grid point simulates on its own stream
        #[arg(long)]
        seed: u64,
        /// θ grid points over [π, 2π]
        #[arg(long, default_value_t = 41)]
        steps: usize,
    },
    /// Simulate a config, then run the no-signaling and factorability audits
    NoSignalingAudit {
        /// Path to the JSON config, or `-` to read it from standard input
        #[arg(long)]
        config: PathBuf,
    },
}

/// Failure routed to the exit-code contract: configuration problems exit 1,
/// data and audit failures exit 2.
#[derive(Debug)]
pub(crate) enum Failure {
    Config(String),
    Data(String),
}

impl Failure {
    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Data(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

impl From<bellsim_core::Error> for Failure {
    fn from(e: bellsim_core::Error) -> Self {
        match e {
            bellsim_core::Error::InsufficientData { .. } => Failure::Data(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(format!("cannot write output: {e}"))
    }
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var("BELLSIM_SEED") {
        Ok(value) => value.trim().parse::<u64>().map(Some).map_err(|_| {
            Failure::Config(format!(
                "BELLSIM_SEED must be an unsigned 64-bit integer, got `{value}`"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(Failure::Config("BELLSIM_SEED must be valid unicode".into()))
        }
    }
}

fn load_config(path: &Path, degrees: bool) -> Result<RunConfig, Failure> {
    let text = if path == Path::new("-") {
        let mut buf = String::new();
        io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::Config(format!("cannot read config from standard input: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(path).map_err(|e| {
            Failure::Config(format!("cannot read config file `{}`: {e}", path.display()))
        })?
    };
    parse_config(&text, degrees, env_seed()?).map_err(Failure::Config)
}

fn dispatch(out: &mut impl Write, cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::AnalyticSweep { theta_min, theta_max, steps, gammas } => {
            let (min, max) = if cli.degrees {
                (theta_min.to_radians(), theta_max.to_radians())
            } else {
                (theta_min, theta_max)
            };
            commands::cmd_analytic_sweep(out, min, max, steps, &gammas)
        }
        Command::Simulate { config } => {
            let cfg = load_config(&config, cli.degrees)?;
            commands::cmd_simulate(out, &cfg)
        }
        Command::ReproduceFig1 { events, seed, steps } => {
            let (seed, seed_from_env) = match env_seed()? {
                Some(s) => (s, true),
                None => (seed, false),
            };
            commands::cmd_reproduce_fig1(out, events, seed, steps, seed_from_env)
        }
        Command::NoSignalingAudit { config } => {
            let cfg = load_config(&config, cli.degrees)?;
            commands::cmd_no_signaling_audit(out, &cfg)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = dispatch(&mut out, cli);
    let flushed = out.flush().map_err(Failure::from);
    result.and(flushed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version go to stdout and exit 0; bad usage exits 1
            let code: u8 = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
