//! `lfold` command-line front end.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use report::{Format, Provenance, Report};

#[derive(Parser, Debug)]
#[command(name = "lfold", version, about = "Eigenform coefficients, quadratic forms and l-fold summatory functions")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Config {
    /// Directory for cached coefficient tables
    #[arg(long, global = true, env = "LFOLD_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Grid step h of the delay-equation solver
    #[arg(long, global = true, default_value_t = 1e-4)]
    pub step: f64,
    /// Number of steps kept in the truncated kernel α
    #[arg(long = "K", global = true, default_value_t = 20)]
    pub truncation_k: usize,
    /// Worker threads, 0 for one per core
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

impl Config {
    fn validate(&self) -> Result<(), String> {
        if !(self.epsilon > 0.0) {
            return Err(format!("--epsilon {} must be positive", self.epsilon));
        }
        if !(self.step > 0.0 && self.step <= 1e-2) {
            return Err(format!("--step {} must lie in (0, 0.01]", self.step));
        }
        if self.truncation_k == 0 {
            return Err("--K must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build, verify or export eigenform coefficient tables
    #[command(subcommand)]
    Eigenform(commands::EigenformCmd),
    /// Binary quadratic forms
    #[command(subcommand)]
    Qform(commands::QformCmd),
    /// Fold constants (A, B)
    Constants(commands::ConstantsArgs),
    /// Chebyshev decomposition of x^l
    Cheb(commands::ChebArgs),
    /// Summatory function over values of a form or a class set
    Sum(commands::SumArgs),
    /// First negative coefficient in a target set
    Signchange(commands::SignChangeArgs),
    /// Evaluate the upper or lower bound in log space
    Bounds(commands::BoundsArgs),
    /// h_Y-weighted sum against its predicted main term
    Lowerbound(commands::LowerBoundArgs),
    /// Solve the delay equation for sigma(u)
    Sigma(commands::SigmaArgs),
}

impl Command {
    fn name(&self) -> String {
        match self {
            Self::Eigenform(c) => format!("eigenform {}", c.name()),
            Self::Qform(c) => format!("qform {}", c.name()),
            Self::Constants(_) => "constants".into(),
            Self::Cheb(_) => "cheb".into(),
            Self::Sum(_) => "sum".into(),
            Self::Signchange(_) => "signchange".into(),
            Self::Bounds(_) => "bounds".into(),
            Self::Lowerbound(_) => "lowerbound".into(),
            Self::Sigma(_) => "sigma".into(),
        }
    }
}

/// Failure classes mapped onto exit codes 1 and 2.
#[derive(Debug)]
pub enum CliError {
    Verification(String),
    Input(String),
}

impl From<lfold::Error> for CliError {
    fn from(e: lfold::Error) -> Self {
        match e {
            lfold::Error::Integrity(_) | lfold::Error::Internal(_) => Self::Verification(e.to_string()),
            lfold::Error::Range { index, max } => Self::Input(format!(
                "{e}; build a table to at least {index} with --upto or pass a longer coefficient file (current {max})"
            )),
            other => Self::Input(other.to_string()),
        }
    }
}

pub struct Outcome {
    pub inputs: serde_json::Value,
    pub result: serde_json::Value,
    pub passed: bool,
    pub seed: Option<u64>,
}

fn run(cmd: &Command, cfg: &Config) -> Result<Outcome, CliError> {
    match cmd {
        Command::Eigenform(c) => commands::eigenform(c, cfg),
        Command::Qform(c) => commands::qform(c),
        Command::Constants(a) => commands::constants(a),
        Command::Cheb(a) => commands::cheb(a),
        Command::Sum(a) => commands::sum(a, cfg),
        Command::Signchange(a) => commands::signchange(a, cfg),
        Command::Bounds(a) => commands::bounds(a, cfg),
        Command::Lowerbound(a) => commands::lowerbound(a, cfg),
        Command::Sigma(a) => commands::sigma(a, cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(msg) = cli.config.validate() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    if cli.config.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.config.threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let outcome = match run(&cli.command, &cli.config) {
        Ok(o) => o,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            return ExitCode::from(1);
        }
    };
    let report = Report {
        command: cli.command.name(),
        inputs: outcome.inputs,
        status: if outcome.passed { "pass" } else { "fail" },
        result: outcome.result,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION"),
            engine_version: lfold::ENGINE_VERSION,
            seed: outcome.seed,
            truncation_k: cli.config.truncation_k,
            grid_step: cli.config.step,
            threads: rayon::current_num_threads(),
        },
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    print!("{}", report::render(&report, cli.config.format));
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
