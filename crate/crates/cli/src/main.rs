//! `ruinld`: rates, optimal paths, exact probabilities, simulations and
//! oracle checks for OU and GBM ruin problems against exponential curves.

mod commands;
mod figures;
mod output;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{Problem, SimOutput};
use output::Artifact;
use params::Params;

const LONG_ABOUT: &str = "\
Rates, optimal paths, exact probabilities, simulations and oracle checks for
OU and GBM ruin problems against exponential curves.

Rates are reported together with the approximation p ≈ exp(−I/ε). The noise
scale of the model is σ√ε; with the default ε = 1 the flag values of σ (and b)
are used as given.

Parameters may also come from --config FILE: `key = value` lines mirroring the
flag names, or a JSON document written by this tool (its `params` member is
used). Flags override the file.

Exit status: 0 success, 2 invalid input, 3 numerical failure.
RUINLD_THREADS caps the number of worker threads.";

#[derive(Debug, Parser)]
#[command(name = "ruinld", version, about = "Large-deviation ruin computations", long_about = LONG_ABOUT)]
struct Cli {
    /// key=value or JSON parameter file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format (default: json, or csv for paths and figures)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Large-deviation rate, optimal horizon, coefficients and residuals
    Rate {
        #[arg(value_enum)]
        problem: Problem,
        #[command(flatten)]
        params: Params,
    },
    /// Optimal hitting (or meeting) time
    HitTime {
        #[arg(value_enum)]
        problem: Problem,
        #[command(flatten)]
        params: Params,
    },
    /// Optimal path as `t,value` (two-path problems: `t,x,y`)
    Path {
        #[arg(value_enum)]
        problem: Problem,
        #[command(flatten)]
        params: Params,
    },
    /// Crossing classification of the fixed-time path ending on the lower curve at --t
    Classify {
        #[command(flatten)]
        params: Params,
    },
    /// Monte Carlo hitting probability, or one simulated path
    Simulate {
        #[arg(value_enum)]
        problem: Problem,
        #[command(flatten)]
        params: Params,
        /// Emit the first simulated path instead of an estimate
        #[arg(long, conflicts_with = "extreme")]
        path: bool,
        /// Emit the first simulated path that hits
        #[arg(long)]
        extreme: bool,
    },
    /// Exact hitting probability where a closed form exists
    Exact {
        #[arg(value_enum)]
        problem: Problem,
        #[command(flatten)]
        params: Params,
    },
    /// Compare the closed form with the discretised-action minimum
    OracleCheck {
        #[arg(value_enum)]
        problem: Problem,
        #[command(flatten)]
        params: Params,
    },
    /// Data behind a reference figure (fig1..fig17 or an alias; `list` shows all)
    Figure { name: String },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(ruinld_core::Error),
    Io(String),
}

impl From<ruinld_core::Error> for CliError {
    fn from(e: ruinld_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn set_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RUINLD_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RUINLD_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(e.to_string()))
}

fn table_artifact(table: output::Table, params: &Params, format: Option<Format>) -> Artifact {
    match format {
        Some(Format::Json) => Artifact::Json(table.to_json(params.echo())),
        _ => Artifact::Csv(table),
    }
}

fn json_only(artifact: Artifact, format: Option<Format>) -> Result<Artifact, CliError> {
    match (format, &artifact) {
        (Some(Format::Csv), Artifact::Json(_)) => Err(CliError::Usage("this command only writes JSON".into())),
        _ => Ok(artifact),
    }
}

fn run(cli: Cli) -> Result<Artifact, CliError> {
    set_threads()?;
    let format = cli.format;
    let mut command = cli.command;
    let params = match &mut command {
        Command::Rate { params, .. }
        | Command::HitTime { params, .. }
        | Command::Path { params, .. }
        | Command::Classify { params }
        | Command::Simulate { params, .. }
        | Command::Exact { params, .. }
        | Command::OracleCheck { params, .. } => Some(params),
        Command::Figure { .. } => None,
    };
    if let (Some(p), Some(path)) = (params, &cli.config) {
        p.merge(&params::load_config(path)?)?;
    }
    match command {
        Command::Rate { problem, mut params } => json_only(commands::rate(problem, &mut params)?, format),
        Command::HitTime { problem, mut params } => json_only(commands::hit_time(problem, &mut params)?, format),
        Command::Path { problem, mut params } => {
            let table = commands::path(problem, &mut params)?;
            Ok(table_artifact(table, &params, format))
        }
        Command::Classify { mut params } => json_only(commands::classify(&mut params)?, format),
        Command::Simulate { problem, mut params, path, extreme } => {
            let mode = match (path, extreme) {
                (true, _) => SimOutput::SamplePath,
                (_, true) => SimOutput::Extreme,
                _ => SimOutput::Estimate,
            };
            match commands::simulate(problem, &mut params, mode)? {
                Artifact::Csv(table) => Ok(table_artifact(table, &params, format)),
                json => json_only(json, format),
            }
        }
        Command::Exact { problem, mut params } => json_only(commands::exact(problem, &mut params)?, format),
        Command::OracleCheck { problem, mut params } => json_only(commands::oracle_check(problem, &mut params)?, format),
        Command::Figure { name } => {
            let table = if name == "list" {
                figures::listing()
            } else {
                let fig = figures::lookup(&name).ok_or_else(|| {
                    CliError::Usage(format!("unknown figure `{name}`; `ruinld figure list` shows the names"))
                })?;
                fig()?
            };
            Ok(table_artifact(table, &Params::default(), format))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let out = cli.out.clone();
    let result = run(cli).and_then(|artifact| output::emit(&artifact, out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
