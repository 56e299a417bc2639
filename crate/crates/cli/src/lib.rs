//! Batch experiment runner. Each subcommand runs one experiment and emits a
//! self-describing JSON report: the full configuration, result rows with
//! their bound checks, and an overall verdict.

mod commands;
pub mod grid;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use report::{Check, Report, Row};

/// Exit status for a failed bound check.
pub const EXIT_BOUND_VIOLATION: u8 = 4;
/// Exit status for an experiment exceeding a size limit.
pub const EXIT_SIZE_LIMIT: u8 = 3;
/// Exit status for usage and input errors.
pub const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug, Clone, Serialize)]
#[command(name = "nlqc", version, about = "Port-based teleportation and position-verification experiments")]
pub struct Cli {
    /// Report path; written atomically. Prints to stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). NLQC_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest dense matrix dimension an experiment may build.
    #[arg(long = "max-dim", global = true, default_value_t = nlqc_core::linalg::DEFAULT_MAX_DIM)]
    pub max_dim: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Port-based teleportation with the pretty good measurement.
    Pbt(PbtArgs),
    /// Pretty good measurement property suite.
    Pgm(PgmArgs),
    /// Instantaneous non-local measurement or unitary.
    Inst(InstArgs),
    /// Mutually unbiased bases.
    Mub(MubArgs),
    /// Guessing-game attacks against the entanglement bound.
    Bound(BoundArgs),
    /// Position verification runs and soundness calculators.
    Posverify(PosverifyArgs),
    /// Entanglement cost of the instantaneous protocols.
    Cost(CostArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Pbt(_) => "pbt",
            Command::Pgm(_) => "pgm",
            Command::Inst(_) => "inst",
            Command::Mub(_) => "mub",
            Command::Bound(_) => "bound",
            Command::Posverify(_) => "posverify",
            Command::Cost(_) => "cost",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PbtArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub ports: Option<usize>,
    /// Cells such as `d=2:N=1..10` or `d=3,4:N=1..4`; repeatable.
    #[arg(long)]
    pub grid: Vec<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PgmArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub ports: Option<usize>,
    #[arg(long)]
    pub grid: Vec<String>,
    /// Random PSD pairs for the operator inequality.
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    /// Random ensembles for the PGM success bound.
    #[arg(long, default_value_t = 100)]
    pub ensembles: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InstMode {
    Measure,
    Unitary,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderArg {
    Protocol,
    AliceFirst,
    BobFirst,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct InstArgs {
    #[arg(long, value_enum, default_value_t = InstMode::Measure)]
    pub mode: InstMode,
    /// Qubits per party.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long = "N", default_value_t = 2)]
    #[serde(rename = "N")]
    pub ports: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// `bell`, `comp`, `cnot`, `swap`, `identity` or `file:PATH`.
    #[arg(long)]
    pub target: Option<String>,
    /// `haar` or `basis:K`.
    #[arg(long, default_value = "haar")]
    pub state: String,
    #[arg(long, value_enum, default_value_t = OrderArg::Protocol)]
    pub order: OrderArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MubArgs {
    #[arg(long)]
    pub d: usize,
    /// Assert unbiasedness, unitarity and identification.
    #[arg(long)]
    pub check: bool,
    /// Include the bases in the report.
    #[arg(long)]
    pub export: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoundArgs {
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    /// Dimension of Bob's share of the entangled state.
    #[arg(long, default_value_t = 1)]
    pub dimb: usize,
    /// Dimension of Alice's share; defaults to `--dimb`.
    #[arg(long)]
    pub dima: Option<usize>,
    /// Bases in the ensemble; defaults to `d + 1`.
    #[arg(long)]
    pub bases: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 50)]
    pub sweeps: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PosMode {
    Honest,
    Attack,
    Bounds,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PosverifyArgs {
    #[arg(long, value_enum, default_value_t = PosMode::Honest)]
    pub mode: PosMode,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long = "N", default_value_t = 2)]
    #[serde(rename = "N")]
    pub ports: usize,
    /// Ebits shared by the adversaries.
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    /// Ebits per adversary for the composition plan; defaults to `--m`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Target soundness for the composition plan.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// `r_V0,r_0,r_V1`.
    #[arg(long, default_value = "-10,0,10")]
    pub positions: String,
    /// Include one transcript's event list in the report.
    #[arg(long)]
    pub transcript: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CostArgs {
    /// Qubits per party.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(nlqc_core::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<nlqc_core::Error> for CliError {
    fn from(e: nlqc_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use nlqc_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::SizeLimit { .. }) => EXIT_SIZE_LIMIT,
            CliError::Core(E::Domain(_) | E::Shape(_) | E::Validation(_)) => EXIT_USAGE,
            CliError::Core(E::Numerical(_)) | CliError::Io(_) => 1,
        }
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Runs the configured experiment and assembles its report.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let start = Instant::now();
    let config = serde_json::to_value(cli).expect("config is serializable");
    let mut report = Report::new(cli.command.name(), cli.seed, config);
    commands::dispatch(cli, &mut report)?;
    report.finish(start.elapsed().as_secs_f64());
    Ok(report)
}

/// Writes `text` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn thread_count(cli: &Cli) -> Result<Option<usize>, CliError> {
    match std::env::var("NLQC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!("NLQC_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => match cli.threads {
            Some(0) => Err(usage("--threads must be positive")),
            t => Ok(t),
        },
    }
}

/// Full command-line behavior after argument parsing.
pub fn run(cli: Cli) -> ExitCode {
    let outcome = (|| -> Result<Report, CliError> {
        if let Some(n) = thread_count(&cli)? {
            // a second initialization in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        let report = execute(&cli)?;
        let text = report.to_json();
        match &cli.out {
            Some(path) => write_atomic(path, &text)?,
            None => println!("{text}"),
        }
        Ok(report)
    })();
    match outcome {
        Ok(report) => {
            eprintln!("{}: {}", report.subcommand, if report.pass { "pass" } else { "FAIL" });
            ExitCode::from(if report.pass { 0 } else { EXIT_BOUND_VIOLATION })
        }
        Err(e) => {
            eprintln!("nlqc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
