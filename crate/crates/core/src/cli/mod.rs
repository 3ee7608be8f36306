//! `riskplan` command line: plan, compare, simulate, bench and table.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::workspace::Cell;

pub use commands::{run_command, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_UNREACHABLE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Overrides both the enumeration and the lifted-state budgets.
pub const BUDGET_ENV: &str = "RISKPLAN_BUDGET";

#[derive(Debug, Parser)]
#[command(
    name = "riskplan",
    version,
    about = "Minimum-risk path planning with history-dependent failure risk"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a minimum-risk path and write its per-state risk table.
    Plan(PlanArgs),
    /// Run the additive baseline and the risk-aware planner on one instance.
    Compare(CompareArgs),
    /// Simulate failures along a planned, supplied or tabulated path.
    Simulate(SimulateArgs),
    /// Sweep look-back depth over random maps.
    Bench(BenchArgs),
    /// Print a per-state risk table and its path risk.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl OutputFormat {
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// ASCII or JSON map file.
    #[arg(long)]
    pub map: PathBuf,
    /// Risk element configuration (JSON). Defaults to the built-in demo profile.
    #[arg(long)]
    pub risk_config: Option<PathBuf>,
    /// Start cell as ROW,COL.
    #[arg(long, value_parser = parse_cell)]
    pub start: Cell,
    /// Goal cell as ROW,COL.
    #[arg(long, value_parser = parse_cell)]
    pub goal: Option<Cell>,
    #[arg(long, default_value_t = 4)]
    pub connectivity: u32,
    /// Look-back depth; 2 runs the directional-component planner.
    #[arg(long, default_value_t = 2)]
    pub depth: u32,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = "riskplan-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Look-back depths for the sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub sweep: Vec<u32>,
    /// Also enumerate every simple path for the exact minimum (small maps only).
    #[arg(long)]
    pub exhaustive: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Map file; the path is planned from --start to --goal unless --path is given.
    #[arg(long, conflicts_with = "table")]
    pub map: Option<PathBuf>,
    #[arg(long)]
    pub risk_config: Option<PathBuf>,
    #[arg(long, value_parser = parse_cell)]
    pub start: Option<Cell>,
    #[arg(long, value_parser = parse_cell)]
    pub goal: Option<Cell>,
    #[arg(long, default_value_t = 4)]
    pub connectivity: u32,
    #[arg(long, default_value_t = 2)]
    pub depth: u32,
    /// Explicit path as ROW,COL;ROW,COL;...
    #[arg(long, value_parser = parse_cells)]
    pub path: Option<CellList>,
    /// Per-state risk table (CSV); its State column gives the hazards.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Side length of the generated square maps.
    #[arg(long, default_value_t = 8)]
    pub size: usize,
    /// Connectivities to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4,8")]
    pub connectivity: Vec<u32>,
    /// Depths to sweep, comma separated.
    #[arg(long = "depth", value_delimiter = ',', default_value = "1,2,3,4")]
    pub depths: Vec<u32>,
    #[arg(long, default_value_t = 3)]
    pub maps: u64,
    #[arg(long, default_value_t = 0.15)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub risk_config: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// Table CSV with columns Index, element columns, and optionally State.
    #[arg(conflicts_with = "demo", required_unless_present = "demo")]
    pub file: Option<PathBuf>,
    /// Print one of the built-in staircase demo tables instead.
    #[arg(long, value_enum)]
    pub demo: Option<DemoTable>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoTable {
    Red,
    Green,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellList(pub Vec<Cell>);

fn parse_cell(s: &str) -> std::result::Result<Cell, String> {
    let (r, c) = s
        .split_once(',')
        .ok_or_else(|| format!("expected ROW,COL, got `{s}`"))?;
    let row = r.trim().parse().map_err(|e| format!("bad row `{r}`: {e}"))?;
    let col = c.trim().parse().map_err(|e| format!("bad column `{c}`: {e}"))?;
    Ok(Cell::new(row, col))
}

fn parse_cells(s: &str) -> std::result::Result<CellList, String> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(parse_cell)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(CellList)
}

/// Reads the budget override, if set.
pub fn budget_override() -> Result<Option<u64>> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|&b| b > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{BUDGET_ENV} must be a positive integer, got `{v}`"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("{BUDGET_ENV}: {e}"))),
    }
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Budget { .. } => EXIT_BUDGET,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit status. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_command(&cli.command) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::Unreachable) => EXIT_UNREACHABLE,
        Err(e) => {
            eprintln!("riskplan: {e}");
            exit_code(&e)
        }
    }
}
