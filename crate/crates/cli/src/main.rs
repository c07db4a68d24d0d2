//! `clearpack`: generate instances, solve strip packing, check pairwise
//! idealness, certify dependence covers and draw layouts.
//!
//! Exit codes: 0 success or ideal, 2 a fractional vertex was found,
//! 1 any other failure.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clearpack::{FormulationKind, Rational};

#[derive(Parser, Debug)]
#[command(name = "clearpack", version, about = "Exact strip packing with clearances and pairwise idealness checks")]
struct Cli {
    /// JSON file with default settings; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random instance in a 100-unit wide strip.
    Generate(GenerateArgs),
    /// Solve strip packing from the greedy warm start.
    Solve(SolveArgs),
    /// Look for fractional vertices of a pairwise relaxation.
    CheckIdeal(CheckIdealArgs),
    /// Certify the dependence cover families at random parameters.
    VerifyLemmas(VerifyLemmasArgs),
    /// Compare every formulation with the disjunct-enumeration optimum.
    OracleCompare(OracleCompareArgs),
    /// Draw a layout as SVG.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Number of objects.
    #[arg(short = 'n', long)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Strip width.
    #[arg(long, default_value = "100")]
    pub width: Rational,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(short, long)]
    pub instance: Option<PathBuf>,
    #[arg(short, long, value_parser = parse_kind)]
    pub formulation: Option<FormulationKind>,
    /// Add sequence-pair inequalities.
    #[arg(long)]
    pub seq: bool,
    /// Branch on area-based priorities first.
    #[arg(long)]
    pub branch: bool,
    /// Replace dynamic bound rows by static variable bounds.
    #[arg(long)]
    pub static_bounds: bool,
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Start without the greedy incumbent.
    #[arg(long)]
    pub no_warm_start: bool,
    /// Result JSON; stdout when omitted.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Also draw the final layout.
    #[arg(long, value_name = "SVG")]
    pub render: Option<PathBuf>,
    /// Branch-and-bound log as JSON lines.
    #[arg(long, value_name = "JSONL")]
    pub log: Option<PathBuf>,
    /// Export the model in LP format.
    #[arg(long, value_name = "LP")]
    pub write_lp: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Enumeration,
    Iom,
    Campaign,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EnumChoice {
    /// Double description.
    Dd,
    /// Exhaustive row subsets.
    Subsets,
}

#[derive(Args, Debug)]
pub struct CheckIdealArgs {
    #[arg(short, long, alias = "formulation", value_parser = parse_kind)]
    pub kind: Option<FormulationKind>,
    /// Defaults to `campaign` when `--campaign` is given, else `enumeration`.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Two 2x2 objects without clearances in a 10x10 region.
    #[arg(long)]
    pub theorem3: bool,
    /// Take the pair `--pair` of this instance.
    #[arg(short, long)]
    pub instance: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2])]
    pub pair: Vec<usize>,
    /// JSON with `lb`, `ub` (per object, [x, y]) and `pm` (per ordered pair).
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Number of sampled parameter sets.
    #[arg(long, value_name = "N")]
    pub campaign: Option<usize>,
    /// Required slack in `PM <= UB - LB - eps`.
    #[arg(long)]
    pub eps: Option<Rational>,
    /// Grid denominator.
    #[arg(long)]
    pub den: Option<i64>,
    /// Region size of sampled windows.
    #[arg(long, default_value_t = 10)]
    pub radius: i64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep margins at least the window offsets, as clearance data always does.
    #[arg(long, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub window_consistent: Option<bool>,
    #[arg(long, value_enum, default_value = "dd")]
    pub method: EnumChoice,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyLemmasArgs {
    #[arg(short, long, alias = "formulation", value_parser = parse_kind)]
    pub kind: Option<FormulationKind>,
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Include families that only cut integral points.
    #[arg(long)]
    pub with_optional: bool,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleCompareArgs {
    #[arg(short, long)]
    pub instance: Option<PathBuf>,
    /// Objects per generated instance when no instance is given.
    #[arg(short = 'n', long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "40")]
    pub width: Rational,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(short, long)]
    pub instance: Option<PathBuf>,
    /// A `solve` result or a bare layout JSON.
    #[arg(short, long)]
    pub solution: PathBuf,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Pixels per unit.
    #[arg(long, default_value_t = svg::DEFAULT_SCALE)]
    pub scale: f64,
}

fn parse_kind(s: &str) -> Result<FormulationKind, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = match &cli.command {
        Command::Generate(_) => "generate",
        Command::Solve(_) => "solve",
        Command::CheckIdeal(_) => "check-ideal",
        Command::VerifyLemmas(_) => "verify-lemmas",
        Command::OracleCompare(_) => "oracle-compare",
        Command::Render(_) => "render",
    };
    let result = config::RunConfig::load(cli.config.as_deref(), name).and_then(|cfg| match cli.command {
        Command::Generate(a) => commands::generate(a, &cfg),
        Command::Solve(a) => commands::solve(a, &cfg),
        Command::CheckIdeal(a) => commands::check_ideal(a, &cfg),
        Command::VerifyLemmas(a) => commands::verify_lemmas(a, &cfg),
        Command::OracleCompare(a) => commands::oracle_compare(a, &cfg),
        Command::Render(a) => commands::render(a, &cfg),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
