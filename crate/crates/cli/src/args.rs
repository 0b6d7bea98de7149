use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use midstop::Mode;

use crate::format::Format;

#[derive(Debug, Parser)]
#[command(name = "midstop", version, about = "Stop on the observation closest to 1/2, knowing only ranks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stopping regions and values of the optimal rule.
    Policy(PolicyArgs),
    /// Success probability of the optimal rule.
    Value(ValueArgs),
    /// Monte-Carlo estimate of a rule's success probability.
    Simulate(SimulateArgs),
    /// Lower and upper bounds for a grid of n.
    Bounds(BoundsArgs),
    /// First stopping threshold against its asymptotic form.
    Threshold(ThresholdArgs),
    /// Numeric lemma and corollary checks.
    Check(CheckArgs),
    /// The n = 10 table in both rank models.
    Table1(Table1Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Paper,
    Exact,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Paper => Mode::Paper,
            ModeArg::Exact => Mode::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Optimal,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    L4,
    Dec,
    Cor,
    Threshold,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file (plus `<out>.manifest.json`) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    #[arg(long, value_parser = positive)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValueArgs {
    #[arg(long, value_parser = positive, required_unless_present = "n_list", conflicts_with = "n_list")]
    pub n: Option<usize>,
    /// Comma-separated list of n.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = positive)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "optimal")]
    pub algo: Algo,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// First admissible round of the heuristic (default from n).
    #[arg(long)]
    pub h: Option<usize>,
    /// Half-width of the heuristic's rank window (default from n).
    #[arg(long)]
    pub w: Option<usize>,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Comma-separated list of n (default: 1-2-5 grid from 10 to 10^5).
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Fixed first admissible round instead of the default choice.
    #[arg(long)]
    pub h: Option<usize>,
    /// Fixed half-width instead of the default choice.
    #[arg(long)]
    pub w: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 5000, conflicts_with = "n_list")]
    pub n: usize,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Single `s` for the l4 and cor suites; l4 grid bound otherwise.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub w: Option<usize>,
    /// `n` for the cor and threshold suites.
    #[arg(long)]
    pub n: Option<usize>,
    /// Upper end of the m range for the dec suite.
    #[arg(long, default_value_t = 200)]
    pub m_max: usize,
    /// Seed of the random cor triples.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}
