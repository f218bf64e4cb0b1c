//! Command-line grammar.

use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use keller_algebra::MonomialOrder;
use keller_core::checker::{CheckConfig, DEFAULT_SLICE_LIMIT};
use keller_core::oracle::DEFAULT_ORACLE_LIMIT;
use keller_core::randgen::{Family, DEFAULT_BOUND};
use keller_core::ZkVariant;

/// Environment variable holding the default per-run time budget in seconds.
pub const TIMEOUT_ENV: &str = "KELLER_TIMEOUT";

#[derive(Debug, Parser)]
#[command(name = "keller", version, about = "Exact checks for cubic-linear maps x + (Ax)^3")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide C1, C2, the injectivity criterion or the fixed-witness criteria.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Decide whether x + (Ax)^3 has Jacobian determinant 1.
    IsDruzkowski(DruzkowskiArgs),
    /// Apply the diagonal action A -> D A D^-3.
    Conjugate(ConjugateArgs),
    /// Scale a witness z to a 0/1 vector with its support first.
    Normalize(NormalizeArgs),
    /// Draw a random matrix from a structured family.
    Random(RandomArgs),
    /// Operations on the matrix corpus.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Search a rank-r slice of the witness variety.
    ExploreSlice(SliceArgs),
    /// Decide invertibility by iterating the inverse-Jacobian derivation.
    Oracle(OracleArgs),
    /// Re-check a cofactor certificate.
    VerifyCert(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum CheckCommand {
    C1(CheckArgs),
    C2(CheckArgs),
    Jc(CheckArgs),
    Zk(ZkArgs),
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Re-derive the published facts for every entry.
    Run(CorpusArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Lex,
    Grevlex,
}

impl From<OrderArg> for MonomialOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Lex => MonomialOrder::Lex,
            OrderArg::Grevlex => MonomialOrder::Grevlex,
        }
    }
}

/// A wall-clock budget; `None` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timeout(pub Option<Duration>);

/// Seconds as a decimal; `0` removes the limit.
pub fn parse_timeout(text: &str) -> Result<Timeout, String> {
    let secs: f64 = text.trim().parse().map_err(|_| format!("invalid number of seconds {text:?}"))?;
    if !secs.is_finite() || secs < 0.0 {
        return Err(format!("timeout must be a nonnegative number of seconds, got {text:?}"));
    }
    Ok(Timeout((secs > 0.0).then(|| Duration::from_secs_f64(secs))))
}

fn parse_variant(text: &str) -> Result<ZkVariant, String> {
    text.parse()
}

fn parse_family(text: &str) -> Result<Family, String> {
    text.parse()
}

/// Report destination and certificate directory.
#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Append a JSON report line to this file (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Write every certificate found in the verdicts to this directory.
    #[arg(long, value_name = "DIR")]
    pub cert_dir: Option<PathBuf>,
}

/// Engine and Druzkowski-test settings shared by the checking commands.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "grevlex")]
    pub order: OrderArg,
    /// Wall-clock budget per Groebner run in seconds (0 = none).
    #[arg(long, env = TIMEOUT_ENV, value_parser = parse_timeout, value_name = "SECS")]
    pub timeout: Option<Timeout>,
    /// Track cofactors and emit certificates where the check supports it.
    #[arg(long)]
    pub cofactors: bool,
    /// Skip structural rules and prefilters.
    #[arg(long)]
    pub no_fast_paths: bool,
    /// Random trials for the Druzkowski test above the symbolic limit.
    #[arg(long, default_value_t = 64)]
    pub trials: u32,
    /// Seed for the randomized Druzkowski test.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl EngineArgs {
    pub fn config(&self) -> CheckConfig {
        let mut cfg = CheckConfig::default();
        cfg.gb.order = self.order.into();
        if let Some(Timeout(t)) = self.timeout {
            cfg.gb.budget.wall_clock = t;
        }
        cfg.gb.track_cofactors = self.cofactors;
        cfg.fast_paths = !self.no_fast_paths;
        cfg.druzkowski.trials = self.trials;
        cfg.druzkowski.seed = self.seed;
        cfg
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Matrix JSON file.
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ZkArgs {
    #[command(flatten)]
    pub check: CheckArgs,
    /// Values of k: `17`, `3,5,7` or `3..17`; defaults to 3..n.
    #[arg(long, value_name = "LIST")]
    pub k: Option<String>,
    #[arg(long, value_parser = parse_variant, default_value = "thm19")]
    pub variant: ZkVariant,
}

#[derive(Debug, Args)]
pub struct DruzkowskiArgs {
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    /// Use random evaluation with this many trials instead of expansion.
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Entries of the evaluation points lie in [-bound, bound].
    #[arg(long, default_value_t = 1_000_000)]
    pub bound: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConjugateArgs {
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    /// Diagonal of D, comma separated scalars.
    #[arg(long, value_name = "D1,D2,...")]
    pub diag: String,
    /// Write the result here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    /// Witness z, comma separated scalars.
    #[arg(long, value_name = "Z1,Z2,...")]
    pub witness: String,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RandomArgs {
    #[arg(long, value_parser = parse_family, default_value = "rank_r")]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    /// Target rank; defaults to n.
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BOUND)]
    pub bound: u64,
    #[arg(long)]
    pub nonnegative: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Run a single entry.
    #[arg(long, value_name = "ID")]
    pub only: Option<String>,
    /// Corpus directory; defaults to the embedded copy.
    #[arg(long, value_name = "DIR")]
    pub corpus_dir: Option<PathBuf>,
    /// Check only structure and the Druzkowski property.
    #[arg(long)]
    pub structural: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub rank: usize,
    /// Largest n accepted.
    #[arg(long, default_value_t = DEFAULT_SLICE_LIMIT)]
    pub limit: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    /// Largest n accepted.
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    pub limit: usize,
    #[arg(long, env = TIMEOUT_ENV, value_parser = parse_timeout, value_name = "SECS")]
    pub timeout: Option<Timeout>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Certificate JSON file.
    #[arg(long, value_name = "FILE")]
    pub cert: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `17`, `3,5,7` or `3..17` (inclusive).
pub fn parse_k_list(text: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid k list {text:?}");
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    let mut ks: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    ks.sort_unstable();
    ks.dedup();
    Ok(ks)
}
