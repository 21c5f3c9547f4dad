//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or schema error,
//! 3 internal invariant violation. Failures print one line to stderr:
//! `error code=<n> kind=<usage|data|internal> message="..."`.

mod bench;
mod commands;
mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};

pub use config::RunConfig;

use crate::error::Error;

pub const THREADS_ENV: &str = "REID_RERANK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "reid-rerank", version, about = "Cross-camera fusion re-ranking for person re-identification")]
pub struct Cli {
    /// Worker threads for batch stages (default: available parallelism).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic train/query/gallery sets.
    Synth(SynthArgs),
    /// Build fused gallery features.
    Fuse(FuseArgs),
    /// Learn combination weights from a labeled training set.
    Fit(FitArgs),
    /// Rank and evaluate (CMC, mAP).
    Eval(EvalArgs),
    /// Write ranked lists only.
    Rank(RankArgs),
    /// Time each scoring stage, sequential and parallel.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub ids: usize,
    #[arg(long, default_value_t = 4)]
    pub cams: usize,
    #[arg(long, default_value_t = 3)]
    pub imgs: usize,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = crate::synth::SynthConfig::default().identity_spread)]
    pub spread: f64,
    #[arg(long, default_value_t = 1.5)]
    pub bias: f64,
    #[arg(long, default_value_t = 0.3)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long)]
    pub gallery: PathBuf,
    /// Metadata CSV (default: gallery path with a `.csv` extension).
    #[arg(long)]
    pub gallery_meta: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Fused feature container; contributors go next to it as `.contributors.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub train_meta: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = crate::amc::DEFAULT_N)]
    pub n: usize,
    #[arg(long, default_value_t = crate::amc::DEFAULT_REPEATS)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep the first run's weights instead of the mean over repeats.
    #[arg(long)]
    pub single_run: bool,
    /// Weights file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Dump the generated measure rows (`s_single,s_refined,cce,label`).
    #[arg(long)]
    pub dump_triplets: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("scoring").required(true).args(["weights", "baseline", "refined_only"])))]
pub struct ScoringArgs {
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long)]
    pub query_meta: Option<PathBuf>,
    #[arg(long)]
    pub gallery: PathBuf,
    #[arg(long)]
    pub gallery_meta: Option<PathBuf>,
    /// Fused gallery features written by `fuse`.
    #[arg(long)]
    pub urf: Option<PathBuf>,
    /// Learned weights written by `fit`.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Plain single-view cosine, weights (1, 0, 0).
    #[arg(long)]
    pub baseline: bool,
    /// Cosine to the fused features only, weights (0, 1, 0).
    #[arg(long)]
    pub refined_only: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[arg(long, default_value_t = crate::pipeline::DEFAULT_MAX_RANK)]
    pub max_rank: usize,
    /// Report file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the ranked lists as CSV.
    #[arg(long)]
    pub rank_list: Option<PathBuf>,
    /// Rows per query in the ranked-list CSV (default: all).
    #[arg(long)]
    pub top: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub top: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Use these sets instead of synthetic data (all three required together).
    #[arg(long, requires_all = ["gallery", "train"])]
    pub query: Option<PathBuf>,
    #[arg(long, requires_all = ["query", "train"])]
    pub gallery: Option<PathBuf>,
    #[arg(long, requires_all = ["query", "gallery"])]
    pub train: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub ids: usize,
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = crate::amc::DEFAULT_N)]
    pub n: usize,
    #[arg(long, default_value_t = crate::amc::DEFAULT_REPEATS)]
    pub repeats: usize,
    #[arg(long, default_value_t = 3)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Internal => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Usage,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Usage => "usage",
            ErrorKind::Data => "data",
            ErrorKind::Internal => "internal",
        };
        let one_line = self.message.replace('\n', " ").replace('"', "'");
        write!(f, "error code={} kind={kind} message=\"{}\"", self.kind.exit_code(), one_line.trim())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::InvalidArgument(_) => ErrorKind::Usage,
            Error::Invariant(_) => ErrorKind::Internal,
            _ => ErrorKind::Data,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

pub(crate) fn meta_path(matrix: &Path, meta: Option<&PathBuf>) -> PathBuf {
    meta.cloned().unwrap_or_else(|| matrix.with_extension("csv"))
}

/// Parses `args` (including the program name), runs the command, and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return 0;
            }
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("{}", CliError::usage(first));
            return 1;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.kind.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads == Some(0) {
        return Err(CliError::usage("--threads must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError {
                kind: ErrorKind::Internal,
                message: e.to_string(),
            })?;
        return pool.install(|| dispatch(cli.command));
    }
    dispatch(cli.command)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Synth(a) => commands::synth(&a),
        Command::Fuse(a) => commands::fuse(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Rank(a) => commands::rank(&a),
        Command::Bench(a) => bench::bench(&a),
    }
}
