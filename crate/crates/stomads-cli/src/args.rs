//! Command-line interface definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Benchmark harness and command-line front end for the `stomads` solver.
#[derive(Debug, Parser)]
#[command(
    name = "stomads",
    version,
    about = "StoMADS noisy blackbox minimization: single runs, benchmark grids, profile reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the solver once on a named suite problem.
    Solve(SolveArgs),
    /// Run a problem x variant x noise x seed grid and emit profile CSVs.
    Bench(BenchArgs),
    /// Rebuild profile CSVs from a previous bench output directory.
    Profiles(ProfilesArgs),
    /// Minimize an external evaluator spoken to over stdin/stdout lines.
    Blackbox(BlackboxArgs),
}

/// Acceptance semantics selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Noisy objective: averaged estimates and the three-way outcome test.
    Stochastic,
    /// Exact objective: single evaluations and plain decrease acceptance.
    Mads,
}

/// Which profile kind `profiles` should emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// Fraction solved vs. evaluations / (n+1).
    Data,
    /// Fraction solved vs. ratio to the best solver on each problem.
    Perf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Suite instance name, e.g. rosenbrock-x1.
    #[arg(long)]
    pub problem: String,

    /// Relative noise scale sigma; 0 disables noise.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,

    /// Samples per estimate in stochastic mode (ignored under --mode mads).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=32))]
    pub nk: u64,

    /// Random seed; the STOMADS_SEED environment variable overrides it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Evaluation budget; default 1000*(n+1).
    #[arg(long)]
    pub budget: Option<u64>,

    /// Acceptance semantics.
    #[arg(long, value_enum, default_value_t = ModeArg::Stochastic)]
    pub mode: ModeArg,

    /// Stop once the frame size drops below this tolerance (0 disables).
    #[arg(long, default_value_t = 0.0)]
    pub eps_stop: f64,

    /// Directory for <problem>-seed<seed>.csv plus a JSON sidecar; when
    /// omitted the run summary is printed to stdout instead.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated name filters (substring match); default: whole suite.
    #[arg(long)]
    pub suite: Option<String>,

    /// Solver variants to compare (nk1..nk32 and/or mads). Profile columns
    /// are always ordered nk ascending, then mads.
    #[arg(long, value_delimiter = ',',
          default_values_t = ["nk1", "nk2", "nk3", "nk4", "nk5"].map(String::from))]
    pub variants: Vec<String>,

    /// Noise scales to run.
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.03, 0.05])]
    pub sigmas: Vec<f64>,

    /// Seeds per cell; seed values are base..base+seeds where base comes
    /// from STOMADS_SEED (default 0).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,

    /// Convergence-test tolerances for the emitted profiles.
    #[arg(long = "tau", value_delimiter = ',', default_values_t = [0.1, 0.001])]
    pub taus: Vec<f64>,

    /// Evaluation budget per cell; default 1000*(n+1).
    #[arg(long)]
    pub budget: Option<u64>,

    /// Skip cells whose completion marker is already on disk.
    #[arg(long)]
    pub resume: bool,

    /// Exit nonzero if any grid cell fails.
    #[arg(long)]
    pub strict: bool,

    /// Worker threads; default: one per CPU.
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Output directory.
    #[arg(long, default_value = "bench-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProfilesArgs {
    /// Bench output directory to read (expects its runs/ subtree).
    #[arg(long = "in", value_name = "RECORDS_DIR")]
    pub records: PathBuf,

    /// Convergence-test tolerances.
    #[arg(long = "tau", value_delimiter = ',', default_values_t = [0.1, 0.001])]
    pub taus: Vec<f64>,

    /// Which profile kind to emit.
    #[arg(long, value_enum)]
    pub kind: KindArg,

    /// Output directory; default <RECORDS_DIR>/profiles.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BlackboxArgs {
    /// Program to spawn. It receives one whitespace-separated point per
    /// stdin line and must answer one objective value per stdout line.
    #[arg(long)]
    pub cmd: String,

    /// Comma-separated start point, e.g. --start=-1.2,1. Its length fixes
    /// the problem dimension.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub start: Vec<f64>,

    /// Samples per estimate (1..=32).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=32))]
    pub nk: u64,

    /// Random seed; the STOMADS_SEED environment variable overrides it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Evaluation budget; default 1000*(n+1).
    #[arg(long)]
    pub budget: Option<u64>,

    /// Stop once the frame size drops below this tolerance (0 disables).
    #[arg(long, default_value_t = 0.0)]
    pub eps_stop: f64,

    /// Deadline in seconds for each reply from the child.
    #[arg(long, default_value_t = 60)]
    pub timeout_secs: u64,

    /// Directory for the trace CSV plus a JSON summary; when omitted the
    /// run summary is printed to stdout instead.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Arguments passed to the program, after `--`.
    #[arg(last = true)]
    pub args: Vec<String>,
}
