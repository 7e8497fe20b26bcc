//! Shared run plumbing: solver variants, configuration assembly, atomic
//! result persistence, and the `solve`/`blackbox` subcommands.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use stomads::problems::{instance, NoiseSpec, NoisyBlackbox, ProblemSpec, SubprocessBlackbox};
use stomads::record::RunRecord;
use stomads::solver::{Mode, Sampling, SolveError, SolverConfig};
use stomads::solve;

use crate::args::{BlackboxArgs, ModeArg, SolveArgs};
use crate::marker::CellMarker;

/// A named solver variant of the benchmark grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Stochastic solver averaging a constant number of samples.
    Nk(u64),
    /// Deterministic acceptance semantics: one sample, plain decrease.
    Mads,
}

impl Variant {
    /// Canonical ordering: nk variants by sample count, then mads.
    pub fn sort_key(self) -> (u8, u64) {
        match self {
            Variant::Nk(k) => (0, k),
            Variant::Mads => (1, 0),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Nk(k) => write!(f, "nk{k}"),
            Variant::Mads => write!(f, "mads"),
        }
    }
}

impl FromStr for Variant {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "mads" {
            return Ok(Variant::Mads);
        }
        if let Some(digits) = s.strip_prefix("nk") {
            let k: u64 = digits
                .parse()
                .with_context(|| format!("bad sample count in variant `{s}`"))?;
            if !(1..=32).contains(&k) {
                bail!("variant `{s}`: sample count must be between 1 and 32");
            }
            return Ok(Variant::Nk(k));
        }
        bail!("unknown variant `{s}` (expected nk1..nk32 or mads)")
    }
}

/// Builds the solver configuration for one run of `variant`.
pub fn variant_config(
    variant: Variant,
    seed: u64,
    budget: Option<u64>,
    eps_stop: f64,
) -> SolverConfig {
    let (sampling, mode) = match variant {
        Variant::Nk(k) => (Sampling::Constant(k), Mode::Stochastic),
        Variant::Mads => (Sampling::Constant(1), Mode::DeterministicMads),
    };
    SolverConfig {
        sampling,
        mode,
        seed,
        budget,
        eps_stop,
        ..SolverConfig::default()
    }
}

/// The effective seed: `STOMADS_SEED` when set, else `cli_seed`.
pub fn seed_override(cli_seed: u64) -> Result<u64> {
    match std::env::var("STOMADS_SEED") {
        Ok(raw) => raw
            .trim()
            .parse::<u64>()
            .with_context(|| format!("STOMADS_SEED must be an unsigned integer, got `{raw}`")),
        Err(std::env::VarError::NotPresent) => Ok(cli_seed),
        Err(e) => Err(e).context("STOMADS_SEED is not valid unicode"),
    }
}

/// Runs one suite problem under `sigma`-scaled noise.
pub fn run_suite_problem(
    problem: &ProblemSpec,
    sigma: f64,
    config: &SolverConfig,
) -> Result<RunRecord, SolveError> {
    let noise = if sigma > 0.0 {
        NoiseSpec::for_instance(problem, sigma)
    } else {
        NoiseSpec::noiseless()
    };
    let mut blackbox = NoisyBlackbox::new(problem.clone(), noise, config.seed);
    solve(&mut blackbox, config)
}

/// Completion marker for a finished suite-problem run.
pub fn marker_for(
    problem: &ProblemSpec,
    variant: Variant,
    sigma: f64,
    record: &RunRecord,
) -> CellMarker {
    let mut improvements = Vec::new();
    let mut best = f64::INFINITY;
    for row in &record.evals {
        if let Some(t) = row.true_value {
            if t < best {
                best = t;
                improvements.push((row.eval_index, t));
            }
        }
    }
    CellMarker {
        problem: problem.name().to_string(),
        dimension: problem.dimension(),
        variant: variant.to_string(),
        sigma,
        seed: record.config.seed,
        budget: record.config.effective_budget(problem.dimension()),
        evals_used: record.evals_used(),
        stop: record.stop.to_string(),
        f_star: problem.f_star(),
        start_value: problem.start_value(),
        best_true_f: record.best_true_f(),
        final_true_f: record.final_true_f,
        min_mesh_size: record.min_mesh_size(),
        failed: None,
        improvements,
    }
}

/// Writes `bytes` to `path` atomically: temp file in the same directory,
/// then rename. Parent directories are created as needed.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&parent)
        .with_context(|| format!("creating directory {}", parent.display()))?;
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| anyhow!("invalid output file name {}", path.display()))?;
    let tmp = parent.join(format!(".{file_name}.tmp"));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("moving {} into place", path.display()))?;
    Ok(())
}

/// Persists one grid cell: the trace CSV first, then the JSON marker whose
/// presence declares the cell complete.
pub fn write_cell(csv_path: &Path, record: &RunRecord, marker: &CellMarker) -> Result<()> {
    write_atomic(csv_path, record.csv_string().as_bytes())?;
    let mut json = serde_json::to_string_pretty(marker)?;
    json.push('\n');
    write_atomic(&csv_path.with_extension("json"), json.as_bytes())?;
    Ok(())
}

/// `<problem>-seed<seed>` file stem shared by a cell's CSV and marker.
pub fn cell_stem(problem: &str, seed: u64) -> String {
    format!("{problem}-seed{seed}")
}

/// Directory of one (sigma, variant) slice of the grid.
pub fn cell_dir(out: &Path, sigma: f64, variant: Variant) -> PathBuf {
    out.join("runs")
        .join(format!("sigma{sigma}"))
        .join(variant.to_string())
}

fn solve_failure(err: SolveError) -> anyhow::Error {
    let evals = err.partial.as_ref().map_or(0, |r| r.evals_used());
    anyhow!("solver stopped after {evals} evaluations: {}", err.error)
}

/// The `solve` subcommand.
pub fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let problem = instance(&args.problem)?;
    let seed = seed_override(args.seed)?;
    let variant = match args.mode {
        ModeArg::Stochastic => Variant::Nk(args.nk),
        ModeArg::Mads => Variant::Mads,
    };
    let config = variant_config(variant, seed, args.budget, args.eps_stop);
    let record = run_suite_problem(&problem, args.sigma, &config).map_err(solve_failure)?;

    if let Some(dir) = &args.out {
        let marker = marker_for(&problem, variant, args.sigma, &record);
        let csv_path = dir.join(format!("{}.csv", cell_stem(problem.name(), seed)));
        write_cell(&csv_path, &record, &marker)?;
        println!("{}", csv_path.display());
        println!("{}", csv_path.with_extension("json").display());
    } else {
        println!("{}", serde_json::to_string_pretty(&record.summary())?);
    }
    Ok(ExitCode::SUCCESS)
}

/// The `blackbox` subcommand.
pub fn cmd_blackbox(args: &BlackboxArgs) -> Result<ExitCode> {
    if args.start.is_empty() {
        bail!("--start needs at least one coordinate");
    }
    let seed = seed_override(args.seed)?;
    let config = variant_config(Variant::Nk(args.nk), seed, args.budget, args.eps_stop);
    let timeout = Duration::from_secs(args.timeout_secs);
    let mut blackbox =
        SubprocessBlackbox::spawn(&args.cmd, &args.args, args.start.clone(), timeout)
            .with_context(|| format!("spawning `{}`", args.cmd))?;
    let record = solve(&mut blackbox, &config).map_err(solve_failure)?;

    if let Some(dir) = &args.out {
        let program = Path::new(&args.cmd)
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("blackbox");
        let csv_path = dir.join(format!("{}.csv", cell_stem(program, seed)));
        write_atomic(&csv_path, record.csv_string().as_bytes())?;
        let mut json = serde_json::to_string_pretty(&record.summary())?;
        json.push('\n');
        write_atomic(&csv_path.with_extension("json"), json.as_bytes())?;
        println!("{}", csv_path.display());
        println!("{}", csv_path.with_extension("json").display());
    } else {
        println!("{}", serde_json::to_string_pretty(&record.summary())?);
    }
    Ok(ExitCode::SUCCESS)
}
