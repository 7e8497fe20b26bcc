//! The `bench` subcommand: runs the problem x variant x noise x seed grid in
//! a worker pool, persists each cell atomically, and emits profile CSVs.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use stomads::problems::{suite, ProblemSpec};

use crate::args::{BenchArgs, KindArg};
use crate::marker::CellMarker;
use crate::profiles_cmd::{collect_markers, emit_profiles};
use crate::run::{
    cell_dir, cell_stem, marker_for, run_suite_problem, seed_override, variant_config,
    write_atomic, write_cell, Variant,
};

struct Cell<'a> {
    problem: &'a ProblemSpec,
    variant: Variant,
    sigma: f64,
    seed: u64,
}

impl Cell<'_> {
    fn id(&self) -> String {
        format!(
            "sigma{} {} {} seed{}",
            self.sigma,
            self.variant,
            self.problem.name(),
            self.seed
        )
    }
}

enum CellStatus {
    Ran,
    Skipped,
    /// The run failed; `persisted` says whether a partial trace and failure
    /// marker made it to disk (the durable failure log is built from
    /// markers, so only unpersisted failures need their status line kept).
    Failed { message: String, persisted: bool },
}

#[derive(Serialize)]
struct Manifest<'a> {
    format_version: u32,
    suite_filter: Option<&'a str>,
    variants: Vec<String>,
    sigmas: &'a [f64],
    seeds: Vec<u64>,
    budget: Option<u64>,
    taus: &'a [f64],
    problems: Vec<&'a str>,
    cells_total: usize,
    cells_ran: usize,
    cells_skipped: usize,
    cells_failed: usize,
    profile_files: Vec<String>,
}

fn parse_variants(labels: &[String]) -> Result<Vec<Variant>> {
    let mut variants = labels
        .iter()
        .map(|l| l.parse())
        .collect::<Result<Vec<Variant>>>()?;
    variants.sort_by_key(|v| v.sort_key());
    let before = variants.len();
    variants.dedup();
    if variants.len() != before {
        bail!("--variants lists a variant twice");
    }
    Ok(variants)
}

/// A cell is complete when its marker exists and parses; an interrupted
/// writer leaves at most a temp file or a CSV without a marker behind.
fn cell_is_complete(marker_path: &Path) -> bool {
    fs::read_to_string(marker_path)
        .ok()
        .and_then(|text| serde_json::from_str::<CellMarker>(&text).ok())
        .is_some()
}

fn run_one(cell: &Cell<'_>, args: &BenchArgs) -> CellStatus {
    let dir = cell_dir(&args.out, cell.sigma, cell.variant);
    let csv_path = dir.join(format!(
        "{}.csv",
        cell_stem(cell.problem.name(), cell.seed)
    ));
    let marker_path = csv_path.with_extension("json");
    if args.resume && cell_is_complete(&marker_path) {
        return CellStatus::Skipped;
    }
    let config = variant_config(cell.variant, cell.seed, args.budget, 0.0);
    match run_suite_problem(cell.problem, cell.sigma, &config) {
        Ok(record) => {
            let marker = marker_for(cell.problem, cell.variant, cell.sigma, &record);
            match write_cell(&csv_path, &record, &marker) {
                Ok(()) => CellStatus::Ran,
                Err(e) => CellStatus::Failed {
                    message: format!("{e:#}"),
                    persisted: false,
                },
            }
        }
        Err(e) => {
            // Keep whatever trace the run accumulated: profile scoring then
            // counts the cell as unsolved from the failure point (or solved,
            // if it crossed the threshold before dying) instead of silently
            // dropping the problem from the denominator.
            let mut persisted = false;
            let mut message = e.to_string();
            if let Some(partial) = &e.partial {
                let mut marker = marker_for(cell.problem, cell.variant, cell.sigma, partial);
                marker.failed = Some(e.error.to_string());
                match write_cell(&csv_path, partial, &marker) {
                    Ok(()) => persisted = true,
                    Err(werr) => {
                        message =
                            format!("{e}; the partial record also failed to persist: {werr:#}");
                    }
                }
            }
            CellStatus::Failed { message, persisted }
        }
    }
}

/// The `bench` subcommand.
pub fn run(args: &BenchArgs) -> Result<ExitCode> {
    let problems = suite(args.suite.as_deref())?;
    let variants = parse_variants(&args.variants)?;
    for &sigma in &args.sigmas {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            bail!("--sigmas values must be finite and nonnegative, got {sigma}");
        }
    }
    for &tau in &args.taus {
        if !(0.0..=1.0).contains(&tau) {
            bail!("--tau values must lie in [0, 1], got {tau}");
        }
    }
    let base_seed = seed_override(0)?;
    let seeds: Vec<u64> = (0..args.seeds).map(|i| base_seed + i).collect();

    let mut cells = Vec::new();
    for &sigma in &args.sigmas {
        for &variant in &variants {
            for problem in &problems {
                for &seed in &seeds {
                    cells.push(Cell {
                        problem,
                        variant,
                        sigma,
                        seed,
                    });
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .context("building the worker pool")?;
    let statuses: Vec<(String, CellStatus)> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| (cell.id(), run_one(cell, args)))
            .collect()
    });

    let mut ran = 0usize;
    let mut skipped = 0usize;
    let mut failed = 0usize;
    let mut unpersisted_failures: Vec<String> = Vec::new();
    for (id, status) in &statuses {
        match status {
            CellStatus::Ran => ran += 1,
            CellStatus::Skipped => skipped += 1,
            CellStatus::Failed { message, persisted } => {
                failed += 1;
                eprintln!("cell failed: {id}: {message}");
                if !persisted {
                    unpersisted_failures.push(format!("{id}: {message}"));
                }
            }
        }
    }

    let by_sigma = collect_markers(&args.out)?;

    // The failure log is durable: it reflects every failed cell on disk, not
    // just this invocation's, so a later --resume pass doesn't erase the
    // record of what went wrong earlier.
    let mut failure_lines = unpersisted_failures;
    for (sigma_label, markers) in &by_sigma {
        for m in markers {
            if let Some(msg) = &m.failed {
                failure_lines.push(format!(
                    "sigma{sigma_label} {} {} seed{}: {msg} (after {} evaluations)",
                    m.variant, m.problem, m.seed, m.evals_used
                ));
            }
        }
    }
    failure_lines.sort();
    let failures_log = args.out.join("failures.log");
    if failure_lines.is_empty() {
        if failures_log.exists() {
            fs::remove_file(&failures_log)
                .with_context(|| format!("removing stale {}", failures_log.display()))?;
        }
    } else {
        write_atomic(&failures_log, (failure_lines.join("\n") + "\n").as_bytes())?;
    }
    let profile_files = emit_profiles(
        &args.out.join("profiles"),
        &by_sigma,
        &args.taus,
        &[KindArg::Data, KindArg::Perf],
        true,
    )?;

    let manifest = Manifest {
        format_version: 1,
        suite_filter: args.suite.as_deref(),
        variants: variants.iter().map(Variant::to_string).collect(),
        sigmas: &args.sigmas,
        seeds,
        budget: args.budget,
        taus: &args.taus,
        problems: problems.iter().map(ProblemSpec::name).collect(),
        cells_total: cells.len(),
        cells_ran: ran,
        cells_skipped: skipped,
        cells_failed: failed,
        profile_files: profile_files
            .iter()
            .map(|p| relative_to(p, &args.out))
            .collect(),
    };
    let mut manifest_json = serde_json::to_string_pretty(&manifest)?;
    manifest_json.push('\n');
    write_atomic(&args.out.join("manifest.json"), manifest_json.as_bytes())?;

    println!(
        "bench: {} cells ({ran} ran, {skipped} skipped, {failed} failed), {} profile files -> {}",
        cells.len(),
        profile_files.len(),
        args.out.display()
    );
    if args.strict && failed > 0 {
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn relative_to(path: &Path, base: &Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .display()
        .to_string()
}
