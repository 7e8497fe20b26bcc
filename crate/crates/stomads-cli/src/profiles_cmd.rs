//! Profile construction from persisted grid cells. Used by the `profiles`
//! subcommand and by `bench` after its grid finishes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use stomads::profiles::{ConvergenceTest, CostMatrix, ProblemCosts};

use crate::args::{KindArg, ProfilesArgs};
use crate::marker::CellMarker;
use crate::run::{write_atomic, Variant};

/// All completed cell markers of one noise level, keyed by the `sigma...`
/// directory label (e.g. `"0.01"`).
pub type MarkersBySigma = BTreeMap<String, Vec<CellMarker>>;

/// Scans `<root>/runs/sigma*/<variant>/*.json` for completion markers.
///
/// Unparseable or foreign files are skipped: an interrupted writer leaves
/// no marker behind, so whatever parses is a finished cell.
pub fn collect_markers(root: &Path) -> Result<MarkersBySigma> {
    let runs = root.join("runs");
    let mut by_sigma = MarkersBySigma::new();
    let entries = fs::read_dir(&runs)
        .with_context(|| format!("reading {} (expected a bench output directory)", runs.display()))?;
    let mut sigma_dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_dir()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("sigma"))
        })
        .collect();
    sigma_dirs.sort();
    for sigma_dir in sigma_dirs {
        let label = sigma_dir
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_prefix("sigma"))
            .unwrap_or_default()
            .to_string();
        let mut markers = Vec::new();
        let mut variant_dirs: Vec<PathBuf> = fs::read_dir(&sigma_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        variant_dirs.sort();
        for variant_dir in variant_dirs {
            let mut files: Vec<PathBuf> = fs::read_dir(&variant_dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            for file in files {
                let Ok(text) = fs::read_to_string(&file) else {
                    continue;
                };
                if let Ok(marker) = serde_json::from_str::<CellMarker>(&text) {
                    markers.push(marker);
                }
            }
        }
        if !markers.is_empty() {
            by_sigma.insert(label, markers);
        }
    }
    Ok(by_sigma)
}

fn solver_columns(markers: &[CellMarker]) -> Result<Vec<Variant>> {
    let mut out: Vec<Variant> = markers
        .iter()
        .map(|m| m.variant.parse())
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|v| v.sort_key());
    out.dedup();
    Ok(out)
}

/// Builds the convergence-cost matrix of one noise level at tolerance `tau`.
///
/// Rows are (problem, seed) pairs; a pair missing a variant's marker counts
/// as unsolved for that variant, so failed or interrupted cells lower the
/// solved fraction instead of shrinking the problem set.
pub fn cost_matrix(markers: &[CellMarker], tau: f64) -> Result<CostMatrix> {
    let variants = solver_columns(markers)?;
    let mut rows: BTreeMap<(String, u64), BTreeMap<String, &CellMarker>> = BTreeMap::new();
    for m in markers {
        rows.entry((m.problem.clone(), m.seed))
            .or_default()
            .insert(m.variant.clone(), m);
    }
    let mut problems = Vec::with_capacity(rows.len());
    for ((name, seed), by_variant) in &rows {
        let any = by_variant
            .values()
            .next()
            .expect("a row exists only because some marker created it");
        let test = ConvergenceTest::new(tau, any.f_star, any.start_value)
            .with_context(|| format!("convergence test for {name} at tau {tau}"))?;
        let threshold = test.threshold();
        let evals = variants
            .iter()
            .map(|v| {
                by_variant
                    .get(&v.to_string())
                    .and_then(|m| m.evals_to_threshold(threshold))
            })
            .collect();
        problems.push(ProblemCosts {
            name: format!("{name}-s{seed}"),
            dimension: any.dimension,
            evals,
        });
    }
    Ok(CostMatrix::new(
        variants.iter().map(Variant::to_string).collect(),
        problems,
    )?)
}

/// Emits one CSV per (sigma, tau, kind) into `out_dir`; returns the paths.
///
/// With `skip_impossible` a performance profile over fewer than two solver
/// columns is skipped with a note instead of failing the whole invocation.
pub fn emit_profiles(
    out_dir: &Path,
    by_sigma: &MarkersBySigma,
    taus: &[f64],
    kinds: &[KindArg],
    skip_impossible: bool,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (sigma_label, markers) in by_sigma {
        for &tau in taus {
            let matrix = cost_matrix(markers, tau)?;
            for &kind in kinds {
                let (prefix, table) = match kind {
                    KindArg::Data => ("data", matrix.data_profile()),
                    KindArg::Perf => ("perf", matrix.performance_profile()),
                };
                let table = match table {
                    Ok(t) => t,
                    Err(e) if skip_impossible => {
                        eprintln!("note: skipping {prefix} profile for sigma {sigma_label}: {e}");
                        continue;
                    }
                    Err(e) => {
                        return Err(e).with_context(|| {
                            format!("{prefix} profile for sigma {sigma_label}, tau {tau}")
                        })
                    }
                };
                let path = out_dir.join(format!("{prefix}_sigma{sigma_label}_tau{tau}.csv"));
                write_atomic(&path, table.to_csv().as_bytes())?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// The `profiles` subcommand.
pub fn run(args: &ProfilesArgs) -> Result<ExitCode> {
    for &tau in &args.taus {
        if !(0.0..=1.0).contains(&tau) {
            bail!("--tau values must lie in [0, 1], got {tau}");
        }
    }
    let by_sigma = collect_markers(&args.records)?;
    if by_sigma.is_empty() {
        bail!(
            "no completed cells under {}",
            args.records.join("runs").display()
        );
    }
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.records.join("profiles"));
    let files = emit_profiles(&out, &by_sigma, &args.taus, &[args.kind], false)?;
    for f in &files {
        println!("{}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}
