//! On-disk completion markers for benchmark grid cells.

use serde::{Deserialize, Serialize};

/// Sidecar written next to a cell's CSV once its run finished.
///
/// The marker carries everything profile construction needs, so re-scoring
/// under a different convergence tolerance never re-reads the full traces.
/// `improvements` holds the running best true objective at every evaluation
/// index where it improved; between breakpoints the running best equals the
/// previous entry, so the first index reaching any threshold is exact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellMarker {
    /// Suite instance name.
    pub problem: String,
    /// Problem dimension n.
    pub dimension: usize,
    /// Solver variant label (nk1..nk32 or mads).
    pub variant: String,
    /// Relative noise scale the cell ran under.
    pub sigma: f64,
    /// Seed of the run.
    pub seed: u64,
    /// Evaluation budget in force.
    pub budget: u64,
    /// Evaluations actually consumed.
    pub evals_used: u64,
    /// Why the run stopped.
    pub stop: String,
    /// Best known objective value of the instance.
    pub f_star: f64,
    /// Exact objective at the start point.
    pub start_value: f64,
    /// Best exact objective seen during the run.
    pub best_true_f: Option<f64>,
    /// Exact objective at the final incumbent.
    pub final_true_f: Option<f64>,
    /// Smallest mesh size reached.
    pub min_mesh_size: Option<f64>,
    /// The error that ended the run early, if it did not finish cleanly.
    ///
    /// A failed cell still carries the trace it accumulated, so profile
    /// scoring counts it as solved when it crossed the threshold before
    /// dying and as unsolved otherwise. Reruns of a failed cell reproduce
    /// the same failure (everything is seeded), so resume skips it.
    #[serde(default)]
    pub failed: Option<String>,
    /// (evaluation index, running best true f) at each improvement.
    pub improvements: Vec<(u64, f64)>,
}

impl CellMarker {
    /// First evaluation index whose running best reaches `threshold`, or
    /// `None` if the run never got there.
    pub fn evals_to_threshold(&self, threshold: f64) -> Option<u64> {
        self.improvements
            .iter()
            .find(|(_, best)| *best <= threshold)
            .map(|(idx, _)| *idx)
    }
}
